// Elements of the form-valued Hom spaces: finite sums of terms
// (basis form) tensor (graded map), with Koszul-sign composition.
#pragma once

#include <map>
#include <optional>
#include <set>

#include "cohesive/base_algebra.hpp"
#include "cohesive/graded.hpp"

namespace cohesive {

// Scalar-valued counterpart: a plain coefficient vector over the base basis.
struct BaseElement {
  BasePtr base;
  Vector coeffs;

  static BaseElement zero(BasePtr b) {
    return {b, Vector::Zero(b ? b->dim() : 0)};
  }
  double norm() const { return coeffs.norm(); }
  BaseElement differential() const { return {base, base->differential() * coeffs}; }
  BaseElement operator+(const BaseElement& o) const { return {base, coeffs + o.coeffs}; }
  BaseElement operator-(const BaseElement& o) const { return {base, coeffs - o.coeffs}; }
  BaseElement operator*(cplx s) const { return {base, coeffs * s}; }
};

class AlgebraElement {
 public:
  // Term key: (base basis index, endomorphism degree of the map factor).
  using Key = std::pair<int, int>;

  AlgebraElement() = default;
  AlgebraElement(BasePtr base, GradedSpace source, GradedSpace target)
      : base_(std::move(base)), source_(std::move(source)), target_(std::move(target)) {}

  static AlgebraElement zero(BasePtr base, const GradedSpace& source,
                             const GradedSpace& target) {
    return AlgebraElement(base, source, target);
  }
  static AlgebraElement zero_endo(BasePtr base, const GradedSpace& space) {
    return AlgebraElement(base, space, space);
  }
  static AlgebraElement identity(BasePtr base, const GradedSpace& space) {
    AlgebraElement e(base, space, space);
    e.add_term(base->unit_index(), GradedMap::identity(space));
    return e;
  }

  const BasePtr& base() const { return base_; }
  const GradedSpace& source() const { return source_; }
  const GradedSpace& target() const { return target_; }
  const std::map<Key, GradedMap>& terms() const { return terms_; }
  bool is_endo() const { return source_ == target_; }
  bool is_zero() const { return terms_.empty(); }

  void add_term(int base_index, const GradedMap& m) {
    if (m.source() != source_ || m.target() != target_)
      throw std::invalid_argument("AlgebraElement: term space mismatch");
    const Key k{base_index, m.degree()};
    auto it = terms_.find(k);
    if (it == terms_.end()) {
      if (m.norm() > tol::drop) terms_.emplace(k, m);
    } else {
      GradedMap sum = it->second + m;
      if (sum.norm() > tol::drop)
        it->second = std::move(sum);
      else
        terms_.erase(it);
    }
  }

  GradedMap coefficient(int base_index, int end_degree) const {
    auto it = terms_.find({base_index, end_degree});
    if (it != terms_.end()) return it->second;
    return GradedMap(source_, target_, end_degree);
  }

  // Total degrees present: deg(omega_r) + deg(map).
  std::set<int> degrees() const {
    std::set<int> d;
    for (const auto& [k, m] : terms_) d.insert(base_->degree(k.first) + k.second);
    return d;
  }

  bool is_homogeneous() const { return degrees().size() <= 1; }

  std::optional<int> total_degree() const {
    auto d = degrees();
    if (d.size() == 1) return *d.begin();
    return std::nullopt;
  }

  double norm() const {
    double s = 0;
    for (const auto& [k, m] : terms_) {
      const double n = m.norm();
      s += n * n;
    }
    return std::sqrt(s);
  }

  AlgebraElement operator*(cplx s) const {
    AlgebraElement r(base_, source_, target_);
    if (std::abs(s) <= tol::drop) return r;
    for (const auto& [k, m] : terms_) r.add_term(k.first, m * s);
    return r;
  }

  AlgebraElement operator+(const AlgebraElement& o) const {
    require_same_shape(o);
    AlgebraElement r = *this;
    for (const auto& [k, m] : o.terms_) r.add_term(k.first, m);
    return r;
  }

  AlgebraElement operator-(const AlgebraElement& o) const {
    return *this + o * cplx(-1.0);
  }

  // Base differential extended by acting on the form factor only.
  AlgebraElement base_differential() const {
    AlgebraElement r(base_, source_, target_);
    const Matrix& d = base_->differential();
    for (const auto& [k, m] : terms_)
      for (int u = 0; u < base_->dim(); ++u) {
        const cplx c = d(u, k.first);
        if (std::abs(c) > tol::drop) r.add_term(u, m * c);
      }
    return r;
  }

  void require_same_shape(const AlgebraElement& o) const {
    if (base_ != o.base_) throw std::invalid_argument("AlgebraElement: base algebra mismatch");
    if (source_ != o.source_ || target_ != o.target_)
      throw std::invalid_argument("AlgebraElement: chain mismatch");
  }

 private:
  BasePtr base_;
  GradedSpace source_, target_;
  std::map<Key, GradedMap> terms_;
};

// g after f, with the Koszul sign (-1)^{deg(map of g) * deg(form of f)} per
// term pair and the form product taken as (form of g)*(form of f).
inline AlgebraElement compose(const AlgebraElement& g, const AlgebraElement& f) {
  if (g.base() != f.base())
    throw std::invalid_argument("compose: base algebra mismatch");
  if (f.target() != g.source())
    throw std::invalid_argument("compose: source/target chain mismatch");
  AlgebraElement r(g.base(), f.source(), g.target());
  const BaseAlgebra& omega = *g.base();
  for (const auto& [gk, gm] : g.terms()) {
    for (const auto& [fk, fm] : f.terms()) {
      const auto& prods = omega.product(gk.first, fk.first);
      if (prods.empty()) continue;
      const GradedMap comp = gm.compose(fm);
      if (comp.is_zero()) continue;
      const cplx sign(parity_sign(static_cast<long long>(gk.second) *
                                  omega.degree(fk.first)));
      for (const auto& [u, c] : prods) r.add_term(u, comp * (sign * c));
    }
  }
  return r;
}

// Graded commutator [x,y] = xy - (-1)^{|x||y|} yx on homogeneous pieces,
// extended bilinearly.
inline AlgebraElement supercommutator(const AlgebraElement& x, const AlgebraElement& y) {
  if (!x.is_endo() || !y.is_endo() || x.source() != y.source())
    throw std::invalid_argument("supercommutator: endomorphism elements over one model required");
  x.require_same_shape(y);
  AlgebraElement r = compose(x, y);
  const BaseAlgebra& omega = *x.base();
  // Bilinear second half, termwise so mixed-degree inputs are handled:
  // subtract (-1)^{|x_i||y_j|} y_j x_i over term pairs.
  for (const auto& [yk, ym] : y.terms()) {
    const int ydeg = omega.degree(yk.first) + yk.second;
    for (const auto& [xk, xm] : x.terms()) {
      const int xdeg = omega.degree(xk.first) + xk.second;
      const auto& prods = omega.product(yk.first, xk.first);
      if (prods.empty()) continue;
      const GradedMap comp = ym.compose(xm);
      if (comp.is_zero()) continue;
      const cplx csign(parity_sign(static_cast<long long>(yk.second) *
                                   omega.degree(xk.first)));
      const cplx bsign(-parity_sign(static_cast<long long>(xdeg) * ydeg));
      for (const auto& [u, c] : prods) r.add_term(u, comp * (csign * bsign * c));
    }
  }
  return r;
}

// Alternating-sign trace: str(M) = sum_i (-1)^i tr(M|_{E^i}) on degree-0 maps,
// zero otherwise; extended form-linearly into the base algebra.
inline BaseElement supertrace(const AlgebraElement& x) {
  if (!x.is_endo()) throw std::invalid_argument("supertrace: endomorphism element required");
  BaseElement out = BaseElement::zero(x.base());
  for (const auto& [k, m] : x.terms()) {
    if (k.second != 0) continue;
    cplx s = 0;
    for (const auto& [d, b] : m.blocks()) s += cplx(parity_sign(d)) * b.trace();
    out.coeffs(k.first) += s;
  }
  return out;
}

}  // namespace cohesive
