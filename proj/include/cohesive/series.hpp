// Truncated multivariate formal power series with element coefficients.
#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <vector>

#include "cohesive/element.hpp"

namespace cohesive {

struct MultiIndex {
  std::vector<int> v;

  MultiIndex() = default;
  explicit MultiIndex(std::vector<int> e) : v(std::move(e)) {}
  static MultiIndex zero(int m) { return MultiIndex(std::vector<int>(m, 0)); }
  static MultiIndex unit(int m, int i) {
    MultiIndex u = zero(m);
    u.v.at(i) = 1;
    return u;
  }

  int vars() const { return static_cast<int>(v.size()); }
  int order() const { return std::accumulate(v.begin(), v.end(), 0); }

  MultiIndex operator+(const MultiIndex& o) const {
    MultiIndex r = *this;
    for (size_t i = 0; i < v.size(); ++i) r.v[i] += o.v[i];
    return r;
  }
  bool operator<(const MultiIndex& o) const { return v < o.v; }
  bool operator==(const MultiIndex& o) const { return v == o.v; }

  std::string str() const {
    std::string s = "(";
    for (size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s + ")";
  }
};

// All multi-indices with 1 <= |I| <= order (or 0 <= |I| when with_zero).
inline std::vector<MultiIndex> enumerate_indices(int vars, int order, bool with_zero = false) {
  std::vector<MultiIndex> out;
  std::vector<int> cur(vars, 0);
  std::function<void(int, int)> rec = [&](int pos, int remaining) {
    if (pos == vars) {
      MultiIndex mi{cur};
      if (with_zero || mi.order() > 0) out.push_back(mi);
      return;
    }
    for (int k = 0; k <= remaining; ++k) {
      cur[pos] = k;
      rec(pos + 1, remaining - k);
    }
    cur[pos] = 0;
  };
  rec(0, order);
  std::sort(out.begin(), out.end(), [](const MultiIndex& a, const MultiIndex& b) {
    if (a.order() != b.order()) return a.order() < b.order();
    return a < b;
  });
  return out;
}

// Formal power series over C[t_1..t_m] truncated at total order N, with
// coefficients in a fixed Hom space.
class Series {
 public:
  Series() = default;
  Series(int vars, int order, BasePtr base, GradedSpace source, GradedSpace target)
      : vars_(vars), order_(order), base_(std::move(base)),
        source_(std::move(source)), target_(std::move(target)) {}

  static Series zero_like(const Series& s) {
    return Series(s.vars_, s.order_, s.base_, s.source_, s.target_);
  }
  static Series constant(int vars, int order, AlgebraElement x) {
    Series s(vars, order, x.base(), x.source(), x.target());
    s.set_coefficient(MultiIndex::zero(vars), std::move(x));
    return s;
  }
  static Series identity(int vars, int order, BasePtr base, const GradedSpace& space) {
    return constant(vars, order, AlgebraElement::identity(std::move(base), space));
  }

  int vars() const { return vars_; }
  int order() const { return order_; }
  const BasePtr& base() const { return base_; }
  const GradedSpace& source() const { return source_; }
  const GradedSpace& target() const { return target_; }
  const std::map<MultiIndex, AlgebraElement>& coefficients() const { return coeffs_; }

  AlgebraElement coefficient(const MultiIndex& i) const {
    auto it = coeffs_.find(i);
    if (it != coeffs_.end()) return it->second;
    return AlgebraElement::zero(base_, source_, target_);
  }

  void set_coefficient(const MultiIndex& i, AlgebraElement x) {
    if (i.vars() != vars_) throw std::invalid_argument("Series: index arity mismatch");
    if (i.order() > order_) return;
    if (x.norm() <= tol::drop)
      coeffs_.erase(i);
    else
      coeffs_[i] = std::move(x);
  }

  void add_coefficient(const MultiIndex& i, const AlgebraElement& x) {
    if (i.order() > order_) return;
    auto it = coeffs_.find(i);
    if (it == coeffs_.end())
      set_coefficient(i, x);
    else {
      AlgebraElement sum = it->second + x;
      if (sum.norm() <= tol::drop)
        coeffs_.erase(it);
      else
        it->second = std::move(sum);
    }
  }

  bool is_zero() const { return coeffs_.empty(); }
  bool zero_constant_term() const {
    return coeffs_.find(MultiIndex::zero(vars_)) == coeffs_.end();
  }

  int valuation() const {
    int v = order_ + 1;
    for (const auto& [i, c] : coeffs_) v = std::min(v, i.order());
    return v;
  }

  double norm() const {
    double s = 0;
    for (const auto& [i, c] : coeffs_) {
      const double n = c.norm();
      s += n * n;
    }
    return std::sqrt(s);
  }

  double max_coefficient_norm() const {
    double m = 0;
    for (const auto& [i, c] : coeffs_) m = std::max(m, c.norm());
    return m;
  }

  Series operator+(const Series& o) const {
    Series r = *this;
    for (const auto& [i, c] : o.coeffs_) r.add_coefficient(i, c);
    return r;
  }
  Series operator-(const Series& o) const { return *this + o * cplx(-1.0); }
  Series operator*(cplx s) const {
    Series r = zero_like(*this);
    for (const auto& [i, c] : coeffs_) r.set_coefficient(i, c * s);
    return r;
  }

  Series apply(const std::function<AlgebraElement(const AlgebraElement&)>& fn) const {
    Series r = zero_like(*this);
    for (const auto& [i, c] : coeffs_) r.set_coefficient(i, fn(c));
    return r;
  }

  Series truncated(int new_order) const {
    Series r(vars_, new_order, base_, source_, target_);
    for (const auto& [i, c] : coeffs_)
      if (i.order() <= new_order) r.set_coefficient(i, c);
    return r;
  }

 private:
  int vars_ = 0;
  int order_ = 0;
  BasePtr base_;
  GradedSpace source_, target_;
  std::map<MultiIndex, AlgebraElement> coeffs_;
};

// Convolution with element composition: (g f)_I = sum_{J+K=I} g_J f_K.
inline Series compose(const Series& g, const Series& f) {
  if (g.vars() != f.vars() || g.order() != f.order())
    throw std::invalid_argument("Series: parameter algebra mismatch");
  Series r(g.vars(), g.order(), g.base(), f.source(), g.target());
  for (const auto& [j, gj] : g.coefficients())
    for (const auto& [k, fk] : f.coefficients()) {
      const MultiIndex i = j + k;
      if (i.order() > g.order()) continue;
      r.add_coefficient(i, compose(gj, fk));
    }
  return r;
}

inline Series bracket(const Series& x, const Series& y) {
  if (x.vars() != y.vars() || x.order() != y.order())
    throw std::invalid_argument("Series: parameter algebra mismatch");
  Series r = Series::zero_like(x);
  for (const auto& [j, xj] : x.coefficients())
    for (const auto& [k, yk] : y.coefficients()) {
      const MultiIndex i = j + k;
      if (i.order() > x.order()) continue;
      r.add_coefficient(i, supercommutator(xj, yk));
    }
  return r;
}

// (id - s)^{-1} = sum s^k for series of positive valuation.
inline Series geometric_inverse(const Series& s) {
  if (s.valuation() < 1)
    throw std::invalid_argument("geometric_inverse: series must vanish at the origin");
  Series acc = Series::identity(s.vars(), s.order(), s.base(), s.source());
  Series pw = acc;
  for (int k = 1; k <= s.order(); ++k) {
    pw = compose(pw, s);
    if (pw.is_zero()) break;
    acc = acc + pw;
  }
  return acc;
}

}  // namespace cohesive
