// Finite-dimensional Hodge theory for the DGLA of a model: adjoint,
// Laplacian, harmonic projector and Green operator per total degree.
#pragma once

#include <map>

#include "cohesive/model.hpp"

namespace cohesive {

struct MetricData {
  // Per-degree Hermitian positive-definite matrices on the graded space;
  // absent degrees default to the identity.
  std::map<int, Matrix> space_metric;
  // Hermitian positive-definite Gram matrix on the base-algebra basis,
  // block-diagonal with respect to form degree; empty = orthonormal basis.
  Matrix base_gram;
};

class HodgePackage {
 public:
  explicit HodgePackage(ModelPtr model, MetricData metric = {})
      : model_(std::move(model)), metric_(std::move(metric)), dgla_(model_) {
    prepare_transforms();
    build_operators();
  }

  const ModelPtr& model() const { return model_; }
  const Dgla& dgla() const { return dgla_; }
  const Flattening& flattening() const { return dgla_.flattening(); }
  std::vector<int> degrees() const { return dgla_.degrees(); }
  int dim(int k) const { return dgla_.dim(k); }

  // Flat coordinates in which the metric is the standard one; the adjoint of
  // d is then its conjugate transpose.
  Vector to_ortho(const AlgebraElement& x, int k) const {
    AlgebraElement mixed(x.base(), x.source(), x.target());
    for (const auto& [key, m] : x.terms()) {
      const auto& [r, e] = key;
      if (model_->base->degree(r) + e != k) continue;
      GradedMap tm(x.source(), x.target(), e);
      for (const auto& [a, b] : m.blocks())
        tm.set_block(a, space_r(a + e) * b * space_rinv(a));
      if (base_trivial_) {
        mixed.add_term(r, tm);
      } else {
        for (int u = 0; u < model_->base->dim(); ++u) {
          const cplx c = base_r_(u, r);
          if (std::abs(c) > tol::drop) mixed.add_term(u, tm * c);
        }
      }
    }
    return dgla_.flattening().flatten(mixed, k);
  }

  AlgebraElement from_ortho(const Vector& v, int k) const {
    AlgebraElement mixed = dgla_.flattening().unflatten(v, k);
    AlgebraElement out(mixed.base(), mixed.source(), mixed.target());
    for (const auto& [key, m] : mixed.terms()) {
      const auto& [u, e] = key;
      GradedMap tm(mixed.source(), mixed.target(), e);
      for (const auto& [a, b] : m.blocks())
        tm.set_block(a, space_rinv(a + e) * b * space_r(a));
      if (base_trivial_) {
        out.add_term(u, tm);
      } else {
        for (int r = 0; r < model_->base->dim(); ++r) {
          const cplx c = base_rinv_(r, u);
          if (std::abs(c) > tol::drop) out.add_term(r, tm * c);
        }
      }
    }
    return out;
  }

  cplx inner(const AlgebraElement& x, const AlgebraElement& y) const {
    cplx s = 0;
    for (int k : dgla_.degrees()) s += to_ortho(y, k).dot(to_ortho(x, k));
    return s;
  }
  double norm(const AlgebraElement& x) const { return std::sqrt(std::abs(inner(x, x))); }

  AlgebraElement differential(const AlgebraElement& x) const { return dgla_.differential(x); }

  AlgebraElement codifferential(const AlgebraElement& x) const {
    AlgebraElement out(x.base(), x.source(), x.target());
    for (int k : x.degrees()) {
      auto it = dmat_.find(k - 1);
      if (it == dmat_.end() || it->second.size() == 0) continue;
      const Vector vx = to_ortho(x, k);
      out = out + from_ortho(it->second.adjoint() * vx, k - 1);
    }
    return out;
  }

  AlgebraElement harmonic_project(const AlgebraElement& x) const {
    return apply_diagonal(x, harmonic_);
  }
  AlgebraElement green(const AlgebraElement& x) const { return apply_diagonal(x, green_); }
  AlgebraElement laplacian(const AlgebraElement& x) const { return apply_diagonal(x, box_); }

  double harmonic_distance(const AlgebraElement& x) const {
    return (x - harmonic_project(x)).norm();
  }

  const Matrix& d_matrix(int k) const { return fetch(dmat_, k); }
  const Matrix& box_matrix(int k) const { return fetch(box_, k); }
  const Matrix& harmonic_matrix(int k) const { return fetch(harmonic_, k); }
  const Matrix& green_matrix(int k) const { return fetch(green_, k); }

  int harmonic_dim(int k) const {
    auto it = harmonic_rank_.find(k);
    return it == harmonic_rank_.end() ? 0 : it->second;
  }
  std::map<int, int> harmonic_dims() const { return harmonic_rank_; }

  std::vector<AlgebraElement> harmonic_basis(int k) const {
    std::vector<AlgebraElement> out;
    auto it = harmonic_vectors_.find(k);
    if (it == harmonic_vectors_.end()) return out;
    for (int j = 0; j < it->second.cols(); ++j)
      out.push_back(from_ortho(it->second.col(j), k));
    return out;
  }

 private:
  static const Matrix& fetch(const std::map<int, Matrix>& m, int k) {
    static const Matrix empty;
    auto it = m.find(k);
    return it == m.end() ? empty : it->second;
  }

  const Matrix& space_r(int d) const {
    auto it = space_r_.find(d);
    if (it == space_r_.end())
      throw std::logic_error("HodgePackage: missing metric factor");
    return it->second;
  }
  const Matrix& space_rinv(int d) const { return space_rinv_.at(d); }

  void prepare_transforms() {
    for (const auto& [d, n] : model_->space.components()) {
      Matrix h = Matrix::Identity(n, n);
      auto it = metric_.space_metric.find(d);
      if (it != metric_.space_metric.end()) h = it->second;
      if (h.rows() != n || h.cols() != n)
        throw std::invalid_argument("MetricData: block shape mismatch at degree " +
                                    std::to_string(d));
      Eigen::SelfAdjointEigenSolver<Matrix> es(h);
      if (es.eigenvalues().minCoeff() <= 0)
        throw std::invalid_argument("MetricData: metric not positive definite at degree " +
                                    std::to_string(d));
      Eigen::LLT<Matrix> llt(h);
      const Matrix r = llt.matrixL().adjoint();
      space_r_[d] = r;
      space_rinv_[d] = r.inverse();
    }
    // degrees reachable as a + e might be absent from the space; only present
    // degrees ever carry blocks
    const int n = model_->base->dim();
    if (metric_.base_gram.size() == 0) {
      base_trivial_ = true;
      base_r_ = Matrix::Identity(n, n);
      base_rinv_ = base_r_;
    } else {
      if (metric_.base_gram.rows() != n || metric_.base_gram.cols() != n)
        throw std::invalid_argument("MetricData: base Gram shape mismatch");
      for (int r = 0; r < n; ++r)
        for (int s = 0; s < n; ++s)
          if (model_->base->degree(r) != model_->base->degree(s) &&
              std::abs(metric_.base_gram(r, s)) > tol::drop)
            throw std::invalid_argument("MetricData: base Gram must respect form degree");
      Eigen::SelfAdjointEigenSolver<Matrix> es(metric_.base_gram);
      if (es.eigenvalues().minCoeff() <= 0)
        throw std::invalid_argument("MetricData: base Gram not positive definite");
      Eigen::LLT<Matrix> llt(metric_.base_gram);
      base_r_ = llt.matrixL().adjoint();
      base_rinv_ = base_r_.inverse();
      base_trivial_ = base_r_.isIdentity(tol::drop);
    }
  }

  void build_operators() {
    for (int k : dgla_.degrees()) {
      const int n = dgla_.dim(k);
      const int m = dgla_.dim(k + 1);
      Matrix d = Matrix::Zero(m, n);
      for (int j = 0; j < n; ++j) {
        Vector e = Vector::Zero(n);
        e(j) = 1.0;
        d.col(j) = to_ortho(dgla_.differential(from_ortho(e, k)), k + 1);
      }
      dmat_[k] = std::move(d);
    }
    for (int k : dgla_.degrees()) {
      const int n = dgla_.dim(k);
      Matrix box = Matrix::Zero(n, n);
      if (auto it = dmat_.find(k); it != dmat_.end() && it->second.size() > 0)
        box += it->second.adjoint() * it->second;
      if (auto it = dmat_.find(k - 1); it != dmat_.end() && it->second.size() > 0)
        box += it->second * it->second.adjoint();
      Eigen::SelfAdjointEigenSolver<Matrix> es(box);
      const Vector evals = es.eigenvalues().cast<cplx>();
      const double lmax = (n > 0) ? std::abs(es.eigenvalues().maxCoeff()) : 0.0;
      const double tau = tol::harmonic_rel * (lmax > 0 ? lmax : 1.0);
      Matrix h = Matrix::Zero(n, n);
      Matrix g = Matrix::Zero(n, n);
      int hdim = 0;
      std::vector<int> harm_cols;
      for (int j = 0; j < n; ++j) {
        const double lam = es.eigenvalues()(j);
        const Vector v = es.eigenvectors().col(j);
        if (lam <= tau) {
          h += v * v.adjoint();
          harm_cols.push_back(j);
          ++hdim;
        } else {
          g += (v * v.adjoint()) / lam;
        }
      }
      Matrix hb(n, hdim);
      for (int j = 0; j < hdim; ++j) hb.col(j) = es.eigenvectors().col(harm_cols[j]);
      box_[k] = std::move(box);
      harmonic_[k] = std::move(h);
      green_[k] = std::move(g);
      harmonic_rank_[k] = hdim;
      harmonic_vectors_[k] = std::move(hb);
    }
  }

  AlgebraElement apply_diagonal(const AlgebraElement& x, const std::map<int, Matrix>& ops) const {
    AlgebraElement out(x.base(), x.source(), x.target());
    for (int k : x.degrees()) {
      auto it = ops.find(k);
      if (it == ops.end()) continue;
      const Vector vx = to_ortho(x, k);
      out = out + from_ortho(it->second * vx, k);
    }
    return out;
  }

  ModelPtr model_;
  MetricData metric_;
  Dgla dgla_;
  std::map<int, Matrix> space_r_, space_rinv_;
  Matrix base_r_, base_rinv_;
  bool base_trivial_ = true;
  std::map<int, Matrix> dmat_, box_, harmonic_, green_;
  std::map<int, int> harmonic_rank_;
  std::map<int, Matrix> harmonic_vectors_;
};

inline HodgePackage build_hodge(ModelPtr model, MetricData metric = {}) {
  return HodgePackage(std::move(model), std::move(metric));
}

// Hodge theory of the base algebra itself, realized on the rank-one model in
// degree zero; its elements are in natural bijection with base elements.
inline HodgePackage scalar_hodge(BasePtr base, Matrix base_gram = {}) {
  const GradedSpace point({{0, 1}});
  MetricData md;
  md.base_gram = std::move(base_gram);
  return HodgePackage(make_zero_model(std::move(base), point), std::move(md));
}

inline AlgebraElement lift_scalar(const BaseElement& s, const HodgePackage& scalar_pkg) {
  const GradedSpace& pt = scalar_pkg.model()->space;
  AlgebraElement x(s.base, pt, pt);
  for (int r = 0; r < s.base->dim(); ++r)
    if (std::abs(s.coeffs(r)) > tol::drop) {
      GradedMap m(pt, pt, 0);
      m.set_block(0, Matrix::Constant(1, 1, s.coeffs(r)));
      x.add_term(r, m);
    }
  return x;
}

inline BaseElement lower_scalar(const AlgebraElement& x) {
  BaseElement s = BaseElement::zero(x.base());
  for (const auto& [key, m] : x.terms())
    if (key.second == 0) s.coeffs(key.first) += m.block(0)(0, 0);
  return s;
}

}  // namespace cohesive
