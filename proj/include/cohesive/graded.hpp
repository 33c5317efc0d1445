// Z-graded complex vector spaces and degree-homogeneous block maps.
#pragma once

#include <map>
#include <stdexcept>
#include <vector>

#include "cohesive/numeric.hpp"

namespace cohesive {

// Bounded Z-graded space: finitely many degrees, each with a finite dimension.
class GradedSpace {
 public:
  GradedSpace() = default;
  explicit GradedSpace(std::vector<std::pair<int, int>> components)
      : components_(std::move(components)) {
    for (size_t i = 0; i < components_.size(); ++i) {
      if (components_[i].second <= 0)
        throw std::invalid_argument("GradedSpace: dimensions must be positive");
      if (i > 0 && components_[i - 1].first >= components_[i].first)
        throw std::invalid_argument("GradedSpace: degrees must be strictly increasing");
    }
  }

  const std::vector<std::pair<int, int>>& components() const { return components_; }

  int dim(int degree) const {
    for (const auto& [d, n] : components_)
      if (d == degree) return n;
    return 0;
  }

  int total_dim() const {
    int t = 0;
    for (const auto& [d, n] : components_) t += n;
    return t;
  }

  int min_degree() const {
    return components_.empty() ? 0 : components_.front().first;
  }
  int max_degree() const {
    return components_.empty() ? 0 : components_.back().first;
  }

  // Relabel degrees down by k: result has component n where this has n+k.
  GradedSpace shifted(int k = 1) const {
    std::vector<std::pair<int, int>> c;
    for (const auto& [d, n] : components_) c.emplace_back(d - k, n);
    return GradedSpace(std::move(c));
  }

  bool operator==(const GradedSpace& o) const { return components_ == o.components_; }
  bool operator!=(const GradedSpace& o) const { return !(*this == o); }

 private:
  std::vector<std::pair<int, int>> components_;
};

// Degree-k block map between graded spaces. Blocks are stored per source
// degree; source degrees whose target component is absent carry forced-zero
// blocks and are not stored.
class GradedMap {
 public:
  GradedMap() = default;
  GradedMap(GradedSpace source, GradedSpace target, int degree)
      : source_(std::move(source)), target_(std::move(target)), degree_(degree) {}

  static GradedMap identity(const GradedSpace& space) {
    GradedMap m(space, space, 0);
    for (const auto& [d, n] : space.components())
      m.set_block(d, Matrix::Identity(n, n));
    return m;
  }

  const GradedSpace& source() const { return source_; }
  const GradedSpace& target() const { return target_; }
  int degree() const { return degree_; }

  void set_block(int source_degree, Matrix b) {
    const int rows = target_.dim(source_degree + degree_);
    const int cols = source_.dim(source_degree);
    if (cols == 0)
      throw std::invalid_argument("GradedMap: no source component at this degree");
    if (rows == 0) {
      if (b.cwiseAbs().maxCoeff() > 0)
        throw std::invalid_argument("GradedMap: nonzero block into absent target component");
      return;
    }
    if (b.rows() != rows || b.cols() != cols)
      throw std::invalid_argument("GradedMap: block shape mismatch");
    if (b.norm() <= tol::drop) {
      blocks_.erase(source_degree);
      return;
    }
    blocks_[source_degree] = std::move(b);
  }

  // Zero matrix of the right shape if the block is absent.
  Matrix block(int source_degree) const {
    auto it = blocks_.find(source_degree);
    if (it != blocks_.end()) return it->second;
    return Matrix::Zero(target_.dim(source_degree + degree_), source_.dim(source_degree));
  }

  const std::map<int, Matrix>& blocks() const { return blocks_; }
  bool is_zero() const { return blocks_.empty(); }

  double norm() const {
    double s = 0;
    for (const auto& [d, b] : blocks_) s += b.squaredNorm();
    return std::sqrt(s);
  }

  GradedMap operator*(cplx s) const {
    GradedMap r(source_, target_, degree_);
    for (const auto& [d, b] : blocks_) r.set_block(d, b * s);
    return r;
  }

  GradedMap operator+(const GradedMap& o) const {
    if (source_ != o.source_ || target_ != o.target_ || degree_ != o.degree_)
      throw std::invalid_argument("GradedMap: add shape mismatch");
    GradedMap r(source_, target_, degree_);
    for (const auto& [d, n] : source_.components()) {
      if (target_.dim(d + degree_) == 0) continue;
      Matrix b = block(d) + o.block(d);
      r.set_block(d, std::move(b));
    }
    return r;
  }

  GradedMap operator-(const GradedMap& o) const { return *this + o * cplx(-1.0); }

  // g.compose(f) = g after f; deg(g.compose(f)) = deg g + deg f.
  GradedMap compose(const GradedMap& f) const {
    if (f.target_ != source_)
      throw std::invalid_argument("GradedMap: compose chain mismatch");
    GradedMap r(f.source_, target_, degree_ + f.degree_);
    for (const auto& [d, fb] : f.blocks_) {
      const int mid = d + f.degree_;
      if (source_.dim(mid) == 0 || target_.dim(mid + degree_) == 0) continue;
      auto it = blocks_.find(mid);
      if (it == blocks_.end()) continue;
      Matrix prod = it->second * fb;
      if (r.blocks_.count(d)) prod += r.blocks_[d];
      if (prod.norm() > tol::drop)
        r.blocks_[d] = std::move(prod);
      else
        r.blocks_.erase(d);
    }
    return r;
  }

  // Conjugate transpose blockwise w.r.t. identity metrics: degree flips sign.
  GradedMap adjoint() const {
    GradedMap r(target_, source_, -degree_);
    for (const auto& [d, b] : blocks_)
      r.set_block(d + degree_, b.adjoint());
    return r;
  }

  // Frobenius pairing tr(o^dagger this) with identity metrics.
  cplx frobenius_inner(const GradedMap& o) const {
    cplx s = 0;
    for (const auto& [d, b] : blocks_) {
      auto it = o.blocks_.find(d);
      if (it != o.blocks_.end()) s += (it->second.adjoint() * b).trace();
    }
    return s;
  }

 private:
  GradedSpace source_, target_;
  int degree_ = 0;
  std::map<int, Matrix> blocks_;
};

}  // namespace cohesive
