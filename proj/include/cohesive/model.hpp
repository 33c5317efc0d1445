// Cohesive-module models: a graded space with a flat total-degree-1
// connection element over a base algebra, plus the dg-category operations.
#pragma once

#include <array>
#include <memory>

#include "cohesive/element.hpp"

namespace cohesive {

struct FlatnessViolation : std::runtime_error {
  explicit FlatnessViolation(double r)
      : std::runtime_error("connection fails flatness, residual " + std::to_string(r)),
        residual(r) {}
  double residual;
};

struct CohesiveModel;
using ModelPtr = std::shared_ptr<const CohesiveModel>;

struct CohesiveModel {
  BasePtr base;
  GradedSpace space;
  AlgebraElement connection;  // total degree 1
  double flatness_residual = 0.0;
};

inline double flatness_defect(const AlgebraElement& a) {
  return (a.base_differential() + compose(a, a)).norm();
}

inline ModelPtr make_model(BasePtr base, GradedSpace space, AlgebraElement connection,
                           double tolerance = tol::flatness) {
  if (connection.base() != base || connection.source() != space ||
      connection.target() != space)
    throw std::invalid_argument("make_model: connection shape mismatch");
  for (int d : connection.degrees())
    if (d != 1) throw std::invalid_argument("make_model: connection must be homogeneous of total degree 1");
  const double res = flatness_defect(connection);
  if (res > tolerance) throw FlatnessViolation(res);
  auto m = std::make_shared<CohesiveModel>();
  m->base = std::move(base);
  m->space = std::move(space);
  m->connection = std::move(connection);
  m->flatness_residual = res;
  return m;
}

inline ModelPtr make_zero_model(BasePtr base, GradedSpace space) {
  return make_model(base, space, AlgebraElement::zero_endo(base, space));
}

// d(x) = d_base(x) + a_target x - (-1)^{|x_i|} x a_source, termwise on the
// homogeneous components of x.
inline AlgebraElement hom_differential_element(const AlgebraElement& x,
                                               const AlgebraElement& a_target,
                                               const AlgebraElement& a_source) {
  AlgebraElement r = x.base_differential() + compose(a_target, x);
  const BaseAlgebra& omega = *x.base();
  for (const auto& [xk, xm] : x.terms()) {
    const int xdeg = omega.degree(xk.first) + xk.second;
    for (const auto& [ak, am] : a_source.terms()) {
      const auto& prods = omega.product(xk.first, ak.first);
      if (prods.empty()) continue;
      const GradedMap comp = xm.compose(am);
      if (comp.is_zero()) continue;
      const cplx csign(parity_sign(static_cast<long long>(xk.second) *
                                   omega.degree(ak.first)));
      const cplx dsign(-parity_sign(xdeg));
      for (const auto& [u, c] : prods) r.add_term(u, comp * (csign * dsign * c));
    }
  }
  return r;
}

struct Morphism {
  ModelPtr source;
  ModelPtr target;
  AlgebraElement body;
  int degree = 0;

  Morphism() = default;
  Morphism(ModelPtr src, ModelPtr tgt, AlgebraElement b, int deg)
      : source(std::move(src)), target(std::move(tgt)), body(std::move(b)), degree(deg) {
    if (source->base != target->base)
      throw std::invalid_argument("Morphism: models over different bases");
    for (int d : body.degrees())
      if (d != degree)
        throw std::invalid_argument("Morphism: body not homogeneous of declared degree");
  }

  static Morphism identity(ModelPtr m) {
    auto id = AlgebraElement::identity(m->base, m->space);
    return Morphism(m, m, std::move(id), 0);
  }
  static Morphism zero(ModelPtr src, ModelPtr tgt, int deg) {
    return Morphism(src, tgt, AlgebraElement::zero(src->base, src->space, tgt->space), deg);
  }
};

inline Morphism hom_differential(const Morphism& phi) {
  AlgebraElement d =
      hom_differential_element(phi.body, phi.target->connection, phi.source->connection);
  return Morphism(phi.source, phi.target, std::move(d), phi.degree + 1);
}

inline bool is_closed(const Morphism& phi, double tolerance = tol::exact) {
  return hom_differential(phi).body.norm() <= tolerance;
}

inline Morphism compose(const Morphism& g, const Morphism& f) {
  return Morphism(f.source, g.target, compose(g.body, f.body), g.degree + f.degree);
}

// ---- shift ----

namespace detail {
// Blocks relabeled one degree down, same endomorphism degree.
inline GradedMap relabel_down(const GradedMap& m, const GradedSpace& src1,
                              const GradedSpace& tgt1) {
  GradedMap r(src1, tgt1, m.degree());
  for (const auto& [d, b] : m.blocks()) r.set_block(d - 1, b);
  return r;
}
}  // namespace detail

// E[1]^n = E^{n+1}; each connection coefficient picks up the sign of its
// endomorphism degree, so shifting twice is sign-free.
inline ModelPtr shift(const ModelPtr& model) {
  GradedSpace s1 = model->space.shifted(1);
  AlgebraElement a1(model->base, s1, s1);
  for (const auto& [k, m] : model->connection.terms()) {
    const cplx sign(parity_sign(k.second));
    a1.add_term(k.first, detail::relabel_down(m, s1, s1) * sign);
  }
  return make_model(model->base, s1, std::move(a1));
}

// ---- mapping cone ----

namespace detail {
inline GradedSpace cone_space(const GradedSpace& e, const GradedSpace& f) {
  std::map<int, int> dims;
  for (const auto& [d, n] : e.components()) dims[d - 1] += n;
  for (const auto& [d, n] : f.components()) dims[d] += n;
  std::vector<std::pair<int, int>> c(dims.begin(), dims.end());
  return GradedSpace(std::move(c));
}

// Block embedding of the E[1]-summand (leading coordinates) and the
// F-summand (trailing coordinates) of C^n = E^{n+1} (+) F^n.
inline GradedMap cone_include_shifted(const GradedSpace& e1, const GradedSpace& c) {
  GradedMap m(e1, c, 0);
  for (const auto& [d, n] : e1.components()) {
    Matrix b = Matrix::Zero(c.dim(d), n);
    b.topRows(n) = Matrix::Identity(n, n);
    m.set_block(d, std::move(b));
  }
  return m;
}
inline GradedMap cone_include_f(const GradedSpace& f, const GradedSpace& c) {
  GradedMap m(f, c, 0);
  for (const auto& [d, n] : f.components()) {
    Matrix b = Matrix::Zero(c.dim(d), n);
    b.bottomRows(n) = Matrix::Identity(n, n);
    m.set_block(d, std::move(b));
  }
  return m;
}
}  // namespace detail

// Cone of a closed degree-0 morphism: C^n = E^{n+1} (+) F^n with the shifted
// connection on the E-summand and the relabeled morphism in the corner.
inline ModelPtr cone(const Morphism& phi, double tolerance = tol::flatness) {
  if (phi.degree != 0) throw std::invalid_argument("cone: morphism must have degree 0");
  const double closed = hom_differential(phi).body.norm();
  if (closed > tolerance)
    throw std::invalid_argument("cone: morphism is not closed, defect " + std::to_string(closed));
  const GradedSpace& e = phi.source->space;
  const GradedSpace& f = phi.target->space;
  const GradedSpace e1 = e.shifted(1);
  const GradedSpace c = detail::cone_space(e, f);

  const GradedMap incl_e = detail::cone_include_shifted(e1, c);
  const GradedMap incl_f = detail::cone_include_f(f, c);
  const GradedMap proj_e = incl_e.adjoint();
  const GradedMap proj_f = incl_f.adjoint();

  AlgebraElement a(phi.source->base, c, c);
  for (const auto& [k, m] : phi.source->connection.terms()) {
    const cplx sign(parity_sign(k.second));
    const GradedMap sh = detail::relabel_down(m, e1, e1) * sign;
    a.add_term(k.first, incl_e.compose(sh).compose(proj_e));
  }
  for (const auto& [k, m] : phi.target->connection.terms())
    a.add_term(k.first, incl_f.compose(m).compose(proj_f));
  for (const auto& [k, m] : phi.body.terms()) {
    GradedMap corner(e1, f, k.second + 1);
    for (const auto& [d, b] : m.blocks()) corner.set_block(d - 1, b);
    a.add_term(k.first, incl_f.compose(corner).compose(proj_e));
  }
  return make_model(phi.source->base, c, std::move(a), tolerance);
}

// ---- homotopy equivalence test (quasi-isomorphism of the degree-0 parts) ----

struct HomotopyCertificate {
  bool verdict = false;
  // per degree: cohomology dims of source and target and induced-map rank
  std::map<int, std::array<int, 3>> table;
};

namespace detail {
// Orthonormal basis of the harmonic representatives of H^i of (space, d0).
inline Matrix cohomology_basis(const GradedMap& d0, int degree) {
  const GradedSpace& sp = d0.source();
  const int n = sp.dim(degree);
  if (n == 0) return Matrix::Zero(0, 0);
  // kernel of the outgoing block
  Matrix kernel;
  if (sp.dim(degree + 1) == 0) {
    kernel = Matrix::Identity(n, n);
  } else {
    const Matrix out = d0.block(degree);
    Eigen::JacobiSVD<Matrix> svd(out, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double cut = sv.size() ? tol::rank_rel * std::max(sv(0), 1e-300) : 0.0;
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
      if (sv(i) > cut) ++rank;
    kernel = svd.matrixV().rightCols(n - rank);
  }
  if (kernel.cols() == 0) return Matrix::Zero(n, 0);
  // subtract the image of the incoming block
  if (sp.dim(degree - 1) > 0) {
    const Matrix in = d0.block(degree - 1);
    Eigen::JacobiSVD<Matrix> svd(in, Eigen::ComputeFullU);
    const auto& sv = svd.singularValues();
    const double cut = sv.size() ? tol::rank_rel * std::max(sv(0), 1e-300) : 0.0;
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
      if (sv(i) > cut) ++rank;
    if (rank > 0) {
      const Matrix im = svd.matrixU().leftCols(rank);
      kernel -= im * (im.adjoint() * kernel);
    }
  }
  // re-orthonormalize what survives
  Eigen::JacobiSVD<Matrix> svd(kernel, Eigen::ComputeFullU);
  const auto& sv = svd.singularValues();
  const double cut = sv.size() ? tol::rank_rel * std::max(sv(0), 1.0) : 0.0;
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > cut) ++rank;
  return svd.matrixU().leftCols(rank);
}
}  // namespace detail

// A closed degree-0 morphism is a homotopy equivalence iff its form-degree-0
// component is a quasi-isomorphism of the underlying complexes.
inline HomotopyCertificate is_homotopy_equivalence(const Morphism& phi,
                                                   double tolerance = tol::exact) {
  if (phi.degree != 0)
    throw std::invalid_argument("is_homotopy_equivalence: degree-0 morphism required");
  const double closed = hom_differential(phi).body.norm();
  if (closed > std::max(tolerance, tol::flatness))
    throw std::invalid_argument("is_homotopy_equivalence: morphism is not closed");

  const int unit = phi.source->base->unit_index();
  const GradedMap v0 = phi.source->connection.coefficient(unit, 1);
  const GradedMap u0 = phi.target->connection.coefficient(unit, 1);
  const GradedMap phi0 = phi.body.coefficient(unit, 0);

  HomotopyCertificate cert;
  cert.verdict = true;
  std::set<int> degrees;
  for (const auto& [d, n] : phi.source->space.components()) degrees.insert(d);
  for (const auto& [d, n] : phi.target->space.components()) degrees.insert(d);
  for (int d : degrees) {
    const Matrix he = detail::cohomology_basis(v0, d);
    const Matrix hf = detail::cohomology_basis(u0, d);
    int rank = 0;
    if (he.cols() > 0 && hf.cols() > 0) {
      const Matrix induced = hf.adjoint() * phi0.block(d) * he;
      rank = numerical_rank(induced);
    }
    cert.table[d] = {static_cast<int>(he.cols()), static_cast<int>(hf.cols()), rank};
    if (he.cols() != hf.cols() || rank != he.cols()) cert.verdict = false;
  }
  return cert;
}

// ---- the DGLA of a model ----

// Flat indexing of the degree-k piece of Omega (x) End(E).
class Flattening {
 public:
  struct Entry {
    int base_index;
    int source_degree;
    int offset;  // first slot of this block in the flat vector
  };

  Flattening(BasePtr base, GradedSpace space)
      : base_(std::move(base)), space_(std::move(space)) {
    const int lo = space_.min_degree() - space_.max_degree();
    const int hi = space_.max_degree() - space_.min_degree() + base_->max_degree();
    for (int k = lo; k <= hi; ++k) {
      std::vector<Entry> ents;
      int off = 0;
      for (int r = 0; r < base_->dim(); ++r) {
        const int e = k - base_->degree(r);
        for (const auto& [a, na] : space_.components()) {
          const int nb = space_.dim(a + e);
          if (nb == 0) continue;
          ents.push_back({r, a, off});
          off += na * nb;
        }
      }
      if (!ents.empty()) {
        entries_[k] = std::move(ents);
        dims_[k] = off;
      }
    }
  }

  const GradedSpace& space() const { return space_; }
  const BasePtr& base() const { return base_; }

  int dim(int k) const {
    auto it = dims_.find(k);
    return it == dims_.end() ? 0 : it->second;
  }

  std::vector<int> degrees() const {
    std::vector<int> d;
    for (const auto& [k, n] : dims_) d.push_back(k);
    return d;
  }

  Vector flatten(const AlgebraElement& x, int k) const {
    Vector v = Vector::Zero(dim(k));
    auto it = entries_.find(k);
    if (it == entries_.end()) return v;
    for (const Entry& e : it->second) {
      const int end_deg = k - base_->degree(e.base_index);
      const GradedMap m = x.coefficient(e.base_index, end_deg);
      const Matrix b = m.block(e.source_degree);
      int slot = e.offset;
      for (int col = 0; col < b.cols(); ++col)
        for (int row = 0; row < b.rows(); ++row) v(slot++) = b(row, col);
    }
    return v;
  }

  AlgebraElement unflatten(const Vector& v, int k) const {
    AlgebraElement x(base_, space_, space_);
    auto it = entries_.find(k);
    if (it == entries_.end()) return x;
    for (const Entry& e : it->second) {
      const int end_deg = k - base_->degree(e.base_index);
      const int na = space_.dim(e.source_degree);
      const int nb = space_.dim(e.source_degree + end_deg);
      Matrix b(nb, na);
      int slot = e.offset;
      for (int col = 0; col < na; ++col)
        for (int row = 0; row < nb; ++row) b(row, col) = v(slot++);
      if (b.norm() > tol::drop) {
        GradedMap m(space_, space_, end_deg);
        m.set_block(e.source_degree, std::move(b));
        x.add_term(e.base_index, m);
      }
    }
    return x;
  }

 private:
  BasePtr base_;
  GradedSpace space_;
  std::map<int, std::vector<Entry>> entries_;
  std::map<int, int> dims_;
};

// Handle on the DGLA of a model: differential d(x) = d_base(x) + [A, x],
// graded commutator bracket, dimensions and cohomology of the graded pieces.
class Dgla {
 public:
  explicit Dgla(ModelPtr model)
      : model_(std::move(model)), flat_(model_->base, model_->space) {}

  const ModelPtr& model() const { return model_; }
  const Flattening& flattening() const { return flat_; }

  AlgebraElement differential(const AlgebraElement& x) const {
    return hom_differential_element(x, model_->connection, model_->connection);
  }
  AlgebraElement bracket(const AlgebraElement& x, const AlgebraElement& y) const {
    return supercommutator(x, y);
  }

  std::vector<int> degrees() const { return flat_.degrees(); }
  int dim(int k) const { return flat_.dim(k); }

  // Matrix of d restricted to total degree k, in flat coordinates.
  Matrix differential_matrix(int k) const {
    const int n = flat_.dim(k);
    const int m = flat_.dim(k + 1);
    Matrix d = Matrix::Zero(m, n);
    for (int j = 0; j < n; ++j) {
      Vector e = Vector::Zero(n);
      e(j) = 1.0;
      d.col(j) = flat_.flatten(differential(flat_.unflatten(e, k)), k + 1);
    }
    return d;
  }

  std::map<int, int> cohomology_dims() const {
    std::map<int, int> out;
    std::map<int, int> ranks;
    for (int k : flat_.degrees()) ranks[k] = numerical_rank(differential_matrix(k));
    for (int k : flat_.degrees()) {
      const int rk = ranks.count(k) ? ranks[k] : 0;
      const int rk1 = ranks.count(k - 1) ? ranks[k - 1] : 0;
      out[k] = flat_.dim(k) - rk - rk1;
    }
    return out;
  }

 private:
  ModelPtr model_;
  Flattening flat_;
};

inline Dgla dgla_of(ModelPtr model) { return Dgla(std::move(model)); }

}  // namespace cohesive
