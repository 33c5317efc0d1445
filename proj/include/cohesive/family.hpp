// Families over the formal parameter disk: connections with antiholomorphic
// components, their normalization to regular (holomorphic) families, and the
// extraction of strong deformations.
#pragma once

#include "cohesive/parameter.hpp"
#include "cohesive/transfer.hpp"

namespace cohesive {

// Graded tensor product of the spatial base algebra with the formal Dolbeault
// algebra of the disk. Keeps the factorization so dbar, the contraction and
// coefficient extraction can act on the parameter factor alone.
class ProductBase {
 public:
  ProductBase(BasePtr omega, std::shared_ptr<const ParameterAlgebra> params)
      : omega_(std::move(omega)), params_(std::move(params)) {
    if (!params_->antiholomorphic())
      throw std::invalid_argument("ProductBase: antiholomorphic parameter algebra required");
    build();
  }

  const BasePtr& algebra() const { return algebra_; }
  const BasePtr& omega() const { return omega_; }
  const ParameterAlgebra& params() const { return *params_; }

  int index(int omega_idx, int param_idx) const {
    return omega_idx * static_cast<int>(params_->monomials().size()) + param_idx;
  }
  int omega_part(int idx) const { return idx / static_cast<int>(params_->monomials().size()); }
  int param_part(int idx) const { return idx % static_cast<int>(params_->monomials().size()); }

  int dtbar_degree(int idx) const {
    return params_->monomial(param_part(idx)).dtbar_degree();
  }
  int param_weight(int idx) const { return params_->monomial(param_part(idx)).weight(); }
  bool holomorphic_index(int idx) const {
    return params_->monomial(param_part(idx)).is_holomorphic();
  }

  // dbar_Delta on elements over the product algebra, acting on the parameter
  // factor with the Koszul sign of crossing the spatial form.
  AlgebraElement dbar(const AlgebraElement& x) const {
    return apply_param_operator(x, [this](int pidx) { return params_->dbar(pidx); });
  }

  AlgebraElement kappa(const AlgebraElement& x) const {
    return apply_param_operator(x, [this](int pidx) { return params_->kappa(pidx); });
  }

  // Spatial differential d_Omega alone (no sign: it acts on the left factor).
  AlgebraElement d_omega(const AlgebraElement& x) const {
    AlgebraElement out(x.base(), x.source(), x.target());
    const Matrix& d = omega_->differential();
    for (const auto& [key, m] : x.terms()) {
      const int r = omega_part(key.first);
      const int p = param_part(key.first);
      for (int u = 0; u < omega_->dim(); ++u) {
        const cplx c = d(u, r);
        if (std::abs(c) > tol::drop) out.add_term(index(u, p), m * c);
      }
    }
    return out;
  }

  // Restriction of the dtbar-degree-j / holomorphic components.
  AlgebraElement dtbar_component(const AlgebraElement& x, int j) const {
    AlgebraElement out(x.base(), x.source(), x.target());
    for (const auto& [key, m] : x.terms())
      if (dtbar_degree(key.first) == j) out.add_term(key.first, m);
    return out;
  }

  double antiholomorphic_norm(const AlgebraElement& x) const {
    double s = 0;
    for (const auto& [key, m] : x.terms())
      if (!holomorphic_index(key.first)) {
        const double n = m.norm();
        s += n * n;
      }
    return std::sqrt(s);
  }

  // Lift of a spatial element, constant in the parameters.
  AlgebraElement lift(const AlgebraElement& x, const GradedSpace& src,
                      const GradedSpace& tgt) const {
    AlgebraElement out(algebra_, src, tgt);
    const int unit_param = params_->index_of_t_power(MultiIndex::zero(params_->vars()));
    for (const auto& [key, m] : x.terms()) out.add_term(index(key.first, unit_param), m);
    return out;
  }

  // Holomorphic series extraction: coefficient of t^p over the spatial base.
  AlgebraElement t_coefficient(const AlgebraElement& x, const MultiIndex& p,
                               const GradedSpace& src, const GradedSpace& tgt) const {
    AlgebraElement out(omega_, src, tgt);
    const int pidx = params_->index_of_t_power(p);
    if (pidx < 0) return out;
    for (const auto& [key, m] : x.terms())
      if (param_part(key.first) == pidx) out.add_term(omega_part(key.first), m);
    return out;
  }

  Series t_series(const AlgebraElement& x, const GradedSpace& src,
                  const GradedSpace& tgt) const {
    Series s(params_->vars(), params_->order(), omega_, src, tgt);
    for (const MultiIndex& p :
         enumerate_indices(params_->vars(), params_->order(), /*with_zero=*/true))
      s.set_coefficient(p, t_coefficient(x, p, src, tgt));
    return s;
  }

  AlgebraElement from_t_series(const Series& s, const GradedSpace& src,
                               const GradedSpace& tgt) const {
    AlgebraElement out(algebra_, src, tgt);
    for (const auto& [p, c] : s.coefficients()) {
      const int pidx = params_->index_of_t_power(p);
      if (pidx < 0) continue;
      for (const auto& [key, m] : c.terms()) out.add_term(index(key.first, pidx), m);
    }
    return out;
  }

 private:
  template <typename Op>
  AlgebraElement apply_param_operator(const AlgebraElement& x, Op op) const {
    AlgebraElement out(x.base(), x.source(), x.target());
    for (const auto& [key, m] : x.terms()) {
      const int r = omega_part(key.first);
      const int p = param_part(key.first);
      const cplx sign(parity_sign(omega_->degree(r)));
      for (const auto& [q, c] : op(p)) out.add_term(index(r, q), m * (sign * c));
    }
    return out;
  }

  void build() {
    const int np = static_cast<int>(params_->monomials().size());
    const int no = omega_->dim();
    std::vector<BaseAlgebra::BasisEntry> basis;
    basis.reserve(static_cast<size_t>(np) * no);
    for (int r = 0; r < no; ++r)
      for (int p = 0; p < np; ++p) {
        const auto& mono = params_->monomial(p);
        std::string lab = omega_->label(r);
        if (mono.weight() > 0) lab += (lab == "1" ? "" : " ") + mono.label();
        if (lab.rfind("1 ", 0) == 0) lab = lab.substr(2);
        basis.push_back({lab, omega_->degree(r) + mono.dtbar_degree()});
      }
    const BasePtr palg = params_->algebra();
    const int unit = index(omega_->unit_index(), palg->unit_index());
    auto alg = std::make_shared<BaseAlgebra>(std::move(basis), unit);

    // products: (w_r mu_p)(w_s mu_q) = (-1)^{|mu_p| |w_s|} (w_r w_s)(mu_p mu_q)
    for (int r = 0; r < no; ++r)
      for (int p = 0; p < np; ++p)
        for (int s = 0; s < no; ++s) {
          const auto& oprod = omega_->product(r, s);
          if (oprod.empty()) continue;
          for (int q = 0; q < np; ++q) {
            const auto& pprod = palg->product(p, q);
            if (pprod.empty()) continue;
            const cplx sign(parity_sign(static_cast<long long>(palg->degree(p)) *
                                        omega_->degree(s)));
            std::vector<std::pair<int, cplx>> terms;
            for (const auto& [ou, oc] : oprod)
              for (const auto& [pu, pc] : pprod)
                terms.emplace_back(index(ou, pu), sign * oc * pc);
            alg->set_product(index(r, p), index(s, q), std::move(terms));
          }
        }

    // differential: d_Omega (x) id + (-1)^{|w|} id (x) dbar
    const int n = no * np;
    Matrix d = Matrix::Zero(n, n);
    const Matrix& dom = omega_->differential();
    for (int r = 0; r < no; ++r)
      for (int p = 0; p < np; ++p) {
        for (int u = 0; u < no; ++u)
          if (std::abs(dom(u, r)) > tol::drop) d(index(u, p), index(r, p)) += dom(u, r);
        const cplx sign(parity_sign(omega_->degree(r)));
        for (const auto& [q, c] : params_->dbar(p)) d(index(r, q), index(r, p)) += sign * c;
      }
    alg->set_differential(std::move(d));
    algebra_ = std::move(alg);
  }

  BasePtr omega_;
  std::shared_ptr<const ParameterAlgebra> params_;
  BasePtr algebra_;
};

// A family of connections over the disk: a degree-1 element over the product
// base whose square (with the full differential) vanishes. The dbar operator
// of the disk itself stays implicit in the product differential.
struct FamilyConnection {
  std::shared_ptr<const ProductBase> product;
  GradedSpace space;
  AlgebraElement total;  // degree-1 element over product->algebra()

  double flatness_residual() const {
    return (total.base_differential() + compose(total, total)).norm();
  }

  bool regular(double tolerance = tol::hodge) const {
    return product->antiholomorphic_norm(total) <= tolerance;
  }

  // Fiber at the origin of the disk.
  ModelPtr fiber() const {
    const AlgebraElement a0 = product->t_coefficient(
        total, MultiIndex::zero(product->params().vars()), space, space);
    return make_model(product->omega(), space, a0);
  }

  // Holomorphic Maurer-Cartan series A(t) - A(0) of a regular family.
  MCSeries strong_series() const {
    if (!regular())
      throw std::invalid_argument("FamilyConnection: antiholomorphic components present");
    Series s = product->t_series(total, space, space);
    s.set_coefficient(MultiIndex::zero(product->params().vars()),
                      AlgebraElement::zero_endo(product->omega(), space));
    return {s};
  }
};

inline FamilyConnection make_family(std::shared_ptr<const ProductBase> product,
                                    GradedSpace space, AlgebraElement total,
                                    double tolerance = tol::flatness) {
  FamilyConnection fam{std::move(product), std::move(space), std::move(total)};
  const double res = fam.flatness_residual();
  if (res > tolerance) throw FlatnessViolation(res);
  return fam;
}

namespace detail {
// Inverse of id + n with n of positive product-weight (hence nilpotent).
inline AlgebraElement invert_unipotent(const AlgebraElement& g, const BasePtr& base,
                                       const GradedSpace& space) {
  const AlgebraElement id = AlgebraElement::identity(base, space);
  const AlgebraElement n = g - id;
  AlgebraElement acc = id;
  AlgebraElement pw = id;
  for (int k = 0; k < 64; ++k) {
    pw = compose(pw, n) * cplx(-1.0);
    if (pw.is_zero()) break;
    acc = acc + pw;
    if (k == 63) throw std::invalid_argument("invert_unipotent: element is not unipotent");
  }
  return acc;
}
}  // namespace detail

// Conjugated connection J^{-1} A J + J^{-1} D(J) for invertible degree-0 J.
inline AlgebraElement conjugate_connection(const AlgebraElement& j,
                                           const AlgebraElement& jinv,
                                           const AlgebraElement& total) {
  return compose(jinv, compose(total, j)) + compose(jinv, j.base_differential());
}

struct RegularizeResult {
  AlgebraElement j;     // invertible degree-0 gauge, unit constant term
  AlgebraElement jinv;
  FamilyConnection family;           // regular output
  double residual_antiholomorphic = 0.0;
  double conjugation_defect = 0.0;   // | J^{-1}(A)J + J^{-1}DJ - A_regular |
};

// Eliminate the dtbar-components order by order in the joint weight, within
// each weight from the top dtbar-degree down; each step solves one dbar
// equation with the contraction.
inline RegularizeResult regularize(const FamilyConnection& fam,
                                   double tolerance = tol::flatness) {
  if (fam.flatness_residual() > tolerance)
    throw FlatnessViolation(fam.flatness_residual());
  const ProductBase& pb = *fam.product;
  const BasePtr& alg = pb.algebra();
  const GradedSpace& sp = fam.space;

  AlgebraElement j_total = AlgebraElement::identity(alg, sp);
  AlgebraElement current = fam.total;
  const int max_weight = pb.params().order();
  const int max_dtbar = pb.params().vars();

  for (int w = 1; w <= max_weight; ++w) {
    for (int jdeg = max_dtbar; jdeg >= 1; --jdeg) {
      AlgebraElement bad(alg, sp, sp);
      for (const auto& [key, m] : current.terms())
        if (pb.param_weight(key.first) == w && pb.dtbar_degree(key.first) == jdeg)
          bad.add_term(key.first, m);
      if (bad.norm() <= tol::drop) continue;
      const AlgebraElement step = pb.kappa(bad) * cplx(-1.0);
      const AlgebraElement jstep = AlgebraElement::identity(alg, sp) + step;
      const AlgebraElement jstep_inv = detail::invert_unipotent(jstep, alg, sp);
      current = conjugate_connection(jstep, jstep_inv, current);
      j_total = compose(j_total, jstep);
    }
  }

  RegularizeResult out;
  out.j = j_total;
  out.jinv = detail::invert_unipotent(j_total, alg, sp);
  out.residual_antiholomorphic = pb.antiholomorphic_norm(current);
  if (out.residual_antiholomorphic > tol::hodge)
    throw std::runtime_error("regularize: antiholomorphic residue " +
                             std::to_string(out.residual_antiholomorphic));
  // scrub numerical dust off the clean part and re-verify flatness
  AlgebraElement clean(alg, sp, sp);
  for (const auto& [key, m] : current.terms())
    if (pb.holomorphic_index(key.first)) clean.add_term(key.first, m);
  out.conjugation_defect =
      (conjugate_connection(out.j, out.jinv, fam.total) - clean).norm();
  out.family = make_family(fam.product, sp, std::move(clean), tolerance);
  return out;
}

struct RegularizeMorphismResult {
  AlgebraElement theta_regular;  // dtbar-free, closed
  AlgebraElement gamma;          // cochain homotopy: theta - theta_regular = d(gamma)
  double closedness_defect = 0.0;
  double coboundary_defect = 0.0;
};

namespace detail {
// Fiber differential of Hom between two regular families: spatial part plus
// both connections, but without dbar_Delta.
inline AlgebraElement family_fiber_differential(const ProductBase& pb,
                                                const AlgebraElement& x,
                                                const AlgebraElement& conn_target,
                                                const AlgebraElement& conn_source) {
  AlgebraElement full = hom_differential_element(x, conn_target, conn_source);
  // hom_differential_element used the full product differential; swap it for
  // the spatial part only
  return full - x.base_differential() + pb.d_omega(x);
}
}  // namespace detail

// Descending induction on the dtbar-degree of a closed degree-0 morphism
// between regular families, trading each top layer for a homotopy.
inline RegularizeMorphismResult regularize_morphism(const FamilyConnection& source_fam,
                                                    const FamilyConnection& target_fam,
                                                    const AlgebraElement& theta,
                                                    double tolerance = tol::hodge) {
  const ProductBase& pb = *source_fam.product;
  if (!source_fam.regular() || !target_fam.regular())
    throw std::invalid_argument("regularize_morphism: families must be regular");
  const AlgebraElement& af = source_fam.total;
  const AlgebraElement& ag = target_fam.total;

  const AlgebraElement closed_defect = hom_differential_element(theta, ag, af);
  if (closed_defect.norm() > tolerance)
    throw std::invalid_argument("regularize_morphism: input is not closed, defect " +
                                std::to_string(closed_defect.norm()));

  int top = 0;
  for (const auto& [key, m] : theta.terms())
    top = std::max(top, pb.dtbar_degree(key.first));

  AlgebraElement gamma(theta.base(), theta.source(), theta.target());
  AlgebraElement gamma_next(theta.base(), theta.source(), theta.target());
  for (int j = top - 1; j >= 0; --j) {
    AlgebraElement rhs = pb.dtbar_component(theta, j + 1) -
                         detail::family_fiber_differential(pb, gamma_next, ag, af);
    rhs = pb.dtbar_component(rhs, j + 1);
    const AlgebraElement gamma_j = pb.kappa(rhs);
    gamma = gamma + gamma_j;
    gamma_next = gamma_j;
  }

  RegularizeMorphismResult out;
  out.theta_regular = pb.dtbar_component(theta, 0) -
                      detail::family_fiber_differential(pb, gamma_next, ag, af);
  out.gamma = gamma;
  const AlgebraElement dgamma = hom_differential_element(gamma, ag, af);
  out.coboundary_defect = (theta - out.theta_regular - dgamma).norm();
  out.closedness_defect =
      hom_differential_element(out.theta_regular, ag, af).norm();
  return out;
}

// Pipeline tail: a regular family plus homotopy data from its fiber to the
// reference model yields a transferred Maurer-Cartan series on the model.
inline TransferResult strongify(const FamilyConnection& fam, const HomotopyData& data,
                                double tolerance = tol::exact) {
  if (!fam.regular())
    throw std::invalid_argument("strongify: family must be regularized first");
  const ModelPtr fib = fam.fiber();
  const double fiber_defect = (fib->connection - data.model_f()->connection).norm();
  if (fiber_defect > std::max(tolerance, tol::flatness))
    throw std::invalid_argument("strongify: homotopy data does not match the fiber at 0");
  return transfer_mc(fam.strong_series(), data, tolerance);
}

}  // namespace cohesive
