// Homological perturbation transfer of Maurer-Cartan series across homotopy
// equivalences, and the associated L-infinity evaluation.
#pragma once

#include "cohesive/deform.hpp"

namespace cohesive {

// A pair of inverse-up-to-homotopy equivalences phi: F -> E, psi: E -> F with
// homotopy operator h on F: psi phi - id_F = d(h).
struct HomotopyData {
  Morphism phi;  // F -> E, degree 0, closed
  Morphism psi;  // E -> F, degree 0, closed
  Morphism h;    // F -> F, degree -1

  const ModelPtr& model_e() const { return phi.target; }
  const ModelPtr& model_f() const { return phi.source; }

  double defect() const {
    const AlgebraElement comp = compose(psi.body, phi.body);
    const AlgebraElement id = AlgebraElement::identity(model_f()->base, model_f()->space);
    const AlgebraElement dh = hom_differential(h).body;
    return (comp - id - dh).norm();
  }

  void validate(double tolerance = tol::exact) const {
    if (phi.degree != 0 || psi.degree != 0 || h.degree != -1)
      throw std::invalid_argument("HomotopyData: wrong degrees");
    if (phi.source != psi.target || phi.target != psi.source || h.source != phi.source ||
        h.target != phi.source)
      throw std::invalid_argument("HomotopyData: model wiring mismatch");
    if (!is_closed(phi, tolerance) || !is_closed(psi, tolerance))
      throw std::invalid_argument("HomotopyData: phi and psi must be closed");
    const double d = defect();
    if (d > tolerance)
      throw std::invalid_argument("HomotopyData: psi phi - id != d(h), defect " +
                                  std::to_string(d));
  }

  static HomotopyData trivial(const ModelPtr& m) {
    return {Morphism::identity(m), Morphism::identity(m),
            Morphism::zero(m, m, -1)};
  }
};

struct TransferResult {
  MCSeries epsilon;          // transferred Maurer-Cartan series on E
  Series phi_t;              // intertwining morphism series F -> E, order 0 = phi
  double max_residual = 0.0;
  double max_intertwining_defect = 0.0;
};

// Series hom-differential with deformed connections: d(x)_I picks up the
// connection series on both sides.
inline Series hom_differential_series(const Series& x, const Series& conn_target,
                                      const Series& conn_source) {
  Series r = Series::zero_like(x);
  for (const auto& [i, c] : x.coefficients())
    r.add_coefficient(i, c.base_differential());
  for (const auto& [j, aj] : conn_target.coefficients())
    for (const auto& [k, xk] : x.coefficients()) {
      const MultiIndex i = j + k;
      if (i.order() > x.order()) continue;
      r.add_coefficient(i, compose(aj, xk));
    }
  // right action with the per-term degree sign, reusing the element routine
  // with a zero target connection
  const AlgebraElement no_target =
      AlgebraElement::zero(x.base(), conn_target.source(), conn_target.target());
  for (const auto& [k, xk] : x.coefficients())
    for (const auto& [j, aj] : conn_source.coefficients()) {
      const MultiIndex i = j + k;
      if (i.order() > x.order()) continue;
      AlgebraElement right =
          hom_differential_element(xk, no_target, aj) - xk.base_differential();
      r.add_coefficient(i, right);
    }
  return r;
}

// epsilon = phi (id - eta h)^{-1} eta psi,  phi(t) = phi (id - eta h)^{-1}.
inline TransferResult transfer_mc(const MCSeries& eta, const HomotopyData& data,
                                  double tolerance = tol::exact) {
  data.validate(tolerance);
  const ModelPtr& e = data.model_e();
  const ModelPtr& f = data.model_f();
  eta.check(f);
  const int m = eta.s.vars();
  const int n = eta.s.order();

  const Series h_const = Series::constant(m, n, data.h.body);
  const Series phi_const = Series::constant(m, n, data.phi.body);
  const Series psi_const = Series::constant(m, n, data.psi.body);

  const Series eta_h = compose(eta.s, h_const);
  const Series inv = geometric_inverse(eta_h);

  TransferResult out;
  out.phi_t = compose(phi_const, inv);
  out.epsilon.s = compose(compose(phi_const, compose(inv, eta.s)), psi_const);

  const Dgla dg_e(e);
  out.max_residual = mc_residual(out.epsilon, dg_e).max_coefficient_norm();

  // phi(t) intertwines the deformed connections:
  // d_base(phi_t) + (A_E + eps) phi_t - phi_t (A_F + eta) = 0
  Series conn_e = Series::constant(m, n, e->connection) + out.epsilon.s;
  Series conn_f = Series::constant(m, n, f->connection) + eta.s;
  const Series defect = hom_differential_series(out.phi_t, conn_e, conn_f);
  out.max_intertwining_defect = defect.max_coefficient_norm();
  return out;
}

namespace detail {
inline void permutations_rec(std::vector<int>& perm, std::vector<bool>& used,
                             std::vector<std::vector<int>>& out) {
  const int n = static_cast<int>(used.size());
  if (static_cast<int>(perm.size()) == n) {
    out.push_back(perm);
    return;
  }
  for (int i = 0; i < n; ++i) {
    if (used[i]) continue;
    used[i] = true;
    perm.push_back(i);
    permutations_rec(perm, used, out);
    perm.pop_back();
    used[i] = false;
  }
}

// Koszul sign of the permutation on symbols with the given (shifted) degrees.
inline int permutation_koszul_sign(const std::vector<int>& perm,
                                   const std::vector<int>& degrees) {
  int sign = 1;
  for (size_t i = 0; i < perm.size(); ++i)
    for (size_t j = i + 1; j < perm.size(); ++j)
      if (perm[i] > perm[j] && (degrees[perm[i]] % 2) && (degrees[perm[j]] % 2))
        sign = -sign;
  return sign;
}
}  // namespace detail

// n-ary transfer term: sum over permutations of phi x_{s(1)} h x_{s(2)} ... h
// x_{s(n)} psi with the Koszul sign taken in shifted degrees (|x|-1), the
// convention under which the equal-argument evaluation collapses to the
// geometric series.
inline AlgebraElement linfty_term(const HomotopyData& data,
                                  const std::vector<AlgebraElement>& xs) {
  const int n = static_cast<int>(xs.size());
  if (n < 1) throw std::invalid_argument("linfty_term: need at least one argument");
  if (n > 4) throw std::invalid_argument("linfty_term: argument count overflow (n <= 4)");
  std::vector<int> shifted;
  for (const auto& x : xs) {
    const auto d = x.total_degree();
    if (!d) throw std::invalid_argument("linfty_term: arguments must be homogeneous");
    shifted.push_back(*d - 1);
  }
  std::vector<std::vector<int>> perms;
  std::vector<int> perm;
  std::vector<bool> used(n, false);
  detail::permutations_rec(perm, used, perms);

  const ModelPtr& e = data.model_e();
  AlgebraElement out =
      AlgebraElement::zero(e->base, e->space, e->space);
  for (const auto& p : perms) {
    AlgebraElement word = data.phi.body;
    for (int i = 0; i < n; ++i) {
      word = compose(word, xs[p[i]]);
      if (i + 1 < n) word = compose(word, data.h.body);
    }
    word = compose(word, data.psi.body);
    const int sign = detail::permutation_koszul_sign(p, shifted);
    out = out + word * cplx(sign);
  }
  return out;
}

// sum_{n >= 1} phi eta (h eta)^{n-1} psi: the equal-argument evaluation of the
// transfer terms, which terminates at the truncation order.
inline MCSeries mc_eval(const HomotopyData& data, const MCSeries& eta) {
  data.validate();
  const ModelPtr& e = data.model_e();
  const ModelPtr& f = data.model_f();
  eta.check(f);
  const int m = eta.s.vars();
  const int n = eta.s.order();

  const Series h_const = Series::constant(m, n, data.h.body);
  const Series phi_const = Series::constant(m, n, data.phi.body);
  const Series psi_const = Series::constant(m, n, data.psi.body);

  MCSeries out = MCSeries::zero(m, n, e);
  Series tail = compose(eta.s, psi_const);  // eta (h eta)^{k} psi, k = 0
  for (int k = 1; k <= n; ++k) {
    out.s = out.s + compose(phi_const, tail);
    tail = compose(eta.s, compose(h_const, tail));
    if (tail.is_zero()) break;
  }
  return out;
}

}  // namespace cohesive
