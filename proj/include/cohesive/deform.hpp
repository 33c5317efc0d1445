// Truncated formal Maurer-Cartan machinery: residuals, gauge action,
// Kuranishi recursion, slice normalization, obstructions, Kodaira-Spencer.
#pragma once

#include "cohesive/hodge.hpp"
#include "cohesive/series.hpp"

namespace cohesive {

// Degree-1 endomorphism-valued series with zero constant term.
struct MCSeries {
  Series s;

  int vars() const { return s.vars(); }
  int order() const { return s.order(); }

  static MCSeries zero(int vars, int order, const ModelPtr& m) {
    return {Series(vars, order, m->base, m->space, m->space)};
  }

  void check(const ModelPtr& m) const {
    if (!s.zero_constant_term())
      throw std::invalid_argument("MCSeries: constant term must vanish");
    for (const auto& [i, c] : s.coefficients())
      for (int d : c.degrees())
        if (d != 1) throw std::invalid_argument("MCSeries: coefficients must sit in degree 1");
    if (s.base() != m->base || s.source() != m->space)
      throw std::invalid_argument("MCSeries: wrong model");
  }
};

struct GaugeSeries {
  Series s;

  static GaugeSeries zero(int vars, int order, const ModelPtr& m) {
    return {Series(vars, order, m->base, m->space, m->space)};
  }

  void check(const ModelPtr& m) const {
    if (!s.zero_constant_term())
      throw std::invalid_argument("GaugeSeries: constant term must vanish");
    for (const auto& [i, c] : s.coefficients())
      for (int d : c.degrees())
        if (d != 0) throw std::invalid_argument("GaugeSeries: coefficients must sit in degree 0");
    if (s.base() != m->base || s.source() != m->space)
      throw std::invalid_argument("GaugeSeries: wrong model");
  }
};

struct ObstructionEntry {
  MultiIndex index;
  AlgebraElement harmonic_part;
  double norm = 0.0;
};

struct ObstructionTable {
  std::vector<ObstructionEntry> entries;
  double max_norm = 0.0;
  // smallest order carrying an obstruction above the vanishing threshold
  int first_obstructed_order = 0;  // 0 = none
  bool unobstructed(double threshold = tol::obstruction) const {
    return max_norm <= threshold;
  }
};

// d(alpha)_I + 1/2 sum_{J+K=I} [alpha_J, alpha_K].
inline Series mc_residual(const MCSeries& alpha, const Dgla& dgla) {
  Series r = alpha.s.apply([&](const AlgebraElement& c) { return dgla.differential(c); });
  return r + bracket(alpha.s, alpha.s) * cplx(0.5);
}

inline bool is_solved(const MCSeries& alpha, const Dgla& dgla, double tolerance = tol::hodge) {
  return mc_residual(alpha, dgla).max_coefficient_norm() <= tolerance;
}

// Adjoint-action series ad_u(x)_I = sum [u_J, x_K].
inline Series ad_series(const Series& u, const Series& x) { return bracket(u, x); }

// alpha' = e^{ad_u}(alpha) - F(ad_u)(d u), F(z) = (e^z - 1)/z. Both series
// terminate at the truncation order because u has positive valuation.
inline MCSeries gauge_act(const GaugeSeries& u, const MCSeries& alpha, const Dgla& dgla) {
  if (u.s.vars() != alpha.s.vars() || u.s.order() != alpha.s.order())
    throw std::invalid_argument("gauge_act: parameter algebra mismatch");
  const int n = alpha.s.order();
  Series result = alpha.s;
  Series term = alpha.s;
  double factorial = 1.0;
  for (int k = 1; k <= n; ++k) {
    term = ad_series(u.s, term);
    if (term.is_zero()) break;
    factorial *= k;
    result = result + term * cplx(1.0 / factorial);
  }
  Series du = u.s.apply([&](const AlgebraElement& c) { return dgla.differential(c); });
  Series fterm = du;
  result = result - fterm;
  factorial = 1.0;
  for (int k = 1; k <= n; ++k) {
    fterm = ad_series(u.s, fterm);
    if (fterm.is_zero()) break;
    factorial *= (k + 1);
    result = result - fterm * cplx(1.0 / factorial);
  }
  return {result};
}

// ku(alpha) = alpha + 1/2 d* G [alpha, alpha].
inline MCSeries kuranishi_map(const MCSeries& alpha, const HodgePackage& hp) {
  Series br = bracket(alpha.s, alpha.s);
  Series corr = br.apply([&](const AlgebraElement& c) {
    return hp.codifferential(hp.green(c));
  });
  return {alpha.s + corr * cplx(0.5)};
}

struct KuranishiSolution {
  MCSeries alpha;
  ObstructionTable obstructions;
  bool solved = false;            // all obstructions vanish at the threshold
  double max_residual = 0.0;      // certificate: worst MC residual coefficient
};

// Order-by-order recursion alpha_I = beta_I - 1/2 d* G [alpha,alpha]_I for
// harmonic linear data beta. ku(alpha) = beta and d* alpha = 0 hold exactly
// at truncation by construction.
inline KuranishiSolution solve_kuranishi(const Series& beta, const HodgePackage& hp,
                                         double obstruction_tol = tol::obstruction) {
  const ModelPtr& model = hp.model();
  if (!beta.zero_constant_term())
    throw std::invalid_argument("solve_kuranishi: seed must vanish at the origin");
  for (const auto& [i, c] : beta.coefficients()) {
    const double dist = hp.harmonic_distance(c);
    if (dist > tol::hodge)
      throw std::invalid_argument("solve_kuranishi: seed coefficient " + i.str() +
                                  " is not harmonic, projection distance " +
                                  std::to_string(dist));
    for (int d : c.degrees())
      if (d != 1)
        throw std::invalid_argument("solve_kuranishi: seed coefficients must sit in degree 1");
  }

  const int m = beta.vars();
  const int n = beta.order();
  KuranishiSolution out;
  out.alpha.s = Series(m, n, model->base, model->space, model->space);

  for (const MultiIndex& idx : enumerate_indices(m, n)) {
    AlgebraElement conv = AlgebraElement::zero_endo(model->base, model->space);
    for (const auto& [j, aj] : out.alpha.s.coefficients()) {
      for (const auto& [k, ak] : out.alpha.s.coefficients()) {
        // only strictly lower orders contribute to idx
        MultiIndex sum = j + k;
        if (!(sum == idx)) continue;
        conv = conv + supercommutator(aj, ak);
      }
    }
    AlgebraElement alpha_i = beta.coefficient(idx);
    if (!conv.is_zero())
      alpha_i = alpha_i - hp.codifferential(hp.green(conv)) * cplx(0.5);
    out.alpha.s.set_coefficient(idx, alpha_i);

    ObstructionEntry e;
    e.index = idx;
    e.harmonic_part = hp.harmonic_project(conv);
    e.norm = e.harmonic_part.norm();
    if (e.norm > obstruction_tol && out.obstructions.first_obstructed_order == 0)
      out.obstructions.first_obstructed_order = idx.order();
    out.obstructions.max_norm = std::max(out.obstructions.max_norm, e.norm);
    out.obstructions.entries.push_back(std::move(e));
  }

  out.solved = out.obstructions.unobstructed(obstruction_tol);
  out.max_residual = mc_residual(out.alpha, hp.dgla()).max_coefficient_norm();
  return out;
}

struct SliceResult {
  GaugeSeries u;
  MCSeries alpha;          // gauge_act(u, input), with d* alpha = 0
  double max_codifferential = 0.0;
};

// Gauge a solved series into the slice d* alpha = 0, order by order with
// corrections u_I = G d*(current coefficient), which live in Im d*.
inline SliceResult slice_normalize(const MCSeries& alpha, const HodgePackage& hp) {
  const ModelPtr& model = hp.model();
  const int m = alpha.s.vars();
  const int n = alpha.s.order();
  SliceResult out;
  out.u.s = Series(m, n, model->base, model->space, model->space);
  MCSeries current = alpha;
  for (int ord = 1; ord <= n; ++ord) {
    bool touched = false;
    for (const auto& [i, c] : current.s.coefficients()) {
      if (i.order() != ord) continue;
      const AlgebraElement fix = hp.green(hp.codifferential(c));
      if (fix.norm() <= tol::drop) continue;
      out.u.s.add_coefficient(i, fix);
      touched = true;
    }
    if (touched) current = gauge_act(out.u, alpha, hp.dgla());
  }
  out.alpha = current;
  for (const auto& [i, c] : current.s.coefficients())
    out.max_codifferential =
        std::max(out.max_codifferential, hp.codifferential(c).norm());
  return out;
}

// Harmonic class of the first-order part in direction v; constant on gauge
// orbits of solved series.
inline AlgebraElement kodaira_spencer(const MCSeries& alpha, const std::vector<cplx>& v,
                                      const HodgePackage& hp) {
  const ModelPtr& model = hp.model();
  const int m = alpha.s.vars();
  if (static_cast<int>(v.size()) != m)
    throw std::invalid_argument("kodaira_spencer: direction arity mismatch");
  AlgebraElement first = AlgebraElement::zero_endo(model->base, model->space);
  for (int i = 0; i < m; ++i) {
    const AlgebraElement c = alpha.s.coefficient(MultiIndex::unit(m, i));
    if (!c.is_zero()) first = first + c * v[i];
  }
  const double defect = hp.differential(first).norm();
  if (defect > tol::hodge)
    throw std::invalid_argument(
        "kodaira_spencer: first-order coefficient is not closed, defect " +
        std::to_string(defect));
  return hp.harmonic_project(first);
}

}  // namespace cohesive
