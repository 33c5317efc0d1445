// Command implementations behind the CLI: each consumes a loaded instance and
// produces a machine-readable report plus an exit code.
//   0 success, 2 validation failure, 3 numerical-tolerance failure.
#pragma once

#include <limits>

#include "cohesive/instance.hpp"

namespace cohesive {

inline constexpr const char* kToolVersion = "0.1.0";

struct CommandResult {
  json report;
  int exit_code = 0;
};

namespace detail {

inline json tolerances_to_json(const ToleranceProfile& p) {
  return {{"profile", p.name},
          {"flatness", p.flatness},
          {"residual", p.residual},
          {"obstruction", p.obstruction},
          {"rank_rel", p.rank_rel}};
}

inline json report_envelope(const Instance& inst, const std::string& command,
                            const ToleranceProfile& tols) {
  json j;
  j["tool"] = "cohesive";
  j["version"] = kToolVersion;
  j["command"] = command;
  j["instance"] = inst.name;
  j["instance_digest"] = inst.digest;
  j["tolerances"] = tolerances_to_json(tols);
  return j;
}

inline void seal_report(json& j) {
  j["stability_hash"] = fnv1a_hex(j.dump());
}

inline json axioms_to_json(const ValidationReport& rep) {
  json out = json::array();
  for (const auto& a : rep.axioms)
    out.push_back({{"axiom", a.axiom},
                   {"passed", a.passed},
                   {"worst", a.worst},
                   {"witness", a.witness}});
  return out;
}

inline json series_to_json(const Series& s) {
  json out = json::array();
  for (const auto& [i, c] : s.coefficients())
    out.push_back({{"index", multi_index_to_json(i)},
                   {"norm", c.norm()},
                   {"terms", element_to_json(c)}});
  return out;
}

inline json residuals_by_order(const Series& residual, int order) {
  json out = json::array();
  for (int n = 1; n <= order; ++n) {
    double worst = 0;
    for (const auto& [i, c] : residual.coefficients())
      if (i.order() == n) worst = std::max(worst, c.norm());
    out.push_back({{"order", n}, {"max_residual", worst}});
  }
  return out;
}

}  // namespace detail

inline CommandResult cmd_check(const Instance& inst,
                               const ToleranceProfile& tols = {}) {
  CommandResult out;
  out.report = detail::report_envelope(inst, "check", tols);
  json results;
  bool ok = true;

  const ValidationReport axioms = inst.base->validate();
  results["base_axioms"] = detail::axioms_to_json(axioms);
  ok = ok && axioms.all_passed();

  results["flatness_residual"] = inst.model->flatness_residual;
  ok = ok && inst.model->flatness_residual <= tols.flatness;

  try {
    const HodgePackage hp(inst.model, inst.metric);
    results["metric"] = {{"positive_definite", true}};
  } catch (const std::invalid_argument& e) {
    results["metric"] = {{"positive_definite", false}, {"error", e.what()}};
    ok = false;
  }

  if (inst.homotopy) {
    const double defect = inst.homotopy->data.defect();
    const bool phi_ok = is_homotopy_equivalence(inst.homotopy->data.phi).verdict;
    results["homotopy"] = {{"defect", defect},
                           {"within_tolerance", defect <= tol::exact},
                           {"phi_is_equivalence", phi_ok}};
    ok = ok && defect <= tol::exact && phi_ok;
  }

  if (inst.family) {
    const double res = inst.family->family.flatness_residual();
    json fam = {{"flatness_residual", res},
                {"regular", inst.family->family.regular()}};
    const int pdim = inst.family->product->algebra()->dim();
    if (pdim <= 80) {
      const ValidationReport prep = inst.family->product->algebra()->validate();
      fam["product_axioms"] = detail::axioms_to_json(prep);
      ok = ok && prep.all_passed();
    } else {
      fam["product_axioms"] = "skipped (dimension above check cap)";
    }
    results["family"] = std::move(fam);
    ok = ok && res <= tols.flatness;
  }

  results["all_passed"] = ok;
  out.report["results"] = std::move(results);
  out.exit_code = ok ? 0 : 3;
  detail::seal_report(out.report);
  return out;
}

inline CommandResult cmd_cohomology(const Instance& inst,
                                    const ToleranceProfile& tols = {}) {
  CommandResult out;
  out.report = detail::report_envelope(inst, "cohomology", tols);
  json results;

  const HodgePackage hp(inst.model, inst.metric);
  const auto rank_dims = hp.dgla().cohomology_dims();
  json dims = json::array();
  bool consistent = true;
  for (int k : hp.degrees()) {
    const int hd = hp.harmonic_dim(k);
    const int rd = rank_dims.at(k);
    dims.push_back({{"degree", k},
                    {"dim_total", hp.dim(k)},
                    {"dim_cohomology", rd},
                    {"dim_harmonic", hd}});
    consistent = consistent && hd == rd;
  }
  results["degrees"] = std::move(dims);
  results["harmonic_matches_rank_nullity"] = consistent;

  json bases;
  for (int k : hp.degrees()) {
    if (hp.harmonic_dim(k) == 0) continue;
    json basis = json::array();
    for (const AlgebraElement& h : hp.harmonic_basis(k)) basis.push_back(element_to_json(h));
    bases[std::to_string(k)] = std::move(basis);
  }
  results["harmonic_bases"] = std::move(bases);

  out.report["results"] = std::move(results);
  out.exit_code = consistent ? 0 : 3;
  detail::seal_report(out.report);
  return out;
}

inline CommandResult cmd_solve(const Instance& inst, const std::string& seed_name,
                               int order = 0, const ToleranceProfile& tols = {}) {
  CommandResult out;
  out.report = detail::report_envelope(inst, "solve", tols);
  const int n = order > 0 ? order : inst.order;

  json results;
  results["seed"] = seed_name;
  results["vars"] = inst.vars;
  results["order"] = n;

  const HodgePackage hp(inst.model, inst.metric);
  Series beta = inst.seed_series(seed_name).truncated(n);
  const KuranishiSolution sol = solve_kuranishi(beta, hp, tols.obstruction);

  results["coefficients"] = detail::series_to_json(sol.alpha.s);
  const Series residual = mc_residual(sol.alpha, hp.dgla());
  results["residuals"] = detail::residuals_by_order(residual, n);
  results["max_residual"] = sol.max_residual;

  json obstructions = json::array();
  for (const auto& e : sol.obstructions.entries) {
    json entry = {{"index", multi_index_to_json(e.index)}, {"norm", e.norm}};
    if (e.norm > tols.obstruction) entry["harmonic_part"] = element_to_json(e.harmonic_part);
    obstructions.push_back(std::move(entry));
  }
  results["obstructions"] = std::move(obstructions);
  results["max_obstruction"] = sol.obstructions.max_norm;

  if (sol.solved)
    results["verdict"] = "unobstructed through order " + std::to_string(n);
  else
    results["verdict"] =
        "obstructed at |I|=" + std::to_string(sol.obstructions.first_obstructed_order);

  // contract checks: ku(alpha) = beta and d* alpha = 0 at truncation
  const MCSeries ku = kuranishi_map(sol.alpha, hp);
  double ku_defect = (ku.s - beta).max_coefficient_norm();
  double slice_defect = 0;
  for (const auto& [i, c] : sol.alpha.s.coefficients())
    slice_defect = std::max(slice_defect, hp.codifferential(c).norm());
  results["kuranishi_defect"] = ku_defect;
  results["slice_defect"] = slice_defect;

  bool ok = ku_defect <= tol::exact && slice_defect <= tol::exact;
  if (sol.solved && sol.max_residual > tols.residual) ok = false;
  if (!ok) {
    double worst = 0;
    MultiIndex at = MultiIndex::zero(inst.vars);
    for (const auto& [i, c] : residual.coefficients())
      if (c.norm() > worst) {
        worst = c.norm();
        at = i;
      }
    results["failure"] = {{"worst_residual", worst},
                          {"at_index", multi_index_to_json(at)}};
  }
  results["contract_ok"] = ok;
  out.report["results"] = std::move(results);
  out.exit_code = ok ? 0 : 3;
  detail::seal_report(out.report);
  return out;
}

inline CommandResult cmd_transfer(const Instance& inst, const std::string& series_name,
                                  const ToleranceProfile& tols = {}) {
  if (!inst.homotopy)
    throw std::invalid_argument("transfer: instance has no homotopy block");
  const HomotopyBlock& hb = *inst.homotopy;
  auto it = hb.series.find(series_name);
  if (it == hb.series.end())
    throw std::invalid_argument("transfer: unknown series '" + series_name + "'");

  CommandResult out;
  out.report = detail::report_envelope(inst, "transfer", tols);
  json results;
  results["series"] = series_name;

  const MCSeries& eta = it->second;
  const TransferResult tr = transfer_mc(eta, hb.data);
  const MCSeries ev = mc_eval(hb.data, eta);
  const double agreement = (tr.epsilon.s - ev.s).max_coefficient_norm();

  results["epsilon"] = detail::series_to_json(tr.epsilon.s);
  results["mc_eval"] = detail::series_to_json(ev.s);
  results["max_residual"] = tr.max_residual;
  results["intertwining_defect"] = tr.max_intertwining_defect;
  results["agreement"] = agreement;

  const bool ok = tr.max_residual <= tols.residual &&
                  tr.max_intertwining_defect <= tols.residual && agreement <= tol::exact;
  results["contract_ok"] = ok;
  out.report["results"] = std::move(results);
  out.exit_code = ok ? 0 : 3;
  detail::seal_report(out.report);
  return out;
}

inline CommandResult cmd_regularize(const Instance& inst,
                                    const ToleranceProfile& tols = {}) {
  if (!inst.family)
    throw std::invalid_argument("regularize: instance has no family block");

  CommandResult out;
  out.report = detail::report_envelope(inst, "regularize", tols);
  json results;

  const RegularizeResult reg = regularize(inst.family->family);
  results["antiholomorphic_residual"] = reg.residual_antiholomorphic;
  results["conjugation_defect"] = reg.conjugation_defect;
  results["gauge"] = element_to_json(reg.j);
  results["regular_connection"] = element_to_json(reg.family.total);

  bool ok = reg.residual_antiholomorphic <= tols.residual &&
            reg.conjugation_defect <= tols.residual;

  // optional strongify when the fiber matches the homotopy block's F side
  if (inst.homotopy) {
    const ModelPtr fib = reg.family.fiber();
    const ModelPtr& fm = inst.homotopy->data.model_f();
    const double fiber_gap = (fib->space == fm->space)
                                 ? (fib->connection - fm->connection).norm()
                                 : std::numeric_limits<double>::infinity();
    if (fiber_gap <= tols.flatness) {
      const TransferResult tr = strongify(reg.family, inst.homotopy->data);
      results["strongify"] = {{"epsilon", detail::series_to_json(tr.epsilon.s)},
                              {"max_residual", tr.max_residual},
                              {"intertwining_defect", tr.max_intertwining_defect}};
      ok = ok && tr.max_residual <= tols.residual;
    } else {
      results["strongify"] = {{"skipped", true}, {"fiber_gap", fiber_gap}};
    }
  }

  results["contract_ok"] = ok;
  out.report["results"] = std::move(results);
  out.exit_code = ok ? 0 : 3;
  detail::seal_report(out.report);
  return out;
}

}  // namespace cohesive
