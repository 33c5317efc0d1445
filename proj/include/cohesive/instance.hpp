// Self-contained text instances: base algebra, graded space, connection,
// optional metric, parameter block, named seeds, optional homotopy data and
// family block.
#pragma once

#include <optional>

#include "cohesive/io.hpp"

namespace cohesive {

struct SeedEntry {
  int direction;
  AlgebraElement value;  // degree-1 element on the main model
};

struct HomotopyBlock {
  ModelPtr f_model;
  HomotopyData data;
  std::map<std::string, MCSeries> series;  // named series on F
};

struct FamilyBlock {
  std::shared_ptr<const ParameterAlgebra> params;
  std::shared_ptr<const ProductBase> product;
  FamilyConnection family;
};

struct Instance {
  std::string name;
  std::string digest;
  BasePtr base;
  ModelPtr model;
  MetricData metric;
  int vars = 1;
  int order = 6;
  std::map<std::string, std::vector<SeedEntry>> seeds;
  std::optional<HomotopyBlock> homotopy;
  std::optional<FamilyBlock> family;

  Series seed_series(const std::string& which) const {
    auto it = seeds.find(which);
    if (it == seeds.end())
      throw std::invalid_argument("instance: unknown seed '" + which + "'");
    Series beta(vars, order, model->base, model->space, model->space);
    for (const SeedEntry& e : it->second) {
      if (e.direction < 0 || e.direction >= vars)
        throw std::invalid_argument("instance: seed direction out of range");
      beta.add_coefficient(MultiIndex::unit(vars, e.direction), e.value);
    }
    return beta;
  }
};

namespace detail {

inline BasePtr base_from_json(const json& j) {
  if (j.contains("builder")) {
    const std::string builder = j.at("builder").get<std::string>();
    if (builder == "point") return build_point();
    if (builder == "exterior") return build_exterior(j.at("g").get<int>());
    throw std::invalid_argument("instance.base: unknown builder '" + builder + "'");
  }
  // explicit structure constants
  std::vector<BaseAlgebra::BasisEntry> basis;
  for (const auto& b : j.at("basis"))
    basis.push_back({b.at(0).get<std::string>(), b.at(1).get<int>()});
  auto alg = std::make_shared<BaseAlgebra>(std::move(basis), j.at("unit").get<int>());
  for (const auto& row : j.at("table")) {
    const int r = row.at(0).get<int>();
    const int s = row.at(1).get<int>();
    std::vector<std::pair<int, cplx>> terms;
    for (const auto& t : row.at(2))
      terms.emplace_back(t.at(0).get<int>(), complex_from_json(t.at(1)));
    alg->set_product(r, s, std::move(terms));
  }
  if (j.contains("differential"))
    alg->set_differential(matrix_from_json(j.at("differential"), "instance.base.differential"));
  return alg;
}

inline MCSeries series_from_json(const json& j, const ModelPtr& model, int vars, int order,
                                 const std::string& where) {
  MCSeries s = MCSeries::zero(vars, order, model);
  for (const auto& c : j) {
    const MultiIndex idx = multi_index_from_json(c.at("index"));
    s.s.set_coefficient(idx, element_from_json(c.at("terms"), model->base, model->space,
                                               model->space, where));
  }
  s.check(model);
  return s;
}

}  // namespace detail

inline Instance load_instance(const std::string& path) {
  const std::string bytes = read_file(path);
  json j;
  try {
    j = json::parse(bytes);
  } catch (const std::exception& e) {
    throw std::invalid_argument("instance: JSON parse error: " + std::string(e.what()));
  }

  Instance inst;
  inst.digest = fnv1a_hex(bytes);
  inst.name = j.value("name", path);
  inst.base = detail::base_from_json(j.at("base"));
  const GradedSpace space = graded_space_from_json(j.at("space"), "instance.space");
  const AlgebraElement conn = element_from_json(j.contains("connection") ? j.at("connection") : json(),
                                                inst.base, space, space, "instance.connection");
  inst.model = make_model(inst.base, space, conn);

  if (j.contains("metric")) {
    const json& m = j.at("metric");
    if (m.contains("space"))
      for (const auto& b : m.at("space"))
        inst.metric.space_metric[b.at("degree").get<int>()] =
            matrix_from_json(b.at("matrix"), "instance.metric");
    if (m.contains("base"))
      inst.metric.base_gram = matrix_from_json(m.at("base"), "instance.metric.base");
  }

  if (j.contains("parameters")) {
    inst.vars = j.at("parameters").at("vars").get<int>();
    inst.order = j.at("parameters").at("order").get<int>();
  }

  if (j.contains("seeds"))
    for (const auto& [name, entries] : j.at("seeds").items()) {
      std::vector<SeedEntry> list;
      for (const auto& e : entries)
        list.push_back({e.at("direction").get<int>(),
                        element_from_json(e.at("terms"), inst.base, space, space,
                                          "instance.seeds." + name)});
      inst.seeds[name] = std::move(list);
    }

  if (j.contains("homotopy")) {
    const json& h = j.at("homotopy");
    HomotopyBlock hb;
    const GradedSpace fspace = graded_space_from_json(h.at("space"), "homotopy.space");
    const AlgebraElement fconn = element_from_json(h.contains("connection") ? h.at("connection") : json(),
                                                   inst.base, fspace, fspace, "homotopy.connection");
    hb.f_model = make_model(inst.base, fspace, fconn);
    auto morphism = [&](const char* key, const ModelPtr& src, const ModelPtr& tgt,
                        int degree) {
      return Morphism(src, tgt,
                      element_from_json(h.at(key), inst.base, src->space, tgt->space,
                                        std::string("homotopy.") + key),
                      degree);
    };
    hb.data = HomotopyData{morphism("phi", hb.f_model, inst.model, 0),
                           morphism("psi", inst.model, hb.f_model, 0),
                           morphism("h", hb.f_model, hb.f_model, -1)};
    if (h.contains("series"))
      for (const auto& [name, coeffs] : h.at("series").items())
        hb.series[name] = detail::series_from_json(coeffs, hb.f_model, inst.vars, inst.order,
                                                   "homotopy.series." + name);
    inst.homotopy = std::move(hb);
  }

  if (j.contains("family")) {
    const json& f = j.at("family");
    FamilyBlock fb;
    const int fvars = f.at("parameters").at("vars").get<int>();
    const int forder = f.at("parameters").at("order").get<int>();
    fb.params = std::make_shared<ParameterAlgebra>(fvars, forder, /*antiholomorphic=*/true);
    fb.product = std::make_shared<ProductBase>(inst.base, fb.params);
    const GradedSpace fspace = f.contains("space")
                                   ? graded_space_from_json(f.at("space"), "family.space")
                                   : inst.model->space;
    AlgebraElement total(fb.product->algebra(), fspace, fspace);
    for (const auto& t : f.at("terms")) {
      ParameterAlgebra::Monomial mono;
      mono.t = t.value("t", std::vector<int>(fvars, 0));
      mono.tbar = t.value("tbar", std::vector<int>(fvars, 0));
      mono.dtbar = 0;
      if (t.contains("dtbar"))
        for (int i : t.at("dtbar").get<std::vector<int>>()) mono.dtbar |= (1u << (i - 1));
      const int pidx = fb.params->index_of(mono);
      if (pidx < 0) throw std::invalid_argument("family.terms: monomial outside truncation");
      const int r = inst.base->index_of(t.at("form").get<std::string>());
      GradedMap m(fspace, fspace, t.at("end_degree").get<int>());
      for (const auto& b : t.at("blocks"))
        m.set_block(b.at("source_degree").get<int>(),
                    matrix_from_json(b.at("matrix"), "family.terms"));
      AlgebraElement term(fb.product->algebra(), fspace, fspace);
      term.add_term(fb.product->index(r, pidx), m);
      total = total + term;
    }
    fb.family = make_family(fb.product, fspace, std::move(total));
    inst.family = std::move(fb);
  }
  return inst;
}

}  // namespace cohesive
