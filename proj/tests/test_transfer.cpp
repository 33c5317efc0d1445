#include <catch2/catch_amalgamated.hpp>

#include "cohesive/family.hpp"
#include "cohesive/transfer.hpp"
#include "oracles.hpp"

using namespace cohesive;

namespace {

MultiIndex mi(std::vector<int> v) { return MultiIndex(std::move(v)); }

// E = C^0 (+) C^1 with zero connection, F = E (+) (acyclic 0 -> 1), with the
// projection/inclusion pair and the contraction of the acyclic summand.
struct PerturbationSetup {
  ModelPtr e, f;
  HomotopyData data;
  BasePtr base;

  PerturbationSetup() {
    base = build_point();
    GradedSpace se({{0, 1}, {1, 1}});
    GradedSpace sf({{0, 2}, {1, 2}});  // slot 0: E part, slot 1: acyclic part
    e = make_zero_model(base, se);
    GradedMap u0(sf, sf, 1);
    Matrix b = Matrix::Zero(2, 2);
    b(1, 1) = 1.0;  // acyclic pair
    u0.set_block(0, std::move(b));
    AlgebraElement af(base, sf, sf);
    af.add_term(0, u0);
    f = make_model(base, sf, af);

    GradedMap proj(sf, se, 0);
    Matrix p0 = Matrix::Zero(1, 2);
    p0(0, 0) = 1.0;
    proj.set_block(0, p0);
    proj.set_block(1, p0);
    AlgebraElement phib(base, sf, se);
    phib.add_term(0, proj);

    GradedMap incl(se, sf, 0);
    Matrix i0 = Matrix::Zero(2, 1);
    i0(0, 0) = 1.0;
    incl.set_block(0, i0);
    incl.set_block(1, i0);
    AlgebraElement psib(base, se, sf);
    psib.add_term(0, incl);

    GradedMap hm(sf, sf, -1);
    Matrix h1 = Matrix::Zero(2, 2);
    h1(1, 1) = -1.0;  // minus the contraction on the acyclic pair
    hm.set_block(1, h1);
    AlgebraElement hb(base, sf, sf);
    hb.add_term(0, hm);

    data = HomotopyData{Morphism(f, e, phib, 0), Morphism(e, f, psib, 0),
                        Morphism(f, f, hb, -1)};
  }

  // eta = t (p + q): p maps E^0 into the acyclic degree-1 slot, q maps the
  // acyclic degree-0 slot into E^1.
  MCSeries eta(int order = 4) const {
    GradedMap m(f->space, f->space, 1);
    Matrix blk = Matrix::Zero(2, 2);
    blk(1, 0) = 1.0;  // p
    blk(0, 1) = 1.0;  // q
    m.set_block(0, blk);
    AlgebraElement x(base, f->space, f->space);
    x.add_term(0, m);
    MCSeries s = MCSeries::zero(1, order, f);
    s.s.set_coefficient(mi({1}), x);
    return s;
  }
};

// Random valid homotopy data: block package (E (+) acyclic pair) conjugated
// by a random invertible even element of the big space.
struct RandomData {
  ModelPtr e, f;
  HomotopyData data;
};

RandomData random_homotopy_data(std::mt19937_64& gen) {
  const ModelPtr e = oracle::random_flat_model(gen);
  const BasePtr base = e->base;
  const GradedSpace& se = e->space;

  std::uniform_int_distribution<int> dd(se.min_degree(), std::max(se.min_degree(), se.max_degree() - 1));
  const int d0 = dd(gen);
  std::map<int, int> dims;
  for (const auto& [d, n] : se.components()) dims[d] += n;
  dims[d0] += 1;
  dims[d0 + 1] += 1;
  std::vector<std::pair<int, int>> comps(dims.begin(), dims.end());
  const GradedSpace sf{comps};

  GradedMap incl(se, sf, 0), proj(sf, se, 0);
  for (const auto& [d, n] : se.components()) {
    Matrix i = Matrix::Zero(sf.dim(d), n);
    i.topRows(n) = Matrix::Identity(n, n);
    incl.set_block(d, i);
    proj.set_block(d, i.adjoint());
  }

  AlgebraElement af(base, sf, sf);
  for (const auto& [k, m] : e->connection.terms()) {
    GradedMap big(sf, sf, k.second);
    for (const auto& [d, b] : m.blocks()) {
      Matrix bb = Matrix::Zero(sf.dim(d + k.second), sf.dim(d));
      bb.topLeftCorner(b.rows(), b.cols()) = b;
      big.set_block(d, bb);
    }
    af.add_term(k.first, big);
  }
  GradedMap pair(sf, sf, 1);
  Matrix pb = Matrix::Zero(sf.dim(d0 + 1), sf.dim(d0));
  pb(sf.dim(d0 + 1) - 1, sf.dim(d0) - 1) = 1.0;
  pair.set_block(d0, pb);
  af.add_term(base->unit_index(), pair);

  GradedMap hm(sf, sf, -1);
  Matrix hb = Matrix::Zero(sf.dim(d0), sf.dim(d0 + 1));
  hb(sf.dim(d0) - 1, sf.dim(d0 + 1) - 1) = -1.0;
  hm.set_block(d0 + 1, hb);

  AlgebraElement phib(base, sf, se), psib(base, se, sf), hbody(base, sf, sf);
  phib.add_term(base->unit_index(), proj);
  psib.add_term(base->unit_index(), incl);
  hbody.add_term(base->unit_index(), hm);

  const AlgebraElement g = oracle::random_invertible_even(base, sf, gen, 0.3);
  const AlgebraElement ginv = oracle::invert_even(g);
  AlgebraElement af_conj = compose(compose(ginv, af), g);
  const ModelPtr f = make_model(base, sf, af_conj);
  RandomData out;
  out.e = e;
  out.f = f;
  out.data = HomotopyData{Morphism(f, e, compose(phib, g), 0),
                          Morphism(e, f, compose(ginv, psib), 0),
                          Morphism(f, f, compose(compose(ginv, hbody), g), -1)};
  return out;
}

MCSeries random_gauge_orbit_series(const ModelPtr& m, const Dgla& dg, int vars, int order,
                                   std::mt19937_64& gen, double scale = 0.35) {
  GaugeSeries u = GaugeSeries::zero(vars, order, m);
  for (int i = 0; i < vars; ++i)
    u.s.set_coefficient(MultiIndex::unit(vars, i),
                        oracle::random_homogeneous(m->base, m->space, 0, gen, scale));
  return gauge_act(u, MCSeries::zero(vars, order, m), dg);
}

}  // namespace

TEST_CASE("homotopy data validation") {
  PerturbationSetup s;
  CHECK(s.data.defect() < 1e-14);
  CHECK_NOTHROW(s.data.validate());
  CHECK(is_homotopy_equivalence(s.data.phi).verdict);

  SECTION("broken homotopy operator is rejected") {
    HomotopyData bad = s.data;
    bad.h = Morphism::zero(s.f, s.f, -1);
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  }
}

TEST_CASE("transfer_mc") {
  auto& gen = oracle::rng();

  SECTION("zero series transfers to zero") {
    PerturbationSetup s;
    const TransferResult r = transfer_mc(MCSeries::zero(1, 4, s.f), s.data);
    CHECK(r.epsilon.s.is_zero());
    CHECK((r.phi_t.coefficient(MultiIndex::zero(1)) - s.data.phi.body).norm() < 1e-14);
    CHECK(r.max_residual == 0.0);
  }

  SECTION("acyclic-pair closed form: pure second order term") {
    PerturbationSetup s;
    const MCSeries eta = s.eta();
    CHECK(mc_residual(eta, Dgla(s.f)).norm() < 1e-14);
    const TransferResult r = transfer_mc(eta, s.data);
    CHECK(r.epsilon.s.coefficient(mi({1})).norm() < 1e-14);
    const AlgebraElement e2 = r.epsilon.s.coefficient(mi({2}));
    GradedMap want(s.e->space, s.e->space, 1);
    want.set_block(0, -Matrix::Identity(1, 1));
    AlgebraElement we(s.base, s.e->space, s.e->space);
    we.add_term(0, want);
    CHECK((e2 - we).norm() < 1e-13);
    CHECK(r.epsilon.s.coefficient(mi({3})).norm() < 1e-14);
    CHECK(r.epsilon.s.coefficient(mi({4})).norm() < 1e-14);
    CHECK(r.max_residual < 1e-13);
    CHECK(r.max_intertwining_defect < 1e-13);
  }

  SECTION("eta supported where the transfer kills it") {
    PerturbationSetup s;
    GradedMap m(s.f->space, s.f->space, 1);
    Matrix blk = Matrix::Zero(2, 2);
    blk(1, 0) = 1.0;
    m.set_block(0, blk);
    AlgebraElement x(s.base, s.f->space, s.f->space);
    x.add_term(0, m);
    MCSeries eta = MCSeries::zero(1, 4, s.f);
    eta.s.set_coefficient(mi({1}), x);
    const TransferResult r = transfer_mc(eta, s.data);
    CHECK(r.epsilon.s.is_zero());
  }

  SECTION("random homotopy data: residual and intertwining") {
    int done = 0;
    for (int trial = 0; trial < 25 && done < 8; ++trial) {
      RandomData rd = random_homotopy_data(gen);
      if (rd.data.defect() > 1e-11) continue;
      ++done;
      const Dgla dgf(rd.f);
      const MCSeries eta = random_gauge_orbit_series(rd.f, dgf, 1, 4, gen);
      REQUIRE(mc_residual(eta, dgf).max_coefficient_norm() < 1e-10);
      const TransferResult r = transfer_mc(eta, rd.data);
      INFO("trial " << trial);
      CHECK(r.max_residual < tol::hodge);
      CHECK(r.max_intertwining_defect < tol::hodge);
      CHECK((r.phi_t.coefficient(MultiIndex::zero(1)) - rd.data.phi.body).norm() < 1e-13);
      CHECK(is_homotopy_equivalence(rd.data.phi).verdict);
    }
    CHECK(done >= 5);
  }
}

TEST_CASE("l-infinity terms and evaluation") {
  auto& gen = oracle::rng();

  SECTION("unary term with trivial data is the identity") {
    const ModelPtr m = oracle::random_flat_model(gen);
    const HomotopyData triv = HomotopyData::trivial(m);
    const AlgebraElement x = oracle::random_homogeneous(m->base, m->space, 1, gen);
    CHECK((linfty_term(triv, {x}) - x).norm() < 1e-13);
  }

  SECTION("binary symmetry under the shifted sign rule") {
    PerturbationSetup s;
    for (int dx = 0; dx <= 2; ++dx)
      for (int dy = 0; dy <= 2; ++dy) {
        const AlgebraElement x =
            oracle::random_homogeneous(s.base, s.f->space, dx, oracle::rng());
        const AlgebraElement y =
            oracle::random_homogeneous(s.base, s.f->space, dy, oracle::rng());
        if (x.is_zero() || y.is_zero()) continue;
        const AlgebraElement lhs = linfty_term(s.data, {x, y});
        const AlgebraElement rhs = linfty_term(s.data, {y, x});
        const cplx sign(parity_sign(static_cast<long long>(dx - 1) * (dy - 1)));
        CHECK((lhs - rhs * sign).norm() < 1e-12);
      }
  }

  SECTION("argument count overflow") {
    const ModelPtr m = oracle::random_flat_model(gen);
    const HomotopyData triv = HomotopyData::trivial(m);
    const AlgebraElement x = oracle::random_homogeneous(m->base, m->space, 1, gen);
    CHECK_THROWS_AS(linfty_term(triv, {x, x, x, x, x}), std::invalid_argument);
  }

  SECTION("equal-argument sum matches mc_eval on the terminating example") {
    PerturbationSetup s;
    const MCSeries eta = s.eta(4);
    const AlgebraElement e1 = eta.s.coefficient(mi({1}));
    AlgebraElement acc = linfty_term(s.data, {e1});
    acc = acc + linfty_term(s.data, {e1, e1}) * cplx(0.5);
    acc = acc + linfty_term(s.data, {e1, e1, e1}) * cplx(1.0 / 6.0);
    const MCSeries ev = mc_eval(s.data, eta);
    AlgebraElement direct = ev.s.coefficient(mi({1})) + ev.s.coefficient(mi({2})) +
                            ev.s.coefficient(mi({3}));
    CHECK((acc - direct).norm() < 1e-12);
  }

  SECTION("mc_eval agrees with transfer_mc") {
    auto check_agreement = [](const HomotopyData& data, const MCSeries& eta) {
      const TransferResult r = transfer_mc(eta, data);
      const MCSeries ev = mc_eval(data, eta);
      return (r.epsilon.s - ev.s).norm();
    };
    PerturbationSetup s;
    CHECK(check_agreement(s.data, s.eta()) < 1e-13);
    int done = 0;
    for (int trial = 0; trial < 20 && done < 5; ++trial) {
      RandomData rd = random_homotopy_data(gen);
      if (rd.data.defect() > 1e-11) continue;
      ++done;
      const MCSeries eta = random_gauge_orbit_series(rd.f, Dgla(rd.f), 2, 3, gen);
      CHECK(check_agreement(rd.data, eta) < 1e-10);
    }
    CHECK(done >= 3);
  }
}

TEST_CASE("family regularization") {
  auto& gen = oracle::rng();
  const BasePtr omega = build_exterior(1);
  auto params = std::make_shared<ParameterAlgebra>(1, 3, true);
  auto pb = std::make_shared<ProductBase>(omega, params);

  SECTION("already-regular families are fixed") {
    GradedSpace sp({{0, 2}});
    AlgebraElement total(pb->algebra(), sp, sp);
    GradedMap m(sp, sp, 0);
    m.set_block(0, oracle::random_matrix(2, 2, gen));
    ParameterAlgebra::Monomial t1;
    t1.t = {1};
    t1.tbar = {0};
    const int form = pb->index(omega->index_of("theta1"), params->index_of(t1));
    total.add_term(form, m);
    const FamilyConnection fam = make_family(pb, sp, total);
    CHECK(fam.regular());
    const RegularizeResult r = regularize(fam);
    const AlgebraElement id = AlgebraElement::identity(pb->algebra(), sp);
    CHECK((r.j - id).norm() < 1e-14);
    CHECK((r.family.total - total).norm() < 1e-14);
  }

  SECTION("single antiholomorphic term is removed by one contraction step") {
    GradedSpace sp({{0, 2}});
    AlgebraElement total(pb->algebra(), sp, sp);
    GradedMap m(sp, sp, 0);
    const Matrix mat = oracle::random_matrix(2, 2, gen);
    m.set_block(0, mat);
    ParameterAlgebra::Monomial tb_dtb;
    tb_dtb.t = {0};
    tb_dtb.tbar = {1};
    tb_dtb.dtbar = 1;
    const int idx = pb->index(omega->unit_index(), params->index_of(tb_dtb));
    total.add_term(idx, m);
    const FamilyConnection fam = make_family(pb, sp, total);
    CHECK_FALSE(fam.regular());
    const RegularizeResult r = regularize(fam);
    CHECK(r.residual_antiholomorphic < tol::hodge);
    CHECK(r.family.regular());
    // one contraction: J = id - (tbar^2/2) (x) m under the J^{-1} A J convention
    ParameterAlgebra::Monomial tb2;
    tb2.t = {0};
    tb2.tbar = {2};
    const int jidx = pb->index(omega->unit_index(), params->index_of(tb2));
    const AlgebraElement id = AlgebraElement::identity(pb->algebra(), sp);
    const AlgebraElement corr = r.j - id;
    REQUIRE_FALSE(corr.is_zero());
    CHECK((corr.coefficient(jidx, 0).block(0) + 0.5 * mat).norm() < 1e-12);
    CHECK(r.conjugation_defect < 1e-12);
  }

  SECTION("random flat families from conjugated regular seeds") {
    GradedSpace sp({{0, 1}, {1, 1}});
    for (int trial = 0; trial < 6; ++trial) {
      GradedMap v0(sp, sp, 1);
      v0.set_block(0, Matrix::Identity(1, 1));
      AlgebraElement a0(omega, sp, sp);
      a0.add_term(omega->unit_index(), v0);
      const ModelPtr m = make_model(omega, sp, a0);
      const MCSeries eta = random_gauge_orbit_series(m, Dgla(m), 1, 3, gen);
      AlgebraElement total = pb->lift(a0, sp, sp) + pb->from_t_series(eta.s, sp, sp);
      AlgebraElement pert(pb->algebra(), sp, sp);
      for (int r = 0; r < pb->algebra()->dim(); ++r) {
        if (pb->param_weight(r) == 0 || pb->algebra()->degree(r) != 0) continue;
        std::uniform_real_distribution<double> ud(0, 1);
        if (ud(gen) < 0.6) continue;
        GradedMap g(sp, sp, 0);
        bool any = false;
        for (const auto& [d, n] : sp.components()) {
          g.set_block(d, oracle::random_matrix(n, n, gen) * 0.35);
          any = true;
        }
        if (any) pert.add_term(r, g);
      }
      const AlgebraElement j0 = AlgebraElement::identity(pb->algebra(), sp) + pert;
      const AlgebraElement j0inv = detail::invert_unipotent(j0, pb->algebra(), sp);
      const AlgebraElement conj = conjugate_connection(j0, j0inv, total);
      const FamilyConnection fam = make_family(pb, sp, conj);
      const RegularizeResult r = regularize(fam);
      INFO("trial " << trial);
      CHECK(r.residual_antiholomorphic < tol::hodge);
      CHECK(r.conjugation_defect < tol::hodge);
      CHECK(r.family.regular());

      const oracle::SectionIndexing ix(pb->algebra(), sp);
      const Matrix dmat = oracle::base_differential_matrix(ix);
      const Matrix lhs = oracle::left_multiplication_matrix(r.jinv, ix) *
                         (dmat + oracle::left_multiplication_matrix(fam.total, ix)) *
                         oracle::left_multiplication_matrix(r.j, ix);
      const Matrix rhs = dmat + oracle::left_multiplication_matrix(r.family.total, ix);
      CHECK((lhs - rhs).norm() < 1e-9);
    }
  }
}

TEST_CASE("morphism regularization") {
  auto& gen = oracle::rng();
  const BasePtr omega = build_exterior(1);
  auto params = std::make_shared<ParameterAlgebra>(1, 3, true);
  auto pb = std::make_shared<ProductBase>(omega, params);
  GradedSpace sp({{0, 1}, {1, 1}});

  GradedMap v0(sp, sp, 1);
  v0.set_block(0, Matrix::Identity(1, 1));
  AlgebraElement a0(omega, sp, sp);
  a0.add_term(omega->unit_index(), v0);
  const ModelPtr m = make_model(omega, sp, a0);
  const MCSeries eta = random_gauge_orbit_series(m, Dgla(m), 1, 3, gen);
  const AlgebraElement total = pb->lift(a0, sp, sp) + pb->from_t_series(eta.s, sp, sp);
  const FamilyConnection fam = make_family(pb, sp, total);

  SECTION("regular morphisms are fixed") {
    const AlgebraElement id = AlgebraElement::identity(pb->algebra(), sp);
    const RegularizeMorphismResult r = regularize_morphism(fam, fam, id);
    CHECK((r.theta_regular - id).norm() < 1e-13);
    CHECK(r.gamma.is_zero());
    CHECK(r.closedness_defect < 1e-12);
  }

  SECTION("coboundary with antiholomorphic content is stripped") {
    for (int trial = 0; trial < 5; ++trial) {
      AlgebraElement gamma0(pb->algebra(), sp, sp);
      for (int r = 0; r < pb->algebra()->dim(); ++r) {
        const int need_end = -1 - pb->algebra()->degree(r);
        if (need_end < -1 || need_end > 1) continue;
        std::uniform_real_distribution<double> ud(0, 1);
        if (ud(gen) < 0.5) continue;
        GradedMap g(sp, sp, need_end);
        bool any = false;
        for (const auto& [d, n] : sp.components()) {
          const int nb = sp.dim(d + need_end);
          if (nb == 0) continue;
          g.set_block(d, oracle::random_matrix(nb, n, gen) * 0.4);
          any = true;
        }
        if (any) gamma0.add_term(r, g);
      }
      const AlgebraElement id = AlgebraElement::identity(pb->algebra(), sp);
      const AlgebraElement theta =
          id + hom_differential_element(gamma0, fam.total, fam.total);
      const RegularizeMorphismResult r = regularize_morphism(fam, fam, theta);
      INFO("trial " << trial);
      CHECK(r.closedness_defect < tol::hodge);
      CHECK(r.coboundary_defect < tol::hodge);
      CHECK(pb->antiholomorphic_norm(r.theta_regular) < tol::hodge);
    }
  }
}

TEST_CASE("strongify") {
  auto& gen = oracle::rng();
  const BasePtr omega = build_exterior(1);
  auto params = std::make_shared<ParameterAlgebra>(1, 3, true);
  auto pb = std::make_shared<ProductBase>(omega, params);
  GradedSpace sp({{0, 1}, {1, 1}});
  GradedMap v0(sp, sp, 1);
  v0.set_block(0, Matrix::Identity(1, 1));
  AlgebraElement a0(omega, sp, sp);
  a0.add_term(omega->unit_index(), v0);
  const ModelPtr m = make_model(omega, sp, a0);

  SECTION("constant families give the zero series") {
    const FamilyConnection fam = make_family(pb, sp, pb->lift(a0, sp, sp));
    const TransferResult r = strongify(fam, HomotopyData::trivial(m));
    CHECK(r.epsilon.s.is_zero());
  }

  SECTION("trivial data returns the family series unchanged") {
    const MCSeries eta = random_gauge_orbit_series(m, Dgla(m), 1, 3, gen);
    const AlgebraElement total = pb->lift(a0, sp, sp) + pb->from_t_series(eta.s, sp, sp);
    const FamilyConnection fam = make_family(pb, sp, total);
    const TransferResult r = strongify(fam, HomotopyData::trivial(m));
    CHECK((r.epsilon.s - eta.s).norm() < 1e-12);
  }

  SECTION("regularize then strongify recovers the seed up to gauge") {
    const HodgePackage hp(m);
    const MCSeries seed = random_gauge_orbit_series(m, hp.dgla(), 1, 3, gen);
    const AlgebraElement total = pb->lift(a0, sp, sp) + pb->from_t_series(seed.s, sp, sp);
    AlgebraElement pert(pb->algebra(), sp, sp);
    ParameterAlgebra::Monomial tb;
    tb.t = {0};
    tb.tbar = {1};
    GradedMap g(sp, sp, 0);
    g.set_block(0, oracle::random_matrix(1, 1, gen) * 0.4);
    g.set_block(1, oracle::random_matrix(1, 1, gen) * 0.4);
    pert.add_term(pb->index(omega->unit_index(), params->index_of(tb)), g);
    const AlgebraElement j0 = AlgebraElement::identity(pb->algebra(), sp) + pert;
    const AlgebraElement j0inv = detail::invert_unipotent(j0, pb->algebra(), sp);
    const FamilyConnection fam =
        make_family(pb, sp, conjugate_connection(j0, j0inv, total));

    const RegularizeResult reg = regularize(fam);
    const TransferResult r = strongify(reg.family, HomotopyData::trivial(m));
    CHECK(r.max_residual < tol::hodge);

    const std::vector<cplx> dir{cplx(1.0)};
    const AlgebraElement k1 = kodaira_spencer(seed, dir, hp);
    const AlgebraElement k2 = kodaira_spencer(r.epsilon, dir, hp);
    CHECK((k1 - k2).norm() < tol::hodge);
    const SliceResult s1 = slice_normalize(seed, hp);
    const SliceResult s2 = slice_normalize(r.epsilon, hp);
    CHECK(s1.max_codifferential < tol::gauge);
    CHECK(s2.max_codifferential < tol::gauge);
  }

  SECTION("non-regular input is refused") {
    const AlgebraElement total = pb->lift(a0, sp, sp);
    AlgebraElement pert(pb->algebra(), sp, sp);
    ParameterAlgebra::Monomial tb;
    tb.t = {0};
    tb.tbar = {1};
    GradedMap g(sp, sp, 0);
    g.set_block(0, oracle::random_matrix(1, 1, gen) * 0.5);
    pert.add_term(pb->index(omega->unit_index(), params->index_of(tb)), g);
    const AlgebraElement j0 = AlgebraElement::identity(pb->algebra(), sp) + pert;
    const AlgebraElement j0inv = detail::invert_unipotent(j0, pb->algebra(), sp);
    const FamilyConnection fam =
        make_family(pb, sp, conjugate_connection(j0, j0inv, total));
    REQUIRE_FALSE(fam.regular());
    CHECK_THROWS_AS(strongify(fam, HomotopyData::trivial(m)), std::invalid_argument);
  }
}
