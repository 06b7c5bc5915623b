#include <cmath>
#include <sstream>

#include "doctest.h"
#include "qlrad/radial_ode.hpp"
#include "test_support.hpp"

using namespace qlrad;

namespace {

const SystemParams kRef = validate(3, 10, 2, 4, 1, 1);   // bounded regime
const SystemParams kProto = validate(3, 2, 1, 2, 0, 0);  // both blow up

IntegrateConfig coarse_config(double r_max) {
  IntegrateConfig cfg;
  cfg.r_max = r_max;
  cfg.max_dlnr = 0.02;
  return cfg;
}

}  // namespace

TEST_CASE("seed_near_origin: leading-order values") {
  const double r0 = 1e-4;
  const RadialState st = seed_near_origin(kRef, 1, 1, r0);
  // re-derived from the frozen-v quadrature of the integrated system
  CHECK(st.z == doctest::Approx(3.2e-5).epsilon(1e-14));
  const double w = radial_uprime(kRef, st);
  CHECK(w == doctest::Approx(0.27424817567620732).epsilon(1e-12));
  CHECK(st.s == doctest::Approx(1.6162440712835372e-7).epsilon(1e-12));
  CHECK(radial_vprime(kRef, st) ==
        doctest::Approx(0.17595015774661727).epsilon(1e-12));
  // coarser reference figures
  CHECK(w == doctest::Approx(0.27424).epsilon(1e-4));
  CHECK(st.s == doctest::Approx(1.6162e-7).epsilon(1e-4));
  CHECK(radial_vprime(kRef, st) == doctest::Approx(0.17600).epsilon(5e-4));

  // first-order u, v increments, small and positive
  const double D = 8;
  CHECK(st.u - 1 == doctest::Approx(r0 * w * D / (D + 1)).epsilon(1e-12));
  CHECK(st.u - 1 < 3e-5);
  CHECK(st.v - 1 > 0);
  CHECK(st.v - 1 < 2e-5);
}

TEST_CASE("seed_near_origin: z, s vanish as r0 -> 0") {
  const RadialState a = seed_near_origin(kRef, 1, 1, 1e-6);
  const RadialState b = seed_near_origin(kRef, 1, 1, 1e-10);
  CHECK(b.z < a.z);
  CHECK(b.s < a.s);
  CHECK(b.z < 1e-9);
  CHECK(b.s < 1e-13);
}

TEST_CASE("seed_near_origin refuses alpha >= p-1") {
  CHECK_THROWS_AS(seed_near_origin(validate(3, 2, 1, 2, 1, 0), 1, 1, 1e-6),
                  Error);
}

TEST_CASE("seed_near_origin commutes with the scaling family") {
  const double r0 = 1e-5, lambda = 2.5;
  const DerivedConstants der = derive(kRef);
  const RadialState base = seed_near_origin(kRef, 1, 1, r0);

  RadialTrajectory one_sample;
  one_sample.params = kRef;
  one_sample.samples.push_back(base);
  const RadialState scaled = scale_solution(one_sample, lambda).samples[0];

  const RadialState direct =
      seed_near_origin(kRef, std::pow(lambda, der.nu_u),
                       std::pow(lambda, der.nu_v), lambda * r0);
  CHECK(direct.u == doctest::Approx(scaled.u).epsilon(1e-12));
  CHECK(direct.v == doctest::Approx(scaled.v).epsilon(1e-12));
  CHECK(direct.z == doctest::Approx(scaled.z).epsilon(1e-12));
  CHECK(direct.s == doctest::Approx(scaled.s).epsilon(1e-12));
}

TEST_CASE("radial_rhs: direct evaluation") {
  const RadialState st{1, 1, 1, 1, 1};
  const auto f = radial_rhs(kRef, st);
  CHECK(f[0] == doctest::Approx(1).epsilon(1e-15));
  CHECK(f[1] == doctest::Approx(-8.0 / 9).epsilon(1e-15));
  CHECK(f[2] == doctest::Approx(1).epsilon(1e-15));
  CHECK(f[3] == doctest::Approx(-1).epsilon(1e-15));
}

TEST_CASE("radial_rhs: seed substitution gives positive z'") {
  const double r0 = 1e-5;
  const RadialState st = seed_near_origin(kRef, 1, 1, r0);
  const auto f = radial_rhs(kRef, st);
  // z' -> (p-1-alpha)/(p-1) b^m (1 - gamma/(gamma+1)) at the seed, with the
  // O(r0) enhancement from the v increment keeping it strictly above
  const double gamma = 16.0 / 9;
  const double expect = 8.0 / 9 * (1 - gamma / (gamma + 1));
  CHECK(f[1] == doctest::Approx(expect).epsilon(1e-4));
  CHECK(f[1] >= expect);
}

TEST_CASE("radial_rhs: v^m homogeneity") {
  const RadialState s1{1, 1, 1, 1, 1};
  const RadialState s2{1, 1, 1, 2, 1};
  const auto f1 = radial_rhs(kRef, s1);
  const auto f2 = radial_rhs(kRef, s2);
  const double gamma = 16.0 / 9;
  // doubling v with m = 2 quadruples the v^m source in z'
  CHECK((f2[1] + gamma) / (f1[1] + gamma) == doctest::Approx(4).epsilon(1e-14));
}

TEST_CASE("radial_rhs rejects non-positive states") {
  CHECK_THROWS_AS(radial_rhs(kRef, RadialState{1, 1, 1, -1, 1}), Error);
  CHECK_THROWS_AS(radial_rhs(kRef, RadialState{0, 1, 1, 1, 1}), Error);
  CHECK_THROWS_AS(radial_rhs(kRef, RadialState{1, -1, 1, 1, 1}), Error);
}

TEST_CASE("integrate: bounded regime reaches r_max with increasing samples") {
  IntegrateConfig cfg;
  cfg.r_max = 500;
  const RadialTrajectory traj = integrate(kRef, 1, 1, cfg);
  REQUIRE(traj.stop == StopReason::ReachedRMax);
  CHECK(traj.monitors.empty());
  CHECK(traj.samples.back().r == 500);

  for (std::size_t i = 1; i < traj.samples.size(); ++i) {
    const RadialState& a = traj.samples[i - 1];
    const RadialState& b = traj.samples[i];
    REQUIRE(b.r > a.r);
    REQUIRE(b.u > a.u);
    REQUIRE(b.v > a.v);
    REQUIRE(b.z > a.z);
    REQUIRE(b.s > a.s);
  }

  // pre-asymptotic check of the growth constants at r = 500
  const RadialState& last = traj.samples.back();
  const double A = 0.41893329705576326, B = 0.39755867396073555;
  CHECK(last.u / std::pow(500.0, 1.5) == doctest::Approx(A).epsilon(0.25));
  CHECK(last.v / std::pow(500.0, 1.5) == doctest::Approx(B).epsilon(0.25));
}

TEST_CASE("integrate: dimension dependence at r = 500") {
  double prev_u = 1e300, prev_v = 1e300;
  for (int N : {3, 10, 30, 60}) {
    IntegrateConfig cfg = coarse_config(500);
    const RadialTrajectory traj =
        integrate(validate(N, 10, 2, 4, 1, 1), 1, 1, cfg);
    REQUIRE(traj.stop == StopReason::ReachedRMax);
    const RadialState& last = traj.samples.back();
    CHECK(last.u < prev_u);
    CHECK(last.v < prev_v);
    prev_u = last.u;
    prev_v = last.v;
  }
}

TEST_CASE("integrate: semilinear prototype blows up at finite radius") {
  IntegrateConfig cfg;
  cfg.r_max = 100;
  const RadialTrajectory traj = integrate(kProto, 1, 1, cfg);
  REQUIRE(traj.stop == StopReason::BlowUp);
  CHECK(traj.monitors.empty());
  REQUIRE(traj.R_est.has_value());
  CHECK(*traj.R_est > traj.samples.back().r);

  const BlowupFit fit = estimate_blowup(traj, derive(kProto));
  CHECK(fit.rate_exponent == doctest::Approx(-3).epsilon(0.05));
  CHECK(fit.fit_quality > 0.999);
}

TEST_CASE("integrate: u stays bounded while v blows up in regime (iii)") {
  const SystemParams P = validate(3, 2, 1, 5, 0, 0);
  CHECK(derive(P).sigma == doctest::Approx(7.0 / 3).epsilon(1e-14));
  IntegrateConfig cfg;
  cfg.r_max = 100;
  const RadialTrajectory traj = integrate(P, 1, 1, cfg);
  REQUIRE(traj.stop == StopReason::BlowUp);
  const RadialState& last = traj.samples.back();
  CHECK(last.v >= cfg.blowup_cap);
  CHECK(last.u < 50);  // u(R-) finite; the integrable u' singularity
}

TEST_CASE("estimate_blowup recovers synthetic power-law data exactly") {
  const double K = 2, R = 3, sigma = 4.0 / 3;
  RadialTrajectory traj;
  traj.params = kProto;
  traj.stop = StopReason::BlowUp;
  // log-spaced approach R - r from 1e-1 down to 1e-5
  for (int i = 0; i <= 400; ++i) {
    const double gap = std::pow(10.0, -1.0 - 4.0 * i / 400.0);
    const double r = R - gap;
    const double z = std::pow(K * gap, 1 / (1 - sigma));
    traj.samples.push_back({r, 1.0, z, 1.0, 1.0});
  }
  const BlowupFit fit = estimate_blowup(traj, derive(kProto));
  CHECK(fit.R_est == doctest::Approx(R).epsilon(1e-8));
  CHECK(fit.rate_exponent == doctest::Approx(-3).epsilon(1e-6));
  CHECK(fit.fit_quality > 1 - 1e-12);
}

TEST_CASE("estimate_blowup preconditions") {
  IntegrateConfig cfg = coarse_config(5);
  const RadialTrajectory bounded = integrate(kRef, 1, 1, cfg);
  CHECK_THROWS_AS(estimate_blowup(bounded, derive(kRef)), Error);
}

TEST_CASE("scale_solution: identity at lambda = 1") {
  IntegrateConfig cfg = coarse_config(10);
  const RadialTrajectory traj = integrate(kRef, 1, 1, cfg);
  const RadialTrajectory same = scale_solution(traj, 1);
  REQUIRE(same.samples.size() == traj.samples.size());
  for (std::size_t i = 0; i < traj.samples.size(); ++i) {
    CHECK(same.samples[i].r == traj.samples[i].r);
    CHECK(same.samples[i].u == traj.samples[i].u);
    CHECK(same.samples[i].v == traj.samples[i].v);
  }
}

TEST_CASE("scale_solution: rescaled paths still solve the system") {
  IntegrateConfig cfg;
  cfg.r_max = 50;
  const RadialTrajectory traj = integrate(kRef, 1, 1, cfg);
  CHECK(rhs_defect(traj) < 1e-8);
  for (double lambda : {0.5, 2.0, 10.0}) {
    const RadialTrajectory scaled = scale_solution(traj, lambda);
    CHECK(rhs_defect(scaled) < 1e-6);
  }
}

TEST_CASE("scale_solution: blow-up radius maps R -> lambda R") {
  IntegrateConfig cfg;
  cfg.r_max = 100;
  const RadialTrajectory traj = integrate(kProto, 1, 1, cfg);
  REQUIRE(traj.R_est.has_value());

  const double lambda = 2;
  const RadialTrajectory scaled = scale_solution(traj, lambda);
  REQUIRE(scaled.R_est.has_value());
  CHECK(*scaled.R_est == doctest::Approx(lambda * *traj.R_est).epsilon(1e-14));

  // independent route: integrate from the rescaled center values
  // (nu_u = -2, nu_v = -4 for the prototype)
  const DerivedConstants der = derive(kProto);
  CHECK(der.nu_u == doctest::Approx(-2).epsilon(1e-14));
  CHECK(der.nu_v == doctest::Approx(-4).epsilon(1e-14));
  const double a2 = std::pow(lambda, der.nu_u), b2 = std::pow(lambda, der.nu_v);
  const RadialTrajectory other = integrate(kProto, a2, b2, cfg);
  REQUIRE(other.stop == StopReason::BlowUp);
  CHECK(*other.R_est == doctest::Approx(lambda * *traj.R_est).epsilon(1e-3));
}

TEST_CASE("integrate: results at r = 1 are insensitive to r0") {
  double u_ref = 0, v_ref = 0;
  for (double r0 : {1e-8, 1e-7, 1e-6, 1e-5, 1e-4}) {
    IntegrateConfig cfg;
    cfg.r0 = r0;
    cfg.r_max = 1;
    const RadialTrajectory traj = integrate(kRef, 1, 1, cfg);
    const RadialState& last = traj.samples.back();
    REQUIRE(last.r == doctest::Approx(1.0).epsilon(1e-12));
    if (u_ref == 0) {
      u_ref = last.u;
      v_ref = last.v;
    } else {
      CHECK(last.u == doctest::Approx(u_ref).epsilon(1e-6));
      CHECK(last.v == doctest::Approx(v_ref).epsilon(1e-6));
    }
  }
}

TEST_CASE("integrate: stop reason matches the classification (smoke)") {
  auto rng = test::make_rng(2024);
  for (RegimeTag want : {RegimeTag::AllBoundedGlobal, RegimeTag::BothBlowup,
                         RegimeTag::UFiniteVBlowup}) {
    for (int i = 0; i < 5; ++i) {
      const SystemParams P = test::draw_regime(rng, want);
      IntegrateConfig cfg = coarse_config(want == RegimeTag::AllBoundedGlobal
                                              ? 30.0
                                              : 1e6);
      cfg.blowup_cap = 1e8;
      const double a = test::uniform(rng, 0.5, 2);
      const double b = test::uniform(rng, 1, 2);
      const RadialTrajectory traj = integrate(P, a, b, cfg);
      if (want == RegimeTag::AllBoundedGlobal) {
        REQUIRE(traj.stop == StopReason::ReachedRMax);
      } else {
        REQUIRE(traj.stop == StopReason::BlowUp);
      }
    }
  }
  CHECK_THROWS_AS(integrate(validate(3, 2, 1, 2, 1.3, 0), 1, 1,
                            IntegrateConfig{}),
                  Error);
}

TEST_CASE("monitor violations abort by default, or are logged on request") {
  // a negative slack turns the sharp bounds into unreachable ones, forcing
  // violations from the seed onward
  IntegrateConfig cfg = coarse_config(2);
  cfg.monitor_slack = -0.5;

  const RadialTrajectory aborted = integrate(kRef, 1, 1, cfg);
  CHECK(aborted.stop == StopReason::MonitorViolation);
  REQUIRE(!aborted.monitors.empty());
  CHECK(aborted.monitors.front().bound == "l01");

  cfg.abort_on_monitor_violation = false;
  const RadialTrajectory logged = integrate(kRef, 1, 1, cfg);
  CHECK(logged.stop == StopReason::ReachedRMax);
  CHECK(logged.samples.back().r == 2);
  CHECK(logged.monitors.size() > 10);
}

TEST_CASE("state_at: reproduces samples and interpolates between them") {
  IntegrateConfig cfg = coarse_config(10);
  const RadialTrajectory traj = integrate(kRef, 1, 1, cfg);
  const RadialState& mid = traj.samples[traj.samples.size() / 2];
  const RadialState at = state_at(traj, mid.r);
  CHECK(at.u == mid.u);
  CHECK(at.v == mid.v);

  const RadialState& nxt = traj.samples[traj.samples.size() / 2 + 1];
  const RadialState between = state_at(traj, 0.5 * (mid.r + nxt.r));
  CHECK(between.u > mid.u);
  CHECK(between.u < nxt.u);
  CHECK_THROWS_AS(state_at(traj, 1e9), Error);
}

TEST_CASE("trajectory CSV: schema and full-precision round trip") {
  IntegrateConfig cfg = coarse_config(2);
  const RadialTrajectory traj = integrate(kRef, 1, 1, cfg);
  std::ostringstream os;
  write_trajectory_csv(traj, os);
  std::istringstream is(os.str());
  std::string header;
  std::getline(is, header);
  CHECK(header == "r,u,uprime,v,vprime,z,s");

  std::string line;
  std::size_t rows = 0;
  while (std::getline(is, line)) {
    if (rows == traj.samples.size() - 1) {
      // last row parses back to the exact stored values
      std::istringstream ls(line);
      double r, u;
      char comma;
      ls >> r >> comma >> u;
      CHECK(r == traj.samples.back().r);
      CHECK(u == traj.samples.back().u);
    }
    ++rows;
  }
  CHECK(rows == traj.samples.size());
}
