#include <cmath>
#include <sstream>

#include "doctest.h"
#include "qlrad/flow3d.hpp"
#include "test_support.hpp"

using namespace qlrad;

namespace {

const SystemParams kRef = validate(3, 10, 2, 4, 1, 1);

double field_norm(const SystemParams& P, const FlowPoint& pt) {
  const auto g = flow_field(P, pt);
  return std::fmax(std::fabs(g[0]), std::fmax(std::fabs(g[1]), std::fabs(g[2])));
}

}  // namespace

TEST_CASE("flow_field: direct evaluation and invariant faces") {
  const auto g = flow_field(kRef, {1, 1, 1});
  CHECK(g[0] == doctest::Approx(-1.0 / 9).epsilon(1e-14));
  CHECK(g[1] == doctest::Approx(35.0 / 9).epsilon(1e-14));
  CHECK(g[2] == doctest::Approx(23.0 / 9).epsilon(1e-14));

  const auto face = flow_field(kRef, {0, 2, 3});
  CHECK(face[0] == 0.0);

  const Equilibrium eq = equilibrium(kRef);
  CHECK(field_norm(kRef, {eq.Y_inf, eq.Z_inf, eq.W_inf}) < 1e-12);
}

TEST_CASE("equilibrium: closed forms for the reference tuple") {
  const Equilibrium eq = equilibrium(kRef);
  CHECK(eq.Y_inf == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(eq.Z_inf == doctest::Approx(6.5).epsilon(1e-14));
  CHECK(eq.W_inf == doctest::Approx(6.5).epsilon(1e-14));
  CHECK(eq.X_inf == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(eq.A == doctest::Approx(0.41893329705576326).epsilon(1e-13));
  CHECK(eq.B == doctest::Approx(0.39755867396073555).epsilon(1e-13));

  // boundary points; P1, P2, P3 are equilibria, P_star is the interval corner
  CHECK(field_norm(kRef, eq.P1) < 1e-12);
  CHECK(field_norm(kRef, eq.P2) < 1e-12);
  REQUIRE(eq.P3.has_value());  // p = 10 >= N = 3
  CHECK(field_norm(kRef, *eq.P3) < 1e-12);
  CHECK(field_norm(kRef, eq.P_star) > 1);
  CHECK(eq.P2.Z == doctest::Approx(3.125).epsilon(1e-14));
  CHECK(eq.P2.W == doctest::Approx(3.5).epsilon(1e-14));
  CHECK(eq.P_star.W == doctest::Approx(3).epsilon(1e-14));
}

TEST_CASE("equilibrium: dimension dependence and P3 gating") {
  const Equilibrium eq10 = equilibrium(validate(10, 10, 2, 4, 1, 1));
  CHECK(eq10.Z_inf == doctest::Approx(13.5).epsilon(1e-14));
  CHECK(eq10.W_inf == doctest::Approx(13.5).epsilon(1e-14));
  CHECK(eq10.X_inf == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(eq10.A == doctest::Approx(0.36767378276478067).epsilon(1e-13));
  CHECK(eq10.A < equilibrium(kRef).A);
  REQUIRE(eq10.P3.has_value());  // p = N

  const Equilibrium eq11 = equilibrium(validate(11, 10, 2, 4, 1, 1));
  CHECK(!eq11.P3.has_value());  // p < N
}

TEST_CASE("equilibrium: single-equation embedding gives A = 1/1024") {
  // alpha = q = 1, beta = m = 0.5 embeds the single equation with p = 3;
  // the exponents m(p-1)/delta = 1, (p-1-beta)/delta = 3/2, m/delta = 1/2
  // evaluate A = 1/(4 * 8^{3/2} * 8^{1/2} * 4) = 1/1024 exactly
  const Equilibrium eq = equilibrium(validate(3, 3, 0.5, 1, 1, 0.5));
  CHECK(eq.Y_inf == doctest::Approx(4).epsilon(1e-14));
  CHECK(eq.Z_inf == doctest::Approx(8).epsilon(1e-14));
  CHECK(eq.W_inf == doctest::Approx(8).epsilon(1e-14));
  CHECK(eq.X_inf == doctest::Approx(4).epsilon(1e-14));
  CHECK(eq.A == doctest::Approx(1.0 / 1024).epsilon(1e-13));
}

TEST_CASE("equilibrium requires delta > 0") {
  CHECK_THROWS_AS(equilibrium(validate(3, 2, 1, 2, 0, 0)), Error);
}

TEST_CASE("stability: characteristic polynomial and eigenvalue cross-check") {
  const StabilityReport st = stability(kRef);
  // exact rationals: a = 124/9, b = 494/9, c = 1183/27
  CHECK(st.char_poly.a == doctest::Approx(124.0 / 9).epsilon(1e-14));
  CHECK(st.char_poly.b == doctest::Approx(494.0 / 9).epsilon(1e-14));
  CHECK(st.char_poly.c == doctest::Approx(1183.0 / 27).epsilon(1e-14));
  CHECK(st.stable);
  CHECK(st.char_poly.a * st.char_poly.b > 9 * st.char_poly.c);
  for (double re : st.eigen_real_parts) CHECK(re < -1e-6);
  // polynomial route and eigensolver route agree on the trace
  const double trace_poly = -st.char_poly.a;
  const double trace_eig = st.eigen_real_parts[0] + st.eigen_real_parts[1] +
                           st.eigen_real_parts[2];
  CHECK(trace_eig == doctest::Approx(trace_poly).epsilon(1e-10));
}

TEST_CASE("stability suite over random delta > 0 tuples") {
  auto rng = test::make_rng(99);
  for (int i = 0; i < 10000; ++i) {
    const SystemParams P = test::draw_delta_pos(rng);
    const StabilityReport st = stability(P);
    REQUIRE(st.char_poly.a > 0);
    REQUIRE(st.char_poly.c > 0);
    REQUIRE(st.char_poly.a * st.char_poly.b > 9 * st.char_poly.c);
    REQUIRE(st.stable);
    REQUIRE(st.eigen_real_parts[2] < 0);
  }
}

TEST_CASE("identity suite: X_inf = nu_u and interval bounds") {
  auto rng = test::make_rng(123);
  for (int i = 0; i < 10000; ++i) {
    const SystemParams P = test::draw_delta_pos(rng);
    const DerivedConstants d = derive(P);
    const Equilibrium eq = equilibrium(P);
    REQUIRE(std::fabs(eq.X_inf - d.nu_u) <= 1e-12 * std::fabs(d.nu_u));
    REQUIRE(eq.Y_inf == doctest::Approx(d.nu_v).epsilon(1e-12));
    REQUIRE(eq.W_inf > P.N);
    REQUIRE(eq.Z_inf > P.N + P.alpha / (P.p - 1 - P.alpha));
    REQUIRE(eq.A > 0);
    REQUIRE(eq.B > 0);
  }
}

TEST_CASE("structure_checks: cooperative and irreducible off the faces") {
  const StructureReport in = structure_checks(kRef, {0.5, 0.5, 0.5}, {5, 5, 5});
  CHECK(in.cooperative);
  CHECK(in.irreducible);

  // box touching the Y = 0 face: the W -> Y edge degenerates there
  const StructureReport face = structure_checks(kRef, {0, 0.5, 0.5}, {5, 5, 5});
  CHECK(face.cooperative);
  CHECK(!face.irreducible);

  // beta = 0 only removes an optional edge
  const StructureReport b0 =
      structure_checks(validate(3, 10, 2, 4, 1, 0), {0.5, 0.5, 0.5}, {5, 5, 5});
  CHECK(b0.cooperative);
  CHECK(b0.irreducible);
}

TEST_CASE("integrate_flow: equilibria stay put") {
  const Equilibrium eq = equilibrium(kRef);
  FlowIntegrateConfig cfg;
  cfg.t_max = 10;
  const FlowTrajectory traj = integrate_flow(kRef, eq.P2, cfg);
  const FlowSample& last = traj.samples.back();
  CHECK(last.Y == doctest::Approx(eq.P2.Y).epsilon(1e-9));
  CHECK(last.Z == doctest::Approx(eq.P2.Z).epsilon(1e-9));
  CHECK(last.W == doctest::Approx(eq.P2.W).epsilon(1e-9));
}

TEST_CASE("integrate_flow: convergence to the interior equilibrium") {
  const Equilibrium eq = equilibrium(kRef);
  FlowIntegrateConfig cfg;
  const FlowTrajectory traj = integrate_flow(
      kRef,
      {(eq.P_star.Y + eq.Y_inf) / 2, (eq.P_star.Z + eq.Z_inf) / 2,
       (eq.P_star.W + eq.W_inf) / 2},
      cfg);
  REQUIRE(traj.outcome == FlowOutcome::Converged);
  REQUIRE(traj.omega.has_value());
  CHECK(traj.omega->Y == doctest::Approx(eq.Y_inf).epsilon(1e-6));
  CHECK(traj.omega->Z == doctest::Approx(eq.Z_inf).epsilon(1e-6));
  CHECK(traj.omega->W == doctest::Approx(eq.W_inf).epsilon(1e-6));
}

TEST_CASE("integrate_flow: ordered starts stay ordered") {
  FlowIntegrateConfig cfg;
  cfg.t_max = 10;
  const FlowTrajectory lo = integrate_flow(kRef, {1, 5, 4}, cfg);
  const FlowTrajectory hi = integrate_flow(kRef, {1.1, 5.5, 4.4}, cfg);
  for (double t = 0.5; t < 10; t += 0.5) {
    const FlowPoint a = flow_at(kRef, lo, t);
    const FlowPoint b = flow_at(kRef, hi, t);
    REQUIRE(a.Y < b.Y + 1e-10);
    REQUIRE(a.Z < b.Z + 1e-10);
    REQUIRE(a.W < b.W + 1e-10);
  }
}

TEST_CASE("order preservation over random ordered pairs") {
  auto rng = test::make_rng(31);
  for (int i = 0; i < 20; ++i) {
    const SystemParams P = test::draw_delta_pos(rng);
    const Equilibrium eq = equilibrium(P);
    FlowIntegrateConfig cfg;
    cfg.t_max = 15;
    FlowPoint a{test::uniform(rng, 0.1, 1.2) * eq.Y_inf,
                test::uniform(rng, 0.6, 1.2) * eq.Z_inf,
                test::uniform(rng, 0.6, 1.2) * eq.W_inf};
    FlowPoint b{a.Y * test::uniform(rng, 1.01, 1.1),
                a.Z * test::uniform(rng, 1.01, 1.1),
                a.W * test::uniform(rng, 1.01, 1.1)};
    const FlowTrajectory ta = integrate_flow(P, a, cfg);
    const FlowTrajectory tb = integrate_flow(P, b, cfg);
    const double t_end =
        std::fmin(ta.samples.back().t, tb.samples.back().t);
    for (double t = 0.25; t <= t_end; t += 0.25) {
      const FlowPoint pa = flow_at(P, ta, t);
      const FlowPoint pb = flow_at(P, tb, t);
      REQUIRE(pa.Y <= pb.Y + 1e-9 * (1 + std::fabs(pb.Y)));
      REQUIRE(pa.Z <= pb.Z + 1e-9 * (1 + std::fabs(pb.Z)));
      REQUIRE(pa.W <= pb.W + 1e-9 * (1 + std::fabs(pb.W)));
    }
  }
}

TEST_CASE("extract_flow_coordinates: limits, bounds and residual") {
  IntegrateConfig cfg;
  cfg.r_max = 1e6;
  const RadialTrajectory traj = integrate(kRef, 1, 1, cfg);
  const ExtractedFlow ext = extract_flow_coordinates(traj);
  const Equilibrium eq = equilibrium(kRef);

  // convergence to the equilibrium at large r
  const FlowSample& last = ext.samples.back();
  CHECK(last.X == doctest::Approx(1.5).epsilon(1e-3));
  CHECK(last.Y == doctest::Approx(1.5).epsilon(1e-3));
  CHECK(last.Z == doctest::Approx(6.5).epsilon(1e-3));
  CHECK(last.W == doctest::Approx(6.5).epsilon(1e-3));

  // backward limits at the origin end
  const FlowSample& first = ext.samples.front();
  const double Zb = kRef.N + kRef.alpha / (kRef.p - 1 - kRef.alpha);
  CHECK(first.Y < 1e-4);
  CHECK(first.Z == doctest::Approx(Zb).epsilon(1e-3));

  // interval bounds along the whole trajectory, with rounding slack
  const double slack = 1e-9;
  for (const FlowSample& s : ext.samples) {
    REQUIRE(s.Y > 0);
    REQUIRE(s.Y < eq.Y_inf * (1 + slack));
    REQUIRE(s.Z > Zb * (1 - slack));
    REQUIRE(s.Z < eq.Z_inf * (1 + slack));
    REQUIRE(s.W > kRef.N * (1 - slack));
    REQUIRE(s.W < eq.W_inf * (1 + slack));
  }

  CHECK(ext.max_residual < 1e-4);
}

TEST_CASE("flow CSV schema") {
  FlowIntegrateConfig cfg;
  cfg.t_max = 1;
  const FlowTrajectory traj = integrate_flow(kRef, {1, 5, 4}, cfg);
  std::ostringstream os;
  write_flow_csv(traj.samples, os);
  std::string header;
  std::istringstream is(os.str());
  std::getline(is, header);
  CHECK(header == "t,X,Y,Z,W");
}
