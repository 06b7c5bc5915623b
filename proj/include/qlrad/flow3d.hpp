#ifndef QLRAD_FLOW3D_HPP
#define QLRAD_FLOW3D_HPP

#include <array>
#include <iosfwd>
#include <optional>
#include <vector>

#include "qlrad/params.hpp"
#include "qlrad/radial_ode.hpp"

namespace qlrad {

// Point of the autonomous system in t = ln r obtained from a radial solution
// through
//   Y = r v'/v,  Z = r v^m / (u')^{p-1-alpha},  W = r v^beta (u')^q / (v')^{p-1}.
struct FlowPoint {
  double Y = 0;
  double Z = 0;
  double W = 0;
};

// Right-hand side g(Y,Z,W):
//   dY = Y ((p-N)/(p-1) - Y + W/(p-1))
//   dZ = Z ((N(p-1) - (N-1)alpha)/(p-1) - (p-1-alpha)/(p-1) Z + m Y)
//   dW = W ((N(p-1) - q(N-1))/(p-1) + beta Y + q Z/(p-1) - W)
std::array<double, 3> flow_field(const SystemParams& params,
                                 const FlowPoint& pt);

// Closed-form Jacobian of g; off-diagonal entries are Y/(p-1), m Z, beta W
// and q W/(p-1), all nonnegative on the closed positive octant.
std::array<std::array<double, 3>, 3> flow_jacobian(const SystemParams& params,
                                                   const FlowPoint& pt);

struct CharPoly {
  double a = 0, b = 0, c = 0;  // lambda^3 + a lambda^2 + b lambda + c
};

struct StabilityReport {
  CharPoly char_poly;
  bool stable = false;  // Routh-Hurwitz: a > 0, c > 0, ab > c
  std::array<double, 3> eigen_real_parts{};  // numeric cross-check, sorted
};

// Linearization at the interior equilibrium; requires delta > 0.
StabilityReport stability(const SystemParams& params);

// The interior equilibrium and the growth data attached to it:
//   Y_inf = (p(p-1-alpha)+q)/delta
//   Z_inf = m(p-1)/(p-1-alpha) Y_inf + N + alpha/(p-1-alpha)
//   W_inf = (p-1) Y_inf + N - p
//   X_inf = Z_inf/(p-1) + (p-N)/(p-1)        ( = nu_u identically )
//   A = 1 / (Y^{m(p-1)/delta} Z^{(p-1-beta)/delta} W^{m/delta} X)
//   B = 1 / (Y^{(p-1)(p-1-alpha)/delta} Z^{q/delta} W^{(p-1-alpha)/delta})
// plus the boundary equilibria P1, P2, P3 (P3 only when p >= N) and the
// order-interval corner P_star = (0, N + alpha/(p-1-alpha), N).
struct Equilibrium {
  double Y_inf = 0, Z_inf = 0, W_inf = 0, X_inf = 0;
  double A = 0, B = 0;
  CharPoly char_poly;
  bool stable = false;
  std::array<double, 3> eigen_real_parts{};
  FlowPoint P1, P2, P_star;
  std::optional<FlowPoint> P3;
};

// Requires delta > 0 and alpha < p-1; throws Error(DeltaNotPositive).
Equilibrium equilibrium(const SystemParams& params);

struct StructureReport {
  bool cooperative = false;
  bool irreducible = false;
};

// Evaluates the closed-form Jacobian on an axis-aligned lattice over
// [lo, hi] (endpoints included): cooperative = all off-diagonal entries
// nonnegative everywhere; irreducible = dependency digraph strongly
// connected everywhere.
StructureReport structure_checks(const SystemParams& params,
                                 const FlowPoint& lo, const FlowPoint& hi,
                                 int points_per_axis = 5);

enum class FlowOutcome { Converged, NonConvergent, Divergent, StepUnderflow };
const char* flow_outcome_name(FlowOutcome o);

struct FlowSample {
  double t = 0;
  double X = 0;  // companion coordinate, slaved to Z
  double Y = 0, Z = 0, W = 0;
};

struct FlowTrajectory {
  std::vector<FlowSample> samples;
  FlowOutcome outcome = FlowOutcome::NonConvergent;
  std::optional<FlowPoint> omega;  // present iff Converged
};

struct FlowIntegrateConfig {
  double t_max = 100;
  double rtol = 1e-10;
  double atol = 1e-12;
  double max_dt = 0.05;
  double omega_tol = 1e-6;       // Cauchy tolerance over the final window
  double divergence_cap = 1e8;
};

// Adaptive integration of the (Y,Z,W) system from t = 0 to t_max. The X
// equation dX = X((p-N)/(p-1) - X + Z/(p-1)) is carried alongside, seeded
// at x0 (default: the value slaving X to Z(0)). The omega estimate is the
// final point when the trajectory is Cauchy over the final 10% of the time
// window at omega_tol.
FlowTrajectory integrate_flow(const SystemParams& params,
                              const FlowPoint& start,
                              const FlowIntegrateConfig& config,
                              std::optional<double> x0 = std::nullopt);

// Hermite interpolation of (Y,Z,W) at time t inside the sampled range.
FlowPoint flow_at(const SystemParams& params, const FlowTrajectory& traj,
                  double t);

struct ExtractedFlow {
  std::vector<FlowSample> samples;  // t = ln r
  // max over interior samples of |centered-difference d/dt - field| relative
  // to the field magnitude, all four coordinates
  double max_residual = 0;
};

ExtractedFlow extract_flow_coordinates(const RadialTrajectory& traj);

// Header: t,X,Y,Z,W. 17 significant digits per value.
void write_flow_csv(const std::vector<FlowSample>& samples, std::ostream& os);

}  // namespace qlrad

#endif  // QLRAD_FLOW3D_HPP
