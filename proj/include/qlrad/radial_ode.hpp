#ifndef QLRAD_RADIAL_ODE_HPP
#define QLRAD_RADIAL_ODE_HPP

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qlrad/params.hpp"

namespace qlrad {

// Integration state at radius r:
//   z = (u')^{p-1-alpha},   s = (v')^{p-1}.
// These variables make the system rational in the state and avoid
// differentiating |u'|^{p-2} u' at u' = 0:
//   u' = z^{1/(p-1-alpha)}
//   z' = (p-1-alpha)/(p-1) v^m - gamma z / r
//   v' = s^{1/(p-1)}
//   s' = v^beta z^{q/(p-1-alpha)} - (N-1) s / r
struct RadialState {
  double r = 0;
  double u = 0;
  double z = 0;
  double v = 0;
  double s = 0;
};

double radial_uprime(const SystemParams& params, const RadialState& st);
double radial_vprime(const SystemParams& params, const RadialState& st);

// (du/dr, dz/dr, dv/dr, ds/dr). Throws Error(NonPositiveState) when the
// state is outside the positive cone.
std::array<double, 4> radial_rhs(const SystemParams& params,
                                 const RadialState& st);

enum class StopReason { ReachedRMax, BlowUp, StepUnderflow, MonitorViolation };
const char* stop_reason_name(StopReason r);

// One inequality-bound violation beyond the monitor slack.
struct MonitorEvent {
  double r = 0;
  std::string bound;     // "l01", "l02", "l1.lower", "l1.upper", "l2.lower", "l2.upper"
  double rel_violation = 0;
};

struct IntegrateConfig {
  double r0 = 1e-6;
  double r_max = 1e3;
  double rtol = 1e-10;
  double atol = 1e-12;
  double blowup_cap = 1e10;   // on max(v, z); armed only when sigma > 1
  double max_dlnr = 0.002;    // step cap in log-radius units
  double monitor_slack = 1e-9;
  bool abort_on_monitor_violation = true;
};

struct RadialTrajectory {
  SystemParams params;
  double a = 1;
  double b = 1;
  std::vector<RadialState> samples;  // strictly increasing in r
  StopReason stop = StopReason::ReachedRMax;
  std::optional<double> R_est;       // present iff stop == BlowUp
  std::vector<MonitorEvent> monitors;
};

// Leading-order seed at a small radius r0, integrating the system with
// v frozen at b:
//   z(r0) = (p-1-alpha) b^m r0 / ((N-1)(p-1-alpha) + p-1)
//   s(r0) = b^beta w^q r0 / (N + q/(p-1-alpha)),   w = z^{1/(p-1-alpha)}
// The first-order increments of u and v over [0, r0] are retained so that
// results at r = O(1) are insensitive to the choice of r0.
// Requires alpha < p-1 (throws Error(DegenerateAlpha) otherwise).
RadialState seed_near_origin(const SystemParams& params, double a, double b,
                             double r0);

// Adaptive integration from seed_near_origin(r0) out to r_max, in r for
// r < 1 and in ln r beyond. Exact solutions satisfy the sharp interior
// bounds
//   (l01) (N + alpha/(p-1-alpha)) z < r v^m
//   (l02) N s < r v^beta z^{q/(p-1-alpha)}
//   (l1)  (p-1-alpha)/(N(p-1-alpha)+alpha) v^m < z' < (p-1-alpha)/(p-1) v^m
//   (l2)  v^beta z^{q/(p-1-alpha)} / N <= s' <= v^beta z^{q/(p-1-alpha)}
// are checked at every accepted step with the configured relative slack.
// A violation stops the run (stop = MonitorViolation) unless
// abort_on_monitor_violation is false, in which case it is only logged.
RadialTrajectory integrate(const SystemParams& params, double a, double b,
                           const IntegrateConfig& config);

struct BlowupFit {
  double R_est = 0;
  double rate_exponent = 0;  // slope of log u' vs log(R_est - r)
  double fit_quality = 0;    // R^2 of the linear fit of z^{1-sigma}/(sigma-1)
};

// Linear fit of z^{1-sigma}/(sigma-1) against r over the final decade of
// samples; R_est is the root of the fit. Requires stop == BlowUp and
// sigma > 1.
BlowupFit estimate_blowup(const RadialTrajectory& traj,
                          const DerivedConstants& derived);

// The rescaling  u_l(r) = l^{nu_u} u(r/l),  v_l(r) = l^{nu_v} v(r/l)
// maps solutions to solutions; z and s are rescaled consistently and the
// blow-up radius maps R -> l R.
RadialTrajectory scale_solution(const RadialTrajectory& traj, double lambda);

// Max relative defect of a single high-order step between consecutive
// samples; a solution-path of the system gives values at rounding level.
double rhs_defect(const RadialTrajectory& traj);

// Cubic Hermite interpolation between bracketing samples (derivatives from
// the right-hand side). r must lie inside the sampled range.
RadialState state_at(const RadialTrajectory& traj, double r);

// Header: r,u,uprime,v,vprime,z,s. 17 significant digits per value.
void write_trajectory_csv(const RadialTrajectory& traj, std::ostream& os);

}  // namespace qlrad

#endif  // QLRAD_RADIAL_ODE_HPP
