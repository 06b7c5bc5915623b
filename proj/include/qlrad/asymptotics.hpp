#ifndef QLRAD_ASYMPTOTICS_HPP
#define QLRAD_ASYMPTOTICS_HPP

#include <string>

#include "qlrad/flow3d.hpp"
#include "qlrad/params.hpp"
#include "qlrad/radial_ode.hpp"

namespace qlrad {

struct AsymptoticsReport {
  double nu_u = 0, nu_v = 0;
  double A_pred = 0, B_pred = 0;
  double A_fit = 0, B_fit = 0;
  double rel_err_A = 0, rel_err_B = 0;
  double r_lo = 0, r_hi = 0;  // fit window (final decade)
  // how A_fit/B_fit were extracted from the raw ratios, for reproducibility
  std::string extrapolation = "one-term 1/ln(r) extrapolation over [r_hi/10, r_hi]";
};

// Fits the growth constants from the trajectory tail:
//   A_fit ~ u(r)/r^{nu_u},  B_fit ~ v(r)/r^{nu_v}
// using the raw ratio at r_hi plus a one-term extrapolation linear in
// 1/ln r between r_hi/10 and r_hi. Requires a bounded-regime trajectory
// that reached r_max (throws Error(RegimeMismatch) otherwise).
AsymptoticsReport verify_growth(const RadialTrajectory& traj,
                                const Equilibrium& eq,
                                const SystemParams& params);

std::string report_to_json(const AsymptoticsReport& rep);

struct SingleEquationResult {
  SystemParams embedded;       // alpha = q, beta = m; then u == v when a == b
  double exponent = 0;         // (p-q)/(p-1-m-q)
  double C_pred = 0;           // growth constant of u(r)/r^exponent
  double ratio_at_rmax = 0;
  double max_uv_reldiff = 0;   // max |u-v|/u along the trajectory
  RadialTrajectory trajectory;
  AsymptoticsReport report;
};

// The single equation div(|Du|^{p-2} Du) = u^m |Du|^q embedded as the
// system with alpha = q, beta = m and equal center values, under which
// u and v coincide identically. Existence requires 0 < q < p-1 and
// m < p-q-1 (throws Error(NoSolutionRegime)); m+q = p-1 is the degenerate
// case (throws Error(DeltaZero)).
SingleEquationResult single_equation_mode(int N, double p, double m, double q,
                                          double a,
                                          const IntegrateConfig& config);

}  // namespace qlrad

#endif  // QLRAD_ASYMPTOTICS_HPP
