#include "qlrad/asymptotics.hpp"

#include <cmath>
#include <sstream>

#include "qlrad/format.hpp"

#include "json.hpp"

namespace qlrad {

AsymptoticsReport verify_growth(const RadialTrajectory& traj,
                                const Equilibrium& eq,
                                const SystemParams& params) {
  if (traj.stop != StopReason::ReachedRMax)
    throw Error(ErrorCode::RegimeMismatch,
                "growth verification needs a trajectory that reached r_max");
  const Regime regime = classify(params);
  if (regime.tag != RegimeTag::AllBoundedGlobal)
    throw Error(ErrorCode::RegimeMismatch,
                "growth verification applies to the bounded regime only");
  const DerivedConstants der = derive(params);

  AsymptoticsReport rep;
  rep.nu_u = der.nu_u;
  rep.nu_v = der.nu_v;
  rep.A_pred = eq.A;
  rep.B_pred = eq.B;
  rep.r_hi = traj.samples.back().r;
  rep.r_lo = rep.r_hi / 10;
  if (rep.r_lo < traj.samples.front().r)
    rep.r_lo = traj.samples.front().r;

  const RadialState s_lo = state_at(traj, rep.r_lo);
  const RadialState& s_hi = traj.samples.back();
  auto ratio = [](double val, double r, double nu) {
    return val * std::pow(r, -nu);
  };
  const double phiA_lo = ratio(s_lo.u, rep.r_lo, der.nu_u);
  const double phiA_hi = ratio(s_hi.u, rep.r_hi, der.nu_u);
  const double phiB_lo = ratio(s_lo.v, rep.r_lo, der.nu_v);
  const double phiB_hi = ratio(s_hi.v, rep.r_hi, der.nu_v);

  // one-term model phi(r) = A + c / ln r; eliminate c between the window ends
  const double x_lo = 1 / std::log(rep.r_lo);
  const double x_hi = 1 / std::log(rep.r_hi);
  rep.A_fit = (phiA_hi * x_lo - phiA_lo * x_hi) / (x_lo - x_hi);
  rep.B_fit = (phiB_hi * x_lo - phiB_lo * x_hi) / (x_lo - x_hi);
  rep.rel_err_A = std::fabs(rep.A_fit - rep.A_pred) / rep.A_pred;
  rep.rel_err_B = std::fabs(rep.B_fit - rep.B_pred) / rep.B_pred;
  return rep;
}

std::string report_to_json(const AsymptoticsReport& rep) {
  nlohmann::ordered_json j;
  j["nu_u"] = rep.nu_u;
  j["nu_v"] = rep.nu_v;
  j["A_pred"] = rep.A_pred;
  j["B_pred"] = rep.B_pred;
  j["A_fit"] = rep.A_fit;
  j["B_fit"] = rep.B_fit;
  j["rel_err_A"] = rep.rel_err_A;
  j["rel_err_B"] = rep.rel_err_B;
  j["r_window"] = {{"r_lo", rep.r_lo}, {"r_hi", rep.r_hi}};
  j["extrapolation"] = rep.extrapolation;
  return j.dump();
}

SingleEquationResult single_equation_mode(int N, double p, double m, double q,
                                          double a,
                                          const IntegrateConfig& config) {
  if (!(m > 0) || !(q > 0) || !(p > 1))
    throw Error(ErrorCode::DomainViolation, "need m, q > 0 and p > 1");
  if (m + q == p - 1)
    throw Error(ErrorCode::DeltaZero, "m + q = p - 1 is excluded");
  if (!(q < p - 1) || !(m < p - q - 1))
    throw Error(ErrorCode::NoSolutionRegime,
                "existence requires 0 < q < p-1 and m < p-q-1");

  SingleEquationResult res;
  res.embedded = validate(N, p, m, q, /*alpha=*/q, /*beta=*/m);
  const DerivedConstants der = derive(res.embedded);
  res.exponent = der.nu_u;  // equals (p-q)/(p-1-m-q)

  res.trajectory = integrate(res.embedded, a, a, config);
  if (res.trajectory.stop != StopReason::ReachedRMax)
    throw Error(ErrorCode::RegimeMismatch,
                std::string("embedded run stopped early: ") +
                    stop_reason_name(res.trajectory.stop));

  double worst = 0;
  for (const RadialState& s : res.trajectory.samples)
    worst = std::fmax(worst, std::fabs(s.u - s.v) / s.u);
  res.max_uv_reldiff = worst;
  if (!(worst < 1e-8))
    throw Error(ErrorCode::NoConvergence,
                "embedded trajectory lost the u = v identity");

  const Equilibrium eq = equilibrium(res.embedded);
  res.C_pred = eq.A;
  res.report = verify_growth(res.trajectory, eq, res.embedded);
  const RadialState& last = res.trajectory.samples.back();
  res.ratio_at_rmax = last.u * std::pow(last.r, -res.exponent);
  return res;
}

}  // namespace qlrad
