#include "qlrad/radial_ode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "qlrad/dopri5.hpp"
#include "qlrad/format.hpp"

namespace qlrad {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct RhsCtx {
  double N, p, m, q, alpha, beta;
  double D;      // p-1-alpha
  double gamma;  // (N-1) D / (p-1)
  double cD;     // D / (p-1)
  double Q;      // q / D
  double invD;
  double invP1;  // 1/(p-1)
};

RhsCtx make_ctx(const SystemParams& P) {
  RhsCtx c;
  c.N = P.N;
  c.p = P.p;
  c.m = P.m;
  c.q = P.q;
  c.alpha = P.alpha;
  c.beta = P.beta;
  c.D = P.p - 1 - P.alpha;
  c.gamma = (P.N - 1) * c.D / (P.p - 1);
  c.cD = c.D / (P.p - 1);
  c.Q = P.q / c.D;
  c.invD = 1 / c.D;
  c.invP1 = 1 / (P.p - 1);
  return c;
}

// Non-throwing right-hand side in the radius variable; NaN outside the
// positive cone so a trial step gets rejected instead of aborting.
StateVec<4> rhs_raw(const RhsCtx& c, double r, const StateVec<4>& y) {
  const double z = y[1], v = y[2], s = y[3];
  if (!(r > 0) || !(v > 0) || !(z >= 0) || !(s >= 0))
    return {kNaN, kNaN, kNaN, kNaN};
  StateVec<4> f;
  f[0] = std::pow(z, c.invD);
  f[1] = c.cD * std::pow(v, c.m) - c.gamma * z / r;
  f[2] = std::pow(s, c.invP1);
  f[3] = std::pow(v, c.beta) * std::pow(z, c.Q) - (c.N - 1) * s / r;
  return f;
}

std::optional<MonitorEvent> check_monitors(const RhsCtx& c,
                                           const RadialState& st,
                                           double slack) {
  const double r = st.r, z = st.z, v = st.v, s = st.s;
  const double vm = std::pow(v, c.m);
  const double gq = std::pow(v, c.beta) * std::pow(z, c.Q);
  const double zp = c.cD * vm - c.gamma * z / r;
  const double sp = gq - (c.N - 1) * s / r;
  if (!std::isfinite(vm) || !std::isfinite(gq))
    throw Error(ErrorCode::Overflow, "right-hand side exceeded double range");

  auto event = [&](const char* bound, double rel) {
    return MonitorEvent{r, bound, rel};
  };
  // (l01)
  {
    const double lhs = (c.N + c.alpha / c.D) * z;
    const double rhs = r * vm;
    if (lhs > rhs * (1 + slack)) return event("l01", (lhs - rhs) / rhs);
  }
  // (l02)
  {
    const double lhs = c.N * s;
    const double rhs = r * gq;
    if (lhs > rhs * (1 + slack)) return event("l02", (lhs - rhs) / rhs);
  }
  // (l1)
  {
    const double lb = c.D / (c.N * c.D + c.alpha) * vm;
    const double ub = c.cD * vm;
    if (zp < lb * (1 - slack)) return event("l1.lower", (lb - zp) / lb);
    if (zp > ub * (1 + slack)) return event("l1.upper", (zp - ub) / ub);
  }
  // (l2)
  {
    const double lb = gq / c.N;
    if (sp < lb * (1 - slack)) return event("l2.lower", (lb - sp) / lb);
    if (sp > gq * (1 + slack)) return event("l2.upper", (sp - gq) / gq);
  }
  return std::nullopt;
}

}  // namespace

namespace {

// Linear fit of z^{1-sigma}/(sigma-1) against r over the final decade of
// samples plus the rate fit of log u' against log(R_est - r).
BlowupFit fit_blowup_tail(const std::vector<RadialState>& smp,
                          const SystemParams& params, double sm1) {
  if (smp.size() < 8)
    throw Error(ErrorCode::InsufficientSamples, "too few samples for the fit");

  auto yfun = [&](const RadialState& s) { return std::pow(s.z, -sm1) / sm1; };
  const double y_last = yfun(smp.back());

  std::size_t begin = smp.size();
  while (begin > 0 && yfun(smp[begin - 1]) <= 10 * y_last) --begin;
  if (smp.size() - begin < 8)
    begin = smp.size() - std::min<std::size_t>(20, smp.size());
  const std::size_t n = smp.size() - begin;
  if (n < 4)
    throw Error(ErrorCode::InsufficientSamples, "blow-up window too short");

  double r_mean = 0, y_mean = 0;
  for (std::size_t i = begin; i < smp.size(); ++i) {
    r_mean += smp[i].r;
    y_mean += yfun(smp[i]);
  }
  r_mean /= n;
  y_mean /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = begin; i < smp.size(); ++i) {
    const double dx = smp[i].r - r_mean;
    const double dy = yfun(smp[i]) - y_mean;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  const double slope = sxy / sxx;
  if (!(slope < 0))
    throw Error(ErrorCode::InsufficientSamples,
                "z^{1-sigma} not decreasing over the fit window");
  BlowupFit fit;
  fit.R_est = r_mean - y_mean / slope;
  double ss_res = 0;
  for (std::size_t i = begin; i < smp.size(); ++i) {
    const double pred = y_mean + slope * (smp[i].r - r_mean);
    const double res = yfun(smp[i]) - pred;
    ss_res += res * res;
  }
  fit.fit_quality = 1 - ss_res / syy;

  const double invD = 1 / (params.p - 1 - params.alpha);
  double lx_mean = 0, ly_mean = 0;
  std::size_t cnt = 0;
  for (std::size_t i = begin; i < smp.size(); ++i) {
    if (!(fit.R_est > smp[i].r)) continue;
    lx_mean += std::log(fit.R_est - smp[i].r);
    ly_mean += invD * std::log(smp[i].z);
    ++cnt;
  }
  if (cnt < 4)
    throw Error(ErrorCode::InsufficientSamples, "rate-fit window too short");
  lx_mean /= cnt;
  ly_mean /= cnt;
  double lxx = 0, lxy = 0;
  for (std::size_t i = begin; i < smp.size(); ++i) {
    if (!(fit.R_est > smp[i].r)) continue;
    const double dx = std::log(fit.R_est - smp[i].r) - lx_mean;
    const double dy = invD * std::log(smp[i].z) - ly_mean;
    lxx += dx * dx;
    lxy += dx * dy;
  }
  fit.rate_exponent = lxy / lxx;
  return fit;
}

}  // namespace

const char* stop_reason_name(StopReason r) {
  switch (r) {
    case StopReason::ReachedRMax: return "ReachedRMax";
    case StopReason::BlowUp: return "BlowUp";
    case StopReason::StepUnderflow: return "StepUnderflow";
    case StopReason::MonitorViolation: return "MonitorViolation";
  }
  return "Unknown";
}

double radial_uprime(const SystemParams& params, const RadialState& st) {
  return std::pow(st.z, 1 / (params.p - 1 - params.alpha));
}

double radial_vprime(const SystemParams& params, const RadialState& st) {
  return std::pow(st.s, 1 / (params.p - 1));
}

std::array<double, 4> radial_rhs(const SystemParams& params,
                                 const RadialState& st) {
  if (!(st.r > 0) || !(st.u > 0) || !(st.v > 0) || !(st.z >= 0) ||
      !(st.s >= 0))
    throw Error(ErrorCode::NonPositiveState,
                "radial state outside the positive cone");
  const RhsCtx c = make_ctx(params);
  return rhs_raw(c, st.r, {st.u, st.z, st.v, st.s});
}

RadialState seed_near_origin(const SystemParams& params, double a, double b,
                             double r0) {
  const double p = params.p, alpha = params.alpha;
  const double D = p - 1 - alpha;
  if (!(D > 0))
    throw Error(ErrorCode::DegenerateAlpha, "seed requires alpha < p-1");
  if (!(a > 0) || !(b > 0) || !(r0 > 0))
    throw Error(ErrorCode::DomainViolation, "need a, b, r0 > 0");

  const double N = params.N, m = params.m, q = params.q, beta = params.beta;
  const double z0 = D * std::pow(b, m) * r0 / ((N - 1) * D + (p - 1));
  const double w0 = std::pow(z0, 1 / D);
  const double Q = q / D;
  const double s0 = std::pow(b, beta) * std::pow(w0, q) * r0 / (N + Q);
  const double vp0 = std::pow(s0, 1 / (p - 1));

  RadialState st;
  st.r = r0;
  st.z = z0;
  st.s = s0;
  // first-order increments of u and v over [0, r0]; u' ~ (c t)^{1/D} and
  // v' ~ (c' t)^{(1+Q)/(p-1)} integrate to these cell-exact values
  st.u = a + r0 * w0 * D / (D + 1);
  const double eta_v = (1 + Q) / (p - 1);
  st.v = b + r0 * vp0 / (1 + eta_v);
  return st;
}

RadialTrajectory integrate(const SystemParams& params, double a, double b,
                           const IntegrateConfig& cfg) {
  if (!(a > 0) || !(b > 0))
    throw Error(ErrorCode::DomainViolation, "need a > 0 and b > 0");
  if (!(cfg.r0 > 0) || !(cfg.r0 < 1) || !(cfg.r_max > cfg.r0))
    throw Error(ErrorCode::DomainViolation, "need 0 < r0 < 1 and r_max > r0");
  const DerivedConstants der = derive(params);
  if (der.degenerate_alpha)
    throw Error(ErrorCode::DegenerateAlpha,
                "alpha >= p-1: integration refused");

  const RhsCtx ctx = make_ctx(params);
  const bool cap_armed = der.sigma_minus_one > 0;

  RadialTrajectory traj;
  traj.params = params;
  traj.a = a;
  traj.b = b;

  const RadialState seed = seed_near_origin(params, a, b, cfg.r0);
  traj.samples.push_back(seed);
  StateVec<4> y{seed.u, seed.z, seed.v, seed.s};
  if (auto ev = check_monitors(ctx, seed, cfg.monitor_slack)) {
    traj.monitors.push_back(*ev);
    if (cfg.abort_on_monitor_violation) {
      traj.stop = StopReason::MonitorViolation;
      return traj;
    }
  }

  // When the step size collapses in a blow-up regime, the singularity may
  // sit beyond what max(v, z) can reach in double precision (v diverges like
  // (R-r)^{-theta} with small theta). The z^{1-sigma} envelope is linear in
  // r near R, so if it extrapolates to zero immediately ahead with high fit
  // quality, the stop is a resolved blow-up, not an integration failure.
  auto small_step_stop = [&]() {
    if (cap_armed && traj.samples.size() >= 12) {
      try {
        const BlowupFit fit =
            fit_blowup_tail(traj.samples, params, der.sigma_minus_one);
        const double r_last = traj.samples.back().r;
        if (fit.fit_quality > 0.99 && fit.R_est > r_last &&
            fit.R_est < r_last * (1 + 1e-3))
          return StopReason::BlowUp;
      } catch (const Error&) {
      }
    }
    return StopReason::StepUnderflow;
  };

  bool stopped = false;
  for (int phase = 0; phase < 2 && !stopped; ++phase) {
    const bool logphase = (phase == 1);
    double x, x_end;
    if (!logphase) {
      x = cfg.r0;
      x_end = std::min(1.0, cfg.r_max);
    } else {
      if (cfg.r_max <= 1.0) break;
      x = 0.0;  // tau = ln r
      x_end = std::log(cfg.r_max);
    }
    if (x >= x_end) continue;

    auto f = [&](double xx, const StateVec<4>& yy) {
      if (!logphase) return rhs_raw(ctx, xx, yy);
      const double r = std::exp(xx);
      StateVec<4> g = rhs_raw(ctx, r, yy);
      for (double& gi : g) gi *= r;
      return g;
    };
    auto h_floor = [&](double xx) {
      return 1e-14 * (logphase ? std::fmax(1.0, std::fabs(xx)) : xx);
    };

    double h = 0.5 * (logphase ? cfg.max_dlnr : cfg.max_dlnr * x);
    while (x < x_end) {
      const double hmax = logphase ? cfg.max_dlnr : cfg.max_dlnr * x;
      h = std::fmin(h, hmax);
      bool last = false;
      if (x + h >= x_end) {
        h = x_end - x;
        last = true;
      }
      if (h < h_floor(x)) {
        traj.stop = small_step_stop();
        stopped = true;
        break;
      }

      StateVec<4> ynew;
      const double err = dopri5_try_step(f, x, y, h, cfg.rtol, cfg.atol, ynew);
      const bool accepted = std::isfinite(err) && err <= 1.0 && ynew[0] > 0 &&
                            ynew[1] > 0 && ynew[2] > 0 && ynew[3] > 0;
      if (!accepted) {
        h *= (std::isfinite(err) && err > 1.0)
                 ? std::fmax(0.2, 0.9 * std::pow(err, -0.2))
                 : 0.3;
        if (h < h_floor(x)) {
          traj.stop = small_step_stop();
          stopped = true;
          break;
        }
        continue;
      }

      x = last ? x_end : x + h;
      y = ynew;
      // pin the final radius so r_max is exactly attained despite exp/log
      // round-off
      const double r_now = last && logphase ? cfg.r_max
                           : logphase       ? std::exp(x)
                                            : x;
      const RadialState cur{r_now, y[0], y[1], y[2], y[3]};
      if (!(std::fmax(std::fmax(cur.u, cur.v), std::fmax(cur.z, cur.s)) <
            1e305))
        throw Error(ErrorCode::Overflow,
                    "state exceeded double range; reduce r_max");
      traj.samples.push_back(cur);

      if (auto ev = check_monitors(ctx, cur, cfg.monitor_slack)) {
        traj.monitors.push_back(*ev);
        if (cfg.abort_on_monitor_violation) {
          traj.stop = StopReason::MonitorViolation;
          stopped = true;
          break;
        }
      }
      if (cap_armed && std::fmax(cur.v, cur.z) >= cfg.blowup_cap) {
        traj.stop = StopReason::BlowUp;
        stopped = true;
        break;
      }
      h = dopri5_next_h(h, err);
      if (last) break;
    }
  }

  if (traj.stop == StopReason::BlowUp)
    traj.R_est = estimate_blowup(traj, der).R_est;
  return traj;
}

BlowupFit estimate_blowup(const RadialTrajectory& traj,
                          const DerivedConstants& derived) {
  if (traj.stop != StopReason::BlowUp)
    throw Error(ErrorCode::RegimeMismatch,
                "estimate_blowup requires a blow-up trajectory");
  if (!(derived.sigma_minus_one > 0))
    throw Error(ErrorCode::RegimeMismatch, "estimate_blowup requires sigma > 1");
  return fit_blowup_tail(traj.samples, traj.params, derived.sigma_minus_one);
}

RadialTrajectory scale_solution(const RadialTrajectory& traj, double lambda) {
  if (!(lambda > 0))
    throw Error(ErrorCode::DomainViolation, "lambda must be positive");
  const SystemParams& P = traj.params;
  const DerivedConstants der = derive(P);
  const double lu = std::pow(lambda, der.nu_u);
  const double lv = std::pow(lambda, der.nu_v);
  const double lz = std::pow(lambda, (der.nu_u - 1) * (P.p - 1 - P.alpha));
  const double ls = std::pow(lambda, (der.nu_v - 1) * (P.p - 1));

  RadialTrajectory out;
  out.params = P;
  out.a = traj.a * lu;
  out.b = traj.b * lv;
  out.stop = traj.stop;
  if (traj.R_est) out.R_est = *traj.R_est * lambda;
  out.samples.reserve(traj.samples.size());
  for (const RadialState& s : traj.samples)
    out.samples.push_back(
        {s.r * lambda, s.u * lu, s.z * lz, s.v * lv, s.s * ls});
  out.monitors = traj.monitors;
  for (MonitorEvent& ev : out.monitors) ev.r *= lambda;
  return out;
}

double rhs_defect(const RadialTrajectory& traj) {
  const RhsCtx ctx = make_ctx(traj.params);
  auto f = [&](double r, const StateVec<4>& yy) { return rhs_raw(ctx, r, yy); };
  double worst = 0;
  for (std::size_t i = 0; i + 1 < traj.samples.size(); ++i) {
    const RadialState& s0 = traj.samples[i];
    const RadialState& s1 = traj.samples[i + 1];
    const StateVec<4> y0{s0.u, s0.z, s0.v, s0.s};
    StateVec<4> out;
    dopri5_try_step(f, s0.r, y0, s1.r - s0.r, 1e-10, 1e-14, out);
    const StateVec<4> ref{s1.u, s1.z, s1.v, s1.s};
    for (int c = 0; c < 4; ++c) {
      const double d = std::fabs(out[c] - ref[c]) / (1e-12 + std::fabs(ref[c]));
      worst = std::fmax(worst, d);
    }
  }
  return worst;
}

RadialState state_at(const RadialTrajectory& traj, double r) {
  const auto& smp = traj.samples;
  if (smp.empty() || r < smp.front().r || r > smp.back().r)
    throw Error(ErrorCode::DomainViolation, "r outside the sampled range");
  auto it = std::lower_bound(
      smp.begin(), smp.end(), r,
      [](const RadialState& s, double rr) { return s.r < rr; });
  if (it == smp.begin()) return *it;
  const RadialState& s1 = *it;
  const RadialState& s0 = *(it - 1);
  if (s1.r == r) return s1;

  const RhsCtx ctx = make_ctx(traj.params);
  const StateVec<4> y0{s0.u, s0.z, s0.v, s0.s};
  const StateVec<4> y1{s1.u, s1.z, s1.v, s1.s};
  const StateVec<4> f0 = rhs_raw(ctx, s0.r, y0);
  const StateVec<4> f1 = rhs_raw(ctx, s1.r, y1);
  const double h = s1.r - s0.r;
  const double t = (r - s0.r) / h;
  const double t2 = t * t, t3 = t2 * t;
  const double h00 = 2 * t3 - 3 * t2 + 1;
  const double h10 = t3 - 2 * t2 + t;
  const double h01 = -2 * t3 + 3 * t2;
  const double h11 = t3 - t2;
  StateVec<4> y;
  for (int c = 0; c < 4; ++c)
    y[c] = h00 * y0[c] + h10 * h * f0[c] + h01 * y1[c] + h11 * h * f1[c];
  return RadialState{r, y[0], y[1], y[2], y[3]};
}

void write_trajectory_csv(const RadialTrajectory& traj, std::ostream& os) {
  os << "r,u,uprime,v,vprime,z,s\n";
  for (const RadialState& s : traj.samples) {
    os << fmt_g17(s.r) << ',' << fmt_g17(s.u) << ','
       << fmt_g17(radial_uprime(traj.params, s)) << ',' << fmt_g17(s.v) << ','
       << fmt_g17(radial_vprime(traj.params, s)) << ',' << fmt_g17(s.z) << ','
       << fmt_g17(s.s) << '\n';
  }
}

}  // namespace qlrad
