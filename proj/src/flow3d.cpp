#include "qlrad/flow3d.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "qlrad/dopri5.hpp"
#include "qlrad/format.hpp"

namespace qlrad {

namespace {

struct FlowCtx {
  double N, p, m, q, alpha, beta;
  double c1;  // (p-N)/(p-1)
  double c2;  // (N(p-1)-(N-1)alpha)/(p-1)
  double c3;  // (N(p-1)-q(N-1))/(p-1)
  double k;   // (p-1-alpha)/(p-1)
  double ip1; // 1/(p-1)
};

FlowCtx make_ctx(const SystemParams& P) {
  FlowCtx c;
  c.N = P.N;
  c.p = P.p;
  c.m = P.m;
  c.q = P.q;
  c.alpha = P.alpha;
  c.beta = P.beta;
  c.c1 = (P.p - P.N) / (P.p - 1);
  c.c2 = (P.N * (P.p - 1) - (P.N - 1) * P.alpha) / (P.p - 1);
  c.c3 = (P.N * (P.p - 1) - P.q * (P.N - 1)) / (P.p - 1);
  c.k = (P.p - 1 - P.alpha) / (P.p - 1);
  c.ip1 = 1 / (P.p - 1);
  return c;
}

std::array<double, 3> field_raw(const FlowCtx& c, double Y, double Z,
                                double W) {
  return {Y * (c.c1 - Y + c.ip1 * W), Z * (c.c2 - c.k * Z + c.m * Y),
          W * (c.c3 + c.beta * Y + c.q * c.ip1 * Z - W)};
}

// Extended field with the companion X equation in slot 0.
StateVec<4> field_x(const FlowCtx& c, const StateVec<4>& y) {
  const double X = y[0], Y = y[1], Z = y[2], W = y[3];
  const auto g = field_raw(c, Y, Z, W);
  return {X * (c.c1 - X + c.ip1 * Z), g[0], g[1], g[2]};
}

}  // namespace

const char* flow_outcome_name(FlowOutcome o) {
  switch (o) {
    case FlowOutcome::Converged: return "Converged";
    case FlowOutcome::NonConvergent: return "NonConvergent";
    case FlowOutcome::Divergent: return "Divergent";
    case FlowOutcome::StepUnderflow: return "StepUnderflow";
  }
  return "Unknown";
}

std::array<double, 3> flow_field(const SystemParams& params,
                                 const FlowPoint& pt) {
  const FlowCtx c = make_ctx(params);
  return field_raw(c, pt.Y, pt.Z, pt.W);
}

std::array<std::array<double, 3>, 3> flow_jacobian(const SystemParams& params,
                                                   const FlowPoint& pt) {
  const FlowCtx c = make_ctx(params);
  const double Y = pt.Y, Z = pt.Z, W = pt.W;
  return {{{c.c1 - 2 * Y + c.ip1 * W, 0.0, c.ip1 * Y},
           {c.m * Z, c.c2 - 2 * c.k * Z + c.m * Y, 0.0},
           {c.beta * W, c.q * c.ip1 * W,
            c.c3 + c.beta * Y + c.q * c.ip1 * Z - 2 * W}}};
}

StabilityReport stability(const SystemParams& params) {
  const DerivedConstants der = derive(params);
  if (der.degenerate_alpha)
    throw Error(ErrorCode::DegenerateAlpha, "stability requires alpha < p-1");
  if (!(der.delta > 0))
    throw Error(ErrorCode::DeltaNotPositive, "stability requires delta > 0");

  const double p = params.p, m = params.m, q = params.q;
  const double alpha = params.alpha, beta = params.beta, N = params.N;
  const double k = (p - 1 - alpha) / (p - 1);
  const double Y = (p * (p - 1 - alpha) + q) / der.delta;
  const double Z = m * (p - 1) / (p - 1 - alpha) * Y + N + alpha / (p - 1 - alpha);
  const double W = (p - 1) * Y + N - p;

  StabilityReport rep;
  rep.char_poly.a = Y + k * Z + W;
  rep.char_poly.b = k * Y * Z + (p - 1 - beta) / (p - 1) * Y * W + k * Z * W;
  rep.char_poly.c = der.delta / ((p - 1) * (p - 1)) * Y * Z * W;
  rep.stable = rep.char_poly.a > 0 && rep.char_poly.c > 0 &&
               rep.char_poly.a * rep.char_poly.b > rep.char_poly.c;

  Eigen::Matrix3d M;
  M << -Y, 0, Y / (p - 1),
       m * Z, -k * Z, 0,
       beta * W, q / (p - 1) * W, -W;
  Eigen::EigenSolver<Eigen::Matrix3d> es(M, /*computeEigenvectors=*/false);
  for (int i = 0; i < 3; ++i) rep.eigen_real_parts[i] = es.eigenvalues()[i].real();
  std::sort(rep.eigen_real_parts.begin(), rep.eigen_real_parts.end());
  return rep;
}

Equilibrium equilibrium(const SystemParams& params) {
  const DerivedConstants der = derive(params);
  if (der.degenerate_alpha)
    throw Error(ErrorCode::DegenerateAlpha, "equilibrium requires alpha < p-1");
  if (!(der.delta > 0))
    throw Error(ErrorCode::DeltaNotPositive, "equilibrium requires delta > 0");

  const double p = params.p, m = params.m, q = params.q;
  const double alpha = params.alpha, beta = params.beta, N = params.N;
  const double D = p - 1 - alpha;
  const double delta = der.delta;

  Equilibrium eq;
  eq.Y_inf = (p * D + q) / delta;
  eq.Z_inf = m * (p - 1) / D * eq.Y_inf + N + alpha / D;
  eq.W_inf = (p - 1) * eq.Y_inf + N - p;
  eq.X_inf = eq.Z_inf / (p - 1) + (p - N) / (p - 1);

  eq.A = 1 / (std::pow(eq.Y_inf, m * (p - 1) / delta) *
              std::pow(eq.Z_inf, (p - 1 - beta) / delta) *
              std::pow(eq.W_inf, m / delta) * eq.X_inf);
  eq.B = 1 / (std::pow(eq.Y_inf, (p - 1) * D / delta) *
              std::pow(eq.Z_inf, q / delta) * std::pow(eq.W_inf, D / delta));

  const double Zb = N + alpha / D;
  eq.P1 = FlowPoint{0, Zb, 0};
  eq.P2 = FlowPoint{0, Zb, N + q / D};
  eq.P_star = FlowPoint{0, Zb, static_cast<double>(N)};
  if (p >= N)
    eq.P3 = FlowPoint{(p - N) / (p - 1), N + (alpha + m * (p - N)) / D, 0};

  const StabilityReport st = stability(params);
  eq.char_poly = st.char_poly;
  eq.stable = st.stable;
  eq.eigen_real_parts = st.eigen_real_parts;
  return eq;
}

StructureReport structure_checks(const SystemParams& params,
                                 const FlowPoint& lo, const FlowPoint& hi,
                                 int points_per_axis) {
  const int n = std::max(2, points_per_axis);
  StructureReport rep{true, true};
  auto coord = [n](double a, double b, int i) {
    return a + (b - a) * static_cast<double>(i) / (n - 1);
  };
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l) {
        const FlowPoint pt{coord(lo.Y, hi.Y, i), coord(lo.Z, hi.Z, j),
                           coord(lo.W, hi.W, l)};
        const auto J = flow_jacobian(params, pt);
        bool adj[3][3] = {};
        for (int r = 0; r < 3; ++r)
          for (int c = 0; c < 3; ++c) {
            if (r == c) continue;
            if (J[r][c] < 0) rep.cooperative = false;
            adj[r][c] = J[r][c] != 0;
          }
        // strong connectivity of the dependency digraph (transitive closure)
        bool reach[3][3];
        for (int r = 0; r < 3; ++r)
          for (int c = 0; c < 3; ++c) reach[r][c] = (r == c) || adj[c][r];
        for (int kk = 0; kk < 3; ++kk)
          for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c)
              reach[r][c] = reach[r][c] || (reach[r][kk] && reach[kk][c]);
        for (int r = 0; r < 3; ++r)
          for (int c = 0; c < 3; ++c)
            if (!reach[r][c]) rep.irreducible = false;
      }
  return rep;
}

FlowTrajectory integrate_flow(const SystemParams& params,
                              const FlowPoint& start,
                              const FlowIntegrateConfig& cfg,
                              std::optional<double> x0) {
  if (!(start.Y >= 0) || !(start.Z >= 0) || !(start.W >= 0))
    throw Error(ErrorCode::DomainViolation,
                "flow start must lie in the closed positive octant");
  const FlowCtx c = make_ctx(params);
  const double X0 =
      x0 ? *x0 : std::fmax(0.0, c.c1 + c.ip1 * start.Z);  // slaved default

  FlowTrajectory traj;
  StateVec<4> y{X0, start.Y, start.Z, start.W};
  double t = 0;
  traj.samples.push_back({t, y[0], y[1], y[2], y[3]});

  auto f = [&](double, const StateVec<4>& yy) { return field_x(c, yy); };
  double h = 0.5 * cfg.max_dt;
  bool stopped = false;
  while (t < cfg.t_max && !stopped) {
    h = std::fmin(h, cfg.max_dt);
    bool last = false;
    if (t + h >= cfg.t_max) {
      h = cfg.t_max - t;
      last = true;
    }
    if (h < 1e-14 * std::fmax(1.0, t)) {
      traj.outcome = FlowOutcome::StepUnderflow;
      return traj;
    }
    StateVec<4> ynew;
    const double err = dopri5_try_step(f, t, y, h, cfg.rtol, cfg.atol, ynew);
    const bool accepted = std::isfinite(err) && err <= 1.0;
    if (!accepted) {
      h *= (std::isfinite(err) && err > 1.0)
               ? std::fmax(0.2, 0.9 * std::pow(err, -0.2))
               : 0.3;
      if (h < 1e-14 * std::fmax(1.0, t)) {
        traj.outcome = FlowOutcome::StepUnderflow;
        return traj;
      }
      continue;
    }
    t = last ? cfg.t_max : t + h;
    y = ynew;
    traj.samples.push_back({t, y[0], y[1], y[2], y[3]});
    if (std::fmax(std::fmax(y[1], y[2]), y[3]) > cfg.divergence_cap) {
      traj.outcome = FlowOutcome::Divergent;
      return traj;
    }
    h = dopri5_next_h(h, err);
    if (last) break;
  }

  // Cauchy criterion over the final 10% of the window
  const FlowSample& fin = traj.samples.back();
  const double t_win = 0.9 * cfg.t_max;
  double worst = 0;
  for (const FlowSample& s : traj.samples) {
    if (s.t < t_win) continue;
    worst = std::fmax(worst, std::fabs(s.Y - fin.Y));
    worst = std::fmax(worst, std::fabs(s.Z - fin.Z));
    worst = std::fmax(worst, std::fabs(s.W - fin.W));
  }
  if (worst <= cfg.omega_tol) {
    traj.outcome = FlowOutcome::Converged;
    traj.omega = FlowPoint{fin.Y, fin.Z, fin.W};
  } else {
    traj.outcome = FlowOutcome::NonConvergent;
  }
  return traj;
}

FlowPoint flow_at(const SystemParams& params, const FlowTrajectory& traj,
                  double t) {
  const auto& smp = traj.samples;
  if (smp.empty() || t < smp.front().t || t > smp.back().t)
    throw Error(ErrorCode::DomainViolation, "t outside the sampled range");
  auto it = std::lower_bound(
      smp.begin(), smp.end(), t,
      [](const FlowSample& s, double tt) { return s.t < tt; });
  if (it == smp.begin() || it->t == t) return FlowPoint{it->Y, it->Z, it->W};
  const FlowSample& s1 = *it;
  const FlowSample& s0 = *(it - 1);
  const auto g0 = flow_field(params, {s0.Y, s0.Z, s0.W});
  const auto g1 = flow_field(params, {s1.Y, s1.Z, s1.W});
  const double h = s1.t - s0.t;
  const double u = (t - s0.t) / h;
  const double u2 = u * u, u3 = u2 * u;
  const double h00 = 2 * u3 - 3 * u2 + 1, h10 = u3 - 2 * u2 + u;
  const double h01 = -2 * u3 + 3 * u2, h11 = u3 - u2;
  auto hermite = [&](double y0, double d0, double y1, double d1) {
    return h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1;
  };
  return FlowPoint{hermite(s0.Y, g0[0], s1.Y, g1[0]),
                   hermite(s0.Z, g0[1], s1.Z, g1[1]),
                   hermite(s0.W, g0[2], s1.W, g1[2])};
}

ExtractedFlow extract_flow_coordinates(const RadialTrajectory& traj) {
  const SystemParams& P = traj.params;
  const double D = P.p - 1 - P.alpha;
  const FlowCtx c = make_ctx(P);

  ExtractedFlow out;
  out.samples.reserve(traj.samples.size());
  for (const RadialState& s : traj.samples) {
    const double up = std::pow(s.z, 1 / D);
    FlowSample fs;
    fs.t = std::log(s.r);
    fs.X = s.r * up / s.u;
    fs.Y = s.r * std::pow(s.s, 1 / (P.p - 1)) / s.v;
    fs.Z = s.r * std::pow(s.v, P.m) / s.z;
    fs.W = s.r * std::pow(s.v, P.beta) * std::pow(s.z, P.q / D) / s.s;
    out.samples.push_back(fs);
  }

  // centered-difference residual against the autonomous field, skipping a
  // margin at both ends
  const std::size_t n = out.samples.size();
  if (n < 8) return out;
  const std::size_t margin = std::max<std::size_t>(2, n / 20);
  for (std::size_t i = margin; i + margin < n; ++i) {
    const FlowSample& sm = out.samples[i - 1];
    const FlowSample& s0 = out.samples[i];
    const FlowSample& sp = out.samples[i + 1];
    const double h1 = s0.t - sm.t, h2 = sp.t - s0.t;
    auto fd = [&](double ym, double y0, double yp) {
      return -h2 / (h1 * (h1 + h2)) * ym + (h2 - h1) / (h1 * h2) * y0 +
             h1 / (h2 * (h1 + h2)) * yp;
    };
    const auto g = field_raw(c, s0.Y, s0.Z, s0.W);
    const double gx = s0.X * (c.c1 - s0.X + c.ip1 * s0.Z);
    const double d[4] = {fd(sm.X, s0.X, sp.X) - gx,
                         fd(sm.Y, s0.Y, sp.Y) - g[0],
                         fd(sm.Z, s0.Z, sp.Z) - g[1],
                         fd(sm.W, s0.W, sp.W) - g[2]};
    const double gscale =
        std::fmax(std::fmax(std::fabs(gx), std::fabs(g[0])),
                  std::fmax(std::fabs(g[1]), std::fabs(g[2])));
    const double zscale = std::fmax(std::fmax(s0.X, s0.Y), std::fmax(s0.Z, s0.W));
    const double denom = gscale + 1e-14 * (1 + zscale);
    for (double dc : d)
      out.max_residual = std::fmax(out.max_residual, std::fabs(dc) / denom);
  }
  return out;
}

void write_flow_csv(const std::vector<FlowSample>& samples, std::ostream& os) {
  os << "t,X,Y,Z,W\n";
  for (const FlowSample& s : samples)
    os << fmt_g17(s.t) << ',' << fmt_g17(s.X) << ',' << fmt_g17(s.Y) << ','
       << fmt_g17(s.Z) << ',' << fmt_g17(s.W) << '\n';
}

}  // namespace qlrad
