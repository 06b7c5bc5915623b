#include "qlrad/picard.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "qlrad/format.hpp"

namespace qlrad {

namespace {

// Cumulative integral of t^w g(t) with g piecewise linear on the nodes;
// exact per cell for any w > -1, which is what keeps full order at the
// singular endpoint t = 0. Power differences use expm1/log1p to avoid
// cancellation on narrow cells.
std::vector<double> cum_power_integral(const std::vector<double>& r,
                                       const std::vector<double>& g,
                                       double w) {
  const std::size_t n = r.size();
  std::vector<double> out(n, 0.0);
  double acc = 0;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double x0 = r[k], x1 = r[k + 1];
    const double h = x1 - x0;
    const double slope = (g[k + 1] - g[k]) / h;
    const double A = g[k] - x0 * slope;  // g(t) = A + slope * t on the cell
    double i1, i2;                       // int t^w dt, int t^{w+1} dt
    if (x0 == 0) {
      i1 = std::pow(x1, w + 1) / (w + 1);
      i2 = std::pow(x1, w + 2) / (w + 2);
    } else {
      const double lr = std::log1p(h / x0);
      i1 = std::pow(x0, w + 1) * std::expm1((w + 1) * lr) / (w + 1);
      i2 = std::pow(x0, w + 2) * std::expm1((w + 2) * lr) / (w + 2);
    }
    acc += A * i1 + slope * i2;
    out[k + 1] = acc;
  }
  return out;
}

void ensure_finite(const std::vector<double>& v, const char* what) {
  for (double x : v)
    if (!std::isfinite(x))
      throw Error(ErrorCode::QuadratureBreakdown,
                  std::string("non-finite values in ") + what);
}

}  // namespace

GridFunctionPair constant_pair(double a, double b, double rho,
                               std::size_t cells) {
  if (!(rho > 0) || cells < 8)
    throw Error(ErrorCode::DomainViolation, "need rho > 0 and >= 8 cells");
  GridFunctionPair p;
  p.rho = rho;
  p.r.resize(cells + 1);
  for (std::size_t k = 0; k <= cells; ++k)
    p.r[k] = rho * static_cast<double>(k) / static_cast<double>(cells);
  p.u.assign(cells + 1, a);
  p.v.assign(cells + 1, b);
  p.uprime.assign(cells + 1, 0.0);
  return p;
}

GridFunctionPair apply_T(const GridFunctionPair& pair,
                         const SystemParams& params, double a, double b) {
  const double p = params.p, m = params.m, q = params.q;
  const double alpha = params.alpha, beta = params.beta;
  const double N = params.N;
  const double D = p - 1 - alpha;
  if (!(D > 0))
    throw Error(ErrorCode::DegenerateAlpha, "apply_T requires alpha < p-1");
  const double gamma = (N - 1) * D / (p - 1);
  const double Q = q / D;
  const std::size_t n = pair.r.size();
  const auto& r = pair.r;

  // --- T1 ---
  std::vector<double> vm(n);
  for (std::size_t k = 0; k < n; ++k) vm[k] = std::pow(pair.v[k], m);
  ensure_finite(vm, "v^m");
  const std::vector<double> I1 = cum_power_integral(r, vm, gamma);

  // F1 = ((D/(p-1)) t^{-gamma} I1)^{1/D} behaves like t^{1/D} near zero;
  // integrate F1 = t^{1/D} G1 with the same weighted rule.
  std::vector<double> F1(n, 0.0), G1(n, 0.0);
  G1[0] = std::pow(D / (p - 1) * vm[0] / (gamma + 1), 1 / D);
  for (std::size_t k = 1; k < n; ++k) {
    const double core = D / (p - 1) * I1[k] * std::pow(r[k], -gamma);
    F1[k] = std::pow(core, 1 / D);
    G1[k] = F1[k] * std::pow(r[k], -1 / D);
  }
  ensure_finite(F1, "T1 integrand");
  const std::vector<double> Tu = cum_power_integral(r, G1, 1 / D);

  // --- T2 ---
  // inner integrand s^{N-1} v^beta |u'|^q ~ s^{N-1+q/D} near zero
  std::vector<double> G2(n, 0.0);
  for (std::size_t k = 1; k < n; ++k)
    G2[k] = std::pow(pair.v[k], beta) * std::pow(pair.uprime[k], q) *
            std::pow(r[k], -Q);
  G2[0] = n > 1 ? G2[1] : 0.0;
  ensure_finite(G2, "T2 inner integrand");
  const std::vector<double> I2 = cum_power_integral(r, G2, N - 1 + Q);

  const double eta_v = (1 + Q) / (p - 1);
  std::vector<double> G3(n, 0.0);
  G3[0] = std::pow(G2[0] / (N + Q), 1 / (p - 1));
  for (std::size_t k = 1; k < n; ++k) {
    const double core = I2[k] * std::pow(r[k], 1 - N);
    G3[k] = std::pow(core, 1 / (p - 1)) * std::pow(r[k], -eta_v);
  }
  ensure_finite(G3, "T2 integrand");
  const std::vector<double> Tv = cum_power_integral(r, G3, eta_v);

  GridFunctionPair out;
  out.rho = pair.rho;
  out.r = pair.r;
  out.u.resize(n);
  out.v.resize(n);
  out.uprime = F1;
  for (std::size_t k = 0; k < n; ++k) {
    out.u[k] = a + Tu[k];
    out.v[k] = b + Tv[k];
  }
  ensure_finite(out.u, "T1 output");
  ensure_finite(out.v, "T2 output");
  return out;
}

PicardResult solve_fixed_point(const SystemParams& params, double a, double b,
                               double rho, double tol, int max_iterations,
                               std::size_t cells) {
  if (!(a > 0) || !(b > 0))
    throw Error(ErrorCode::DomainViolation, "need a > 0 and b > 0");
  double rho_cur = rho;
  for (int halving = 0; halving <= 6; ++halving, rho_cur /= 2) {
    GridFunctionPair cur = constant_pair(a, b, rho_cur, cells);
    bool broke_down = false;
    for (int it = 1; it <= max_iterations; ++it) {
      GridFunctionPair next;
      try {
        next = apply_T(cur, params, a, b);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::QuadratureBreakdown) throw;
        broke_down = true;
        break;
      }
      double change = 0;
      for (std::size_t k = 0; k < cur.r.size(); ++k) {
        change = std::fmax(change, std::fabs(next.u[k] - cur.u[k]));
        change = std::fmax(change, std::fabs(next.v[k] - cur.v[k]));
        change = std::fmax(change, std::fabs(next.uprime[k] - cur.uprime[k]));
      }
      cur = std::move(next);
      if (change < tol) {
        PicardResult res;
        res.pair = std::move(cur);
        res.iterations = it;
        res.final_change = change;
        res.halvings = halving;
        return res;
      }
    }
    (void)broke_down;  // either way: halve rho and retry
  }
  throw Error(ErrorCode::NoConvergence,
              "Picard iteration did not converge at minimal rho");
}

double sup_distance_to_trajectory(const GridFunctionPair& pair,
                                  const RadialTrajectory& traj) {
  const double r_lo = traj.samples.front().r;
  const double r_hi = std::fmin(traj.samples.back().r, pair.rho);
  double sup = 0;
  for (std::size_t k = 0; k < pair.r.size(); ++k) {
    const double r = pair.r[k];
    if (r < r_lo || r > r_hi) continue;
    const RadialState st = state_at(traj, r);
    sup = std::fmax(sup, std::fabs(pair.u[k] - st.u));
    sup = std::fmax(sup, std::fabs(pair.v[k] - st.v));
  }
  return sup;
}

void write_picard_csv(const GridFunctionPair& pair, std::ostream& os) {
  os << "r,u,uprime,v\n";
  for (std::size_t k = 0; k < pair.r.size(); ++k)
    os << fmt_g17(pair.r[k]) << ',' << fmt_g17(pair.u[k]) << ','
       << fmt_g17(pair.uprime[k]) << ',' << fmt_g17(pair.v[k]) << '\n';
}

}  // namespace qlrad
