#include "qlrad/cli.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cctype>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "qlrad/asymptotics.hpp"
#include "qlrad/flow3d.hpp"
#include "qlrad/format.hpp"
#include "qlrad/params.hpp"
#include "qlrad/picard.hpp"
#include "qlrad/radial_ode.hpp"

namespace qlrad::cli {

namespace {

using nlohmann::ordered_json;

struct Opts {
  int N = 3;
  double p = 2, m = 1, q = 1, alpha = 0, beta = 0;
  double a = 1, b = 1;
  double r0 = 1e-6, rmax = 1e3;
  double rtol = 1e-10, atol = 1e-12, cap = 1e10;
  double max_dlnr = 0.002;
  std::string out_path;
  std::string svg_path = "figure1.svg";
  unsigned long long seed = 0;
  unsigned workers = 1;
  // flow
  double Y0 = -1, Z0 = -1, W0 = -1, X0 = -1;  // negative: use defaults
  double tmax = 100;
  // picard
  double rho = 0.1, pic_tol = 1e-10;
  std::size_t cells = 1024;
  // sweep specs
  std::string sw_N, sw_p, sw_m, sw_q, sw_alpha, sw_beta;
};

std::string envify(std::string name) {
  for (char& c : name) {
    c = std::toupper(static_cast<unsigned char>(c));
    if (c == '-') c = '_';
  }
  return "QLRAD_" + name;
}

CLI::Option* opt(CLI::App* cmd, const std::string& flag, auto& var,
                 const std::string& desc) {
  auto* o = cmd->add_option(flag, var, desc);
  o->envname(envify(flag.substr(2)));
  return o;
}

void add_param_opts(CLI::App* cmd, Opts& o) {
  opt(cmd, "--N", o.N, "space dimension (>= 2)");
  opt(cmd, "--p", o.p, "p-Laplacian exponent (> 1)");
  opt(cmd, "--m", o.m, "exponent of v in the first equation");
  opt(cmd, "--q", o.q, "exponent of |Du| in the second equation");
  opt(cmd, "--alpha", o.alpha, "exponent of |Du| in the first equation");
  opt(cmd, "--beta", o.beta, "exponent of v in the second equation");
}

CLI::Option* add_run_opts(CLI::App* cmd, Opts& o) {
  opt(cmd, "--a", o.a, "center value u(0)");
  opt(cmd, "--b", o.b, "center value v(0)");
  opt(cmd, "--r0", o.r0, "seam radius for the origin seed");
  auto* rmax = opt(cmd, "--rmax", o.rmax, "outer integration radius");
  opt(cmd, "--rtol", o.rtol, "relative tolerance");
  opt(cmd, "--atol", o.atol, "absolute tolerance");
  opt(cmd, "--cap", o.cap, "blow-up cap on max(v, z)");
  opt(cmd, "--max-dlnr", o.max_dlnr, "step cap in log-radius units");
  opt(cmd, "--seed", o.seed, "seed recorded for reproducibility");
  opt(cmd, "--workers", o.workers, "worker threads for sweeps");
  opt(cmd, "--out", o.out_path, "output file path");
  return rmax;
}

IntegrateConfig make_config(const Opts& o) {
  IntegrateConfig cfg;
  cfg.r0 = o.r0;
  cfg.r_max = o.rmax;
  cfg.rtol = o.rtol;
  cfg.atol = o.atol;
  cfg.blowup_cap = o.cap;
  cfg.max_dlnr = o.max_dlnr;
  return cfg;
}

SystemParams params_of(const Opts& o) {
  return validate(o.N, o.p, o.m, o.q, o.alpha, o.beta);
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::IoError, "cannot open for writing: " + path);
  f << content;
  if (!f) throw Error(ErrorCode::IoError, "write failed: " + path);
}

// ---- sweep ------------------------------------------------------------

std::vector<double> parse_sweep_spec(const std::string& spec, double fallback) {
  if (spec.empty()) return {fallback};
  std::vector<double> vals;
  if (spec.find(':') != std::string::npos) {
    double lo, hi;
    int count;
    char c1, c2;
    std::istringstream is(spec);
    if (!(is >> lo >> c1 >> hi >> c2 >> count) || c1 != ':' || c2 != ':' ||
        count < 1)
      throw Error(ErrorCode::DomainViolation,
                  "bad sweep range (want lo:hi:count): " + spec);
    if (count == 1) return {lo};
    for (int i = 0; i < count; ++i)
      vals.push_back(lo + (hi - lo) * i / (count - 1));
    return vals;
  }
  std::istringstream is(spec);
  std::string tok;
  while (std::getline(is, tok, ',')) {
    try {
      vals.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw Error(ErrorCode::DomainViolation, "bad sweep value: " + tok);
    }
  }
  if (vals.empty())
    throw Error(ErrorCode::DomainViolation, "empty sweep spec");
  return vals;
}

struct SweepPoint {
  int N;
  double p, m, q, alpha, beta;
};

std::string sweep_row(const SweepPoint& pt, const Opts& o) {
  std::ostringstream row;
  row << pt.N << ',' << fmt_g17(pt.p) << ',' << fmt_g17(pt.m) << ','
      << fmt_g17(pt.q) << ',' << fmt_g17(pt.alpha) << ',' << fmt_g17(pt.beta)
      << ',';
  const double delta_raw =
      (pt.p - 1 - pt.alpha) * (pt.p - 1 - pt.beta) - pt.q * pt.m;
  row << fmt_g17(delta_raw) << ',';

  SystemParams params;
  try {
    params = validate(pt.N, pt.p, pt.m, pt.q, pt.alpha, pt.beta);
  } catch (const Error& e) {
    const char* tag = e.code() == ErrorCode::DeltaZero
                          ? "InvalidDelta"
                          : error_code_name(e.code());
    row << ',' << tag << ",,,";
    return row.str();
  }

  const DerivedConstants der = derive(params);
  row << (der.degenerate_alpha ? std::string() : fmt_g17(der.sigma)) << ',';
  const Regime regime = classify(params);
  row << regime_tag_name(regime.tag) << ',';

  std::string r_est, a_pred, b_pred;
  if (regime.tag == RegimeTag::UFiniteVBlowup ||
      regime.tag == RegimeTag::BothBlowup) {
    try {
      const RadialTrajectory traj = integrate(params, o.a, o.b, make_config(o));
      if (traj.stop == StopReason::BlowUp && traj.R_est)
        r_est = fmt_g17(*traj.R_est);
    } catch (const Error&) {
      // leave the column empty; the row still records the classification
    }
  } else if (regime.tag == RegimeTag::AllBoundedGlobal) {
    const Equilibrium eq = equilibrium(params);
    a_pred = fmt_g17(eq.A);
    b_pred = fmt_g17(eq.B);
  }
  row << r_est << ',' << a_pred << ',' << b_pred;
  return row.str();
}

int cmd_sweep(const Opts& o, std::ostream& out) {
  const auto Ns = parse_sweep_spec(o.sw_N, o.N);
  const auto ps = parse_sweep_spec(o.sw_p, o.p);
  const auto ms = parse_sweep_spec(o.sw_m, o.m);
  const auto qs = parse_sweep_spec(o.sw_q, o.q);
  const auto als = parse_sweep_spec(o.sw_alpha, o.alpha);
  const auto bes = parse_sweep_spec(o.sw_beta, o.beta);

  std::vector<SweepPoint> grid;
  for (double N : Ns)
    for (double p : ps)
      for (double m : ms)
        for (double q : qs)
          for (double al : als)
            for (double be : bes)
              grid.push_back(
                  {static_cast<int>(std::lround(N)), p, m, q, al, be});

  std::vector<std::string> rows(grid.size());
  const unsigned workers = std::max(1u, o.workers);
  std::atomic<std::size_t> next{0};
  auto work = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= grid.size()) return;
      rows[i] = sweep_row(grid[i], o);
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }

  std::ostringstream csv;
  csv << "N,p,m,q,alpha,beta,delta,sigma,regime,R_est,A_pred,B_pred\n";
  for (const std::string& r : rows) csv << r << '\n';
  const std::string path = o.out_path.empty() ? "sweep.csv" : o.out_path;
  write_file(path, csv.str());
  ordered_json j;
  j["csv"] = path;
  j["rows"] = grid.size();
  j["seed"] = o.seed;
  j["workers"] = workers;
  out << j.dump() << "\n";
  return 0;
}

// ---- figure1 ----------------------------------------------------------

// Hand-rolled static SVG: two panels of line plots, no external tooling.
void write_figure_svg(const std::vector<double>& rgrid,
                      const std::array<std::vector<double>, 4>& ucurves,
                      const std::array<std::vector<double>, 4>& vcurves,
                      const std::array<int, 4>& Ns, std::ostream& os) {
  const double W = 1040, H = 430;
  const double panel_w = 420, panel_h = 330, top = 40, left0 = 60, gap = 100;
  const char* colors[4] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};

  auto nice_ceil = [](double x) {
    const double mag = std::pow(10, std::floor(std::log10(x)));
    for (double f : {1.0, 2.0, 2.5, 5.0, 10.0})
      if (x <= f * mag) return f * mag;
    return 10 * mag;
  };

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
     << "\" height=\"" << H << "\" viewBox=\"0 0 " << W << " " << H << "\">\n"
     << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";

  const double rmax = rgrid.back();
  for (int panel = 0; panel < 2; ++panel) {
    const auto& curves = panel == 0 ? ucurves : vcurves;
    const double left = left0 + panel * (panel_w + gap);
    double ymax = 0;
    for (const auto& c : curves)
      for (double y : c) ymax = std::fmax(ymax, y);
    ymax = nice_ceil(ymax * 1.02);

    auto px = [&](double r) { return left + r / rmax * panel_w; };
    auto py = [&](double y) { return top + panel_h - y / ymax * panel_h; };

    os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << panel_w
       << "\" height=\"" << panel_h
       << "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n";
    for (int tick = 0; tick <= 5; ++tick) {
      const double r = rmax * tick / 5;
      const double y = ymax * tick / 5;
      os << "<line x1=\"" << px(r) << "\" y1=\"" << top + panel_h << "\" x2=\""
         << px(r) << "\" y2=\"" << top + panel_h + 5
         << "\" stroke=\"black\"/>\n"
         << "<text x=\"" << px(r) << "\" y=\"" << top + panel_h + 18
         << "\" font-size=\"11\" text-anchor=\"middle\">" << r << "</text>\n"
         << "<line x1=\"" << left - 5 << "\" y1=\"" << py(y) << "\" x2=\""
         << left << "\" y2=\"" << py(y) << "\" stroke=\"black\"/>\n"
         << "<text x=\"" << left - 8 << "\" y=\"" << py(y) + 4
         << "\" font-size=\"11\" text-anchor=\"end\">" << y << "</text>\n";
    }
    os << "<text x=\"" << left + panel_w / 2 << "\" y=\"" << top + panel_h + 34
       << "\" font-size=\"13\" text-anchor=\"middle\">r</text>\n"
       << "<text x=\"" << left + 8 << "\" y=\"" << top - 10
       << "\" font-size=\"13\">" << (panel == 0 ? "u(r)" : "v(r)")
       << "</text>\n";

    for (int c = 0; c < 4; ++c) {
      os << "<polyline fill=\"none\" stroke=\"" << colors[c]
         << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t k = 0; k < rgrid.size(); ++k) {
        char buf[48];
        std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px(rgrid[k]),
                      py(curves[c][k]));
        os << buf;
      }
      os << "\"/>\n";
      os << "<text x=\"" << left + 12 << "\" y=\"" << top + 18 + 16 * c
         << "\" font-size=\"12\" fill=\"" << colors[c] << "\">N = " << Ns[c]
         << "</text>\n";
    }
  }
  os << "</svg>\n";
}

int cmd_figure1(const Opts& o, std::ostream& out) {
  const std::array<int, 4> Ns{3, 10, 30, 60};
  const double rmax = 500;
  std::vector<double> rgrid;
  for (int k = 0; k <= 1000; ++k) rgrid.push_back(rmax * k / 1000.0);

  std::array<std::vector<double>, 4> ucurves, vcurves;
  for (int c = 0; c < 4; ++c) {
    const SystemParams params = validate(Ns[c], 10, 2, 4, 1, 1);
    IntegrateConfig cfg = make_config(o);
    cfg.r_max = rmax;
    const RadialTrajectory traj = integrate(params, 1, 1, cfg);
    if (traj.stop != StopReason::ReachedRMax)
      throw Error(ErrorCode::RegimeMismatch,
                  std::string("figure1 run stopped early: ") +
                      stop_reason_name(traj.stop));
    ucurves[c].reserve(rgrid.size());
    vcurves[c].reserve(rgrid.size());
    for (double r : rgrid) {
      if (r < traj.samples.front().r) {
        ucurves[c].push_back(1);
        vcurves[c].push_back(1);
      } else {
        const RadialState st = state_at(traj, r);
        ucurves[c].push_back(st.u);
        vcurves[c].push_back(st.v);
      }
    }
  }

  std::ostringstream csv;
  csv << "r";
  for (int N : Ns) csv << ",u_N" << N << ",v_N" << N;
  csv << '\n';
  for (std::size_t k = 0; k < rgrid.size(); ++k) {
    csv << fmt_g17(rgrid[k]);
    for (int c = 0; c < 4; ++c)
      csv << ',' << fmt_g17(ucurves[c][k]) << ',' << fmt_g17(vcurves[c][k]);
    csv << '\n';
  }
  const std::string csv_path = o.out_path.empty() ? "figure1.csv" : o.out_path;
  write_file(csv_path, csv.str());

  std::ostringstream svg;
  write_figure_svg(rgrid, ucurves, vcurves, Ns, svg);
  write_file(o.svg_path, svg.str());

  ordered_json j;
  j["csv"] = csv_path;
  j["svg"] = o.svg_path;
  out << j.dump() << "\n";
  return 0;
}

// ---- simple subcommands -------------------------------------------------

int cmd_classify(const Opts& o, std::ostream& out) {
  ordered_json j;
  try {
    const Regime regime = classify(params_of(o));
    j["tag"] = regime_tag_name(regime.tag);
    j["global_exists"] = regime.global_exists;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::DeltaZero) throw;
    j["tag"] = regime_tag_name(RegimeTag::InvalidDelta);
    j["global_exists"] = false;
  }
  out << j.dump() << "\n";
  return 0;
}

int cmd_solve(const Opts& o, std::ostream& out, std::ostream& err) {
  const SystemParams params = params_of(o);
  const RadialTrajectory traj = integrate(params, o.a, o.b, make_config(o));

  std::ostringstream csv;
  write_trajectory_csv(traj, csv);
  write_file(o.out_path.empty() ? "trajectory.csv" : o.out_path, csv.str());

  ordered_json j;
  j["stop"] = stop_reason_name(traj.stop);
  j["samples"] = traj.samples.size();
  j["r_last"] = traj.samples.back().r;
  if (traj.stop == StopReason::BlowUp) {
    const BlowupFit fit = estimate_blowup(traj, derive(params));
    j["R_est"] = fit.R_est;
    j["rate_exponent"] = fit.rate_exponent;
    j["fit_quality"] = fit.fit_quality;
  }
  j["monitor_events"] = traj.monitors.size();
  if (!traj.monitors.empty()) {
    j["first_violation"] = {{"bound", traj.monitors.front().bound},
                            {"r", traj.monitors.front().r}};
  }
  out << j.dump() << "\n";

  if (traj.stop == StopReason::StepUnderflow ||
      traj.stop == StopReason::MonitorViolation) {
    ordered_json e;
    e["error"] = stop_reason_name(traj.stop);
    e["message"] = "integration stopped early; partial trajectory written";
    err << e.dump() << "\n";
    return 3;
  }
  return 0;
}

int cmd_flow(const Opts& o, std::ostream& out) {
  const SystemParams params = params_of(o);

  ordered_json j;
  std::optional<Equilibrium> eq;
  try {
    eq = equilibrium(params);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::DeltaNotPositive) throw;
  }
  if (eq) {
    j["equilibrium"] = {
        {"Y_inf", eq->Y_inf}, {"Z_inf", eq->Z_inf}, {"W_inf", eq->W_inf},
        {"X_inf", eq->X_inf}, {"A", eq->A},         {"B", eq->B}};
    j["stability"] = {{"a", eq->char_poly.a},
                      {"b", eq->char_poly.b},
                      {"c", eq->char_poly.c},
                      {"stable", eq->stable},
                      {"eigen_real_parts", eq->eigen_real_parts}};
    j["P1"] = {eq->P1.Y, eq->P1.Z, eq->P1.W};
    j["P2"] = {eq->P2.Y, eq->P2.Z, eq->P2.W};
    j["P_star"] = {eq->P_star.Y, eq->P_star.Z, eq->P_star.W};
    if (eq->P3) j["P3"] = {eq->P3->Y, eq->P3->Z, eq->P3->W};
  } else {
    j["equilibrium"] = nullptr;
  }

  FlowPoint start;
  if (o.Y0 >= 0 && o.Z0 >= 0 && o.W0 >= 0) {
    start = FlowPoint{o.Y0, o.Z0, o.W0};
  } else if (eq) {
    start = FlowPoint{(eq->P_star.Y + eq->Y_inf) / 2,
                      (eq->P_star.Z + eq->Z_inf) / 2,
                      (eq->P_star.W + eq->W_inf) / 2};
  } else {
    start = FlowPoint{1, 1, 1};
  }
  FlowIntegrateConfig fcfg;
  fcfg.t_max = o.tmax;
  fcfg.rtol = o.rtol;
  fcfg.atol = o.atol;
  std::optional<double> x0;
  if (o.X0 >= 0) x0 = o.X0;
  const FlowTrajectory traj = integrate_flow(params, start, fcfg, x0);

  std::ostringstream csv;
  write_flow_csv(traj.samples, csv);
  write_file(o.out_path.empty() ? "flow.csv" : o.out_path, csv.str());

  j["start"] = {start.Y, start.Z, start.W};
  j["outcome"] = flow_outcome_name(traj.outcome);
  if (traj.omega) j["omega"] = {traj.omega->Y, traj.omega->Z, traj.omega->W};
  out << j.dump() << "\n";
  return 0;
}

int cmd_asymptotics(const Opts& o, std::ostream& out) {
  const SystemParams params = params_of(o);
  const RadialTrajectory traj = integrate(params, o.a, o.b, make_config(o));
  const AsymptoticsReport rep =
      verify_growth(traj, equilibrium(params), params);
  const std::string json = report_to_json(rep);
  if (!o.out_path.empty()) write_file(o.out_path, json + "\n");
  out << json << "\n";
  return 0;
}

int cmd_picard(const Opts& o, std::ostream& out) {
  const SystemParams params = params_of(o);
  const PicardResult res =
      solve_fixed_point(params, o.a, o.b, o.rho, o.pic_tol, 200, o.cells);

  IntegrateConfig cfg = make_config(o);
  cfg.r_max = res.pair.rho;
  const RadialTrajectory traj = integrate(params, o.a, o.b, cfg);
  const double sup = sup_distance_to_trajectory(res.pair, traj);

  if (!o.out_path.empty()) {
    std::ostringstream csv;
    write_picard_csv(res.pair, csv);
    write_file(o.out_path, csv.str());
  }
  ordered_json j;
  j["converged"] = true;
  j["iterations"] = res.iterations;
  j["rho"] = res.pair.rho;
  j["halvings"] = res.halvings;
  j["final_change"] = res.final_change;
  j["sup_distance_to_ode"] = sup;
  out << j.dump() << "\n";
  return 0;
}

int cmd_single_eq(const Opts& o, std::ostream& out) {
  const SingleEquationResult res =
      single_equation_mode(o.N, o.p, o.m, o.q, o.a, make_config(o));
  if (!o.out_path.empty()) {
    std::ostringstream csv;
    write_trajectory_csv(res.trajectory, csv);
    write_file(o.out_path, csv.str());
  }
  ordered_json j;
  j["exponent"] = res.exponent;
  j["C_pred"] = res.C_pred;
  j["ratio_at_rmax"] = res.ratio_at_rmax;
  j["max_uv_reldiff"] = res.max_uv_reldiff;
  j["report"] = nlohmann::ordered_json::parse(report_to_json(res.report));
  out << j.dump() << "\n";
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out,
        std::ostream& err) {
  Opts o;
  CLI::App app{"radial solver toolkit for p-Laplacian systems with gradient coupling"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "key=value config file with [subcommand] sections");
  app.get_config_ptr()->envname("QLRAD_CONFIG");

  auto* c_classify = app.add_subcommand("classify", "boundary-behavior regime of a parameter tuple");
  c_classify->fallthrough();
  add_param_opts(c_classify, o);

  auto* c_solve = app.add_subcommand("solve", "integrate the radial system; trajectory CSV + stop report");
  c_solve->fallthrough();
  add_param_opts(c_solve, o);
  add_run_opts(c_solve, o);

  auto* c_flow = app.add_subcommand("flow", "autonomous (Y,Z,W) flow; CSV + equilibrium/stability JSON");
  c_flow->fallthrough();
  add_param_opts(c_flow, o);
  add_run_opts(c_flow, o);
  opt(c_flow, "--Y0", o.Y0, "start Y (default: mid order-interval)");
  opt(c_flow, "--Z0", o.Z0, "start Z");
  opt(c_flow, "--W0", o.W0, "start W");
  opt(c_flow, "--X0", o.X0, "start of the companion X coordinate");
  opt(c_flow, "--tmax", o.tmax, "flow time horizon");

  auto* c_asym = app.add_subcommand("asymptotics", "growth-constant verification report");
  c_asym->fallthrough();
  add_param_opts(c_asym, o);
  auto* asym_rmax = add_run_opts(c_asym, o);

  auto* c_picard = app.add_subcommand("picard", "fixed-point construction on [0, rho] + ODE comparison");
  c_picard->fallthrough();
  add_param_opts(c_picard, o);
  add_run_opts(c_picard, o);
  opt(c_picard, "--rho", o.rho, "interval end");
  opt(c_picard, "--tol", o.pic_tol, "sup-norm stopping tolerance");
  opt(c_picard, "--cells", o.cells, "grid cells");

  auto* c_single = app.add_subcommand("single-eq", "single-equation mode (alpha = q, beta = m embedding)");
  c_single->fallthrough();
  add_param_opts(c_single, o);
  auto* single_rmax = add_run_opts(c_single, o);

  auto* c_sweep = app.add_subcommand("sweep", "parameter-grid summary CSV");
  c_sweep->fallthrough();
  add_param_opts(c_sweep, o);
  add_run_opts(c_sweep, o);
  opt(c_sweep, "--sweep-N", o.sw_N, "N values: v1,v2,... or lo:hi:count");
  opt(c_sweep, "--sweep-p", o.sw_p, "p values");
  opt(c_sweep, "--sweep-m", o.sw_m, "m values");
  opt(c_sweep, "--sweep-q", o.sw_q, "q values");
  opt(c_sweep, "--sweep-alpha", o.sw_alpha, "alpha values");
  opt(c_sweep, "--sweep-beta", o.sw_beta, "beta values");

  auto* c_fig = app.add_subcommand("figure1", "u,v curves for N = 3,10,30,60 on [0,500]; CSV + SVG");
  c_fig->fallthrough();
  add_run_opts(c_fig, o);
  opt(c_fig, "--svg", o.svg_path, "SVG output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    ordered_json ej;
    ej["error"] = "ConfigError";
    ej["message"] = e.what();
    err << ej.dump() << "\n";
    return 2;
  }

  // subcommand-specific default horizons
  if (c_asym->parsed() && asym_rmax->count() == 0) o.rmax = 1e6;
  if (c_single->parsed() && single_rmax->count() == 0) o.rmax = 1e6;

  try {
    if (c_classify->parsed()) return cmd_classify(o, out);
    if (c_solve->parsed()) return cmd_solve(o, out, err);
    if (c_flow->parsed()) return cmd_flow(o, out);
    if (c_asym->parsed()) return cmd_asymptotics(o, out);
    if (c_picard->parsed()) return cmd_picard(o, out);
    if (c_single->parsed()) return cmd_single_eq(o, out);
    if (c_sweep->parsed()) return cmd_sweep(o, out);
    if (c_fig->parsed()) return cmd_figure1(o, out);
  } catch (const Error& e) {
    ordered_json ej;
    ej["error"] = error_code_name(e.code());
    ej["message"] = e.what();
    err << ej.dump() << "\n";
    return is_config_error(e.code()) ? 2 : 3;
  } catch (const std::exception& e) {
    ordered_json ej;
    ej["error"] = "Internal";
    ej["message"] = e.what();
    err << ej.dump() << "\n";
    return 3;
  }
  return 2;
}

}  // namespace qlrad::cli
