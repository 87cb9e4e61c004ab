#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "soligas/effective.hpp"
#include "soligas/error.hpp"
#include "soligas/gas.hpp"
#include "soligas/hydro.hpp"
#include "soligas/json_io.hpp"
#include "soligas/observables.hpp"
#include "soligas/parallel.hpp"
#include "soligas/positions.hpp"
#include "soligas/projections.hpp"
#include "soligas/tau.hpp"
#include "soligas/verify.hpp"
#include "soligas_cli/cli.hpp"
#include "soligas_cli/csv.hpp"
#include "soligas_cli/manifest.hpp"

namespace fs = std::filesystem;

namespace soligas::cli {
namespace {

// Verification failures propagate as this so that outputs are still written first.
struct VerificationFailed {};

class Session {
 public:
  Session(std::ostream& out, RunManifest& m) : out_(out), manifest_(m) {}

  // Stream for `path`, or stdout when empty. Parent directories are created.
  std::ostream& open(const std::string& path) {
    if (path.empty() || path == "-") return out_;
    const fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    auto f = std::make_unique<std::ofstream>(path, std::ios::binary);
    if (!*f) throw Error(ErrorKind::InvalidArgument, "cannot write " + path);
    files_.push_back(std::move(f));
    manifest_.outputs.push_back({path, 0});
    return *files_.back();
  }

  void write_json(const std::string& path, const json& j) { open(path) << j.dump(2) << '\n'; }

  void close() {
    for (auto& f : files_) f->close();
    files_.clear();
  }

 private:
  std::ostream& out_;
  RunManifest& manifest_;
  std::vector<std::unique_ptr<std::ofstream>> files_;
};

std::vector<double> linspace(double a, double b, int n) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "need at least one point");
  if (n == 1) return {a};
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = a + (b - a) * i / (n - 1);
  return v;
}

FieldMethod parse_method(const std::string& s) {
  if (s == "auto") return FieldMethod::Auto;
  if (s == "expansion") return FieldMethod::Expansion;
  if (s == "determinant") return FieldMethod::Determinant;
  throw Error(ErrorKind::InvalidArgument, "unknown method '" + s + "'");
}

double default_delta_X(const SolitonConfig& c) { return std::max(1.0, std::sqrt(static_cast<double>(c.size()))); }

// ---------------------------------------------------------------------------------------------
// field

struct FieldArgs {
  std::string config, out, method = "auto";
  double xmin = -10, xmax = 10;
  int points = 1000, order = 2;
};

void cmd_field(Session& s, const FieldArgs& a) {
  const auto cfg = load_config(a.config);
  FieldOptions fo;
  fo.method = parse_method(a.method);
  const auto xs = linspace(a.xmin, a.xmax, a.points);
  const auto jets = field_grid(cfg, xs, a.order, fo);
  static const char* names[] = {"u", "u_x", "u_xx", "u_xxx", "u_xxxx"};
  std::vector<std::string> header{"x"};
  for (int k = 0; k <= a.order; ++k) header.emplace_back(names[k]);
  header.emplace_back("log_tau");
  header.emplace_back("representation");
  CsvWriter w(s.open(a.out), header);
  for (const auto& j : jets) {
    w << j.x;
    for (double v : j.values) w << v;
    w << j.log_tau << j.representation.label();
    w.end_row();
  }
}

// ---------------------------------------------------------------------------------------------
// charges

struct ChargesArgs {
  std::string config, out;
  std::vector<int> k{0, 1, 2};
  std::vector<double> interval;
};

void cmd_charges(Session& s, const ChargesArgs& a) {
  const auto cfg = load_config(a.config);
  std::optional<Interval> iv;
  if (!a.interval.empty()) iv = Interval{a.interval[0], a.interval[1]};
  json rows = json::array();
  for (int k : a.k) {
    const auto r = integrate_density(cfg, k, iv);
    json row{{"k", k}, {"integral", r.value}, {"error_estimate", r.error_estimate}, {"a", r.a}, {"b", r.b}};
    if (!iv) {
      double sum = 0;
      for (double c : cfg.chi()) sum += std::pow(c, 2 * k + 1);
      row["expected"] = sum;
      row["relative_error"] = sum > 0 ? std::abs(r.value - sum) / sum : std::abs(r.value);
    }
    rows.push_back(row);
  }
  s.write_json(a.out, rows);
}

// ---------------------------------------------------------------------------------------------
// positions

struct PositionsArgs {
  std::string config, out;
  std::optional<double> x_star;
  double xmin = 0, xmax = 0;
  int points = 201;
  double epsilon = kDefaultEpsilon;
};

void cmd_positions(Session& s, const PositionsArgs& a) {
  const auto cfg = load_config(a.config);
  ExpandOptions eo;
  eo.epsilon = a.epsilon;
  if (a.x_star) {
    s.write_json(a.out, json(expand(cfg, *a.x_star, eo)));
    return;
  }
  PositionPath path(cfg, eo);
  double lo = a.xmin, hi = a.xmax;
  if (!(hi > lo)) {
    lo = path.core().x_minus - 2.0;
    hi = path.core().x_plus + 2.0;
  }
  CsvWriter w(s.open(a.out), {"x_star", "i", "X", "d", "region"});
  for (double xs : linspace(lo, hi, a.points)) {
    const auto sol = path.at(xs);
    for (std::size_t i = 0; i < sol.X.size(); ++i) {
      w << xs << static_cast<long long>(i) << sol.X[i] << sol.d[i] << std::string(to_string(sol.pattern[i]));
      w.end_row();
    }
  }
}

// ---------------------------------------------------------------------------------------------
// effective

struct EffectiveArgs {
  std::string config, out, trajectory;
  std::optional<double> delta_X;
  double epsilon = kDefaultEpsilon, tol_x = 1e-6, margin = -1;
  int points = 401;
};

void cmd_effective(Session& s, const EffectiveArgs& a) {
  const auto cfg = load_config(a.config);
  ScanOptions so;
  so.epsilon = a.epsilon;
  so.tol_x = a.tol_x;
  so.margin = a.margin;
  const auto eff = scan_effective(cfg, a.delta_X.value_or(default_delta_X(cfg)), so);
  json j = eff;
  j["bethe"] = bethe_residual(cfg, eff);
  s.write_json(a.out, j);
  if (!a.trajectory.empty()) {
    const auto grid = linspace(eff.scan.x_begin, eff.scan.x_end, a.points);
    const auto rows = trajectory(cfg, grid, a.epsilon);
    CsvWriter w(s.open(a.trajectory), {"x_star", "i", "X"});
    for (std::size_t r = 0; r < rows.size(); ++r)
      for (std::size_t i = 0; i < rows[r].size(); ++i) {
        w << grid[r] << static_cast<long long>(i) << rows[r][i];
        w.end_row();
      }
  }
}

// ---------------------------------------------------------------------------------------------
// project

struct ProjectArgs {
  std::string config, out, mode = "shift";
  std::vector<int> plus, minus, keep;
  double x_star = 0.0;
  std::vector<double> cell;
  std::optional<double> delta_X;
  double epsilon = kDefaultEpsilon;
};

void cmd_project(Session& s, const ProjectArgs& a) {
  const auto cfg = load_config(a.config);
  auto need_cell = [&] {
    if (a.cell.size() != 2) throw Error(ErrorKind::InvalidArgument, "--cell needs two values");
    return std::pair<double, double>{a.cell[0], a.cell[1]};
  };
  ProjectionResult r;
  if (a.mode == "shift") {
    r = project_out(cfg, a.plus, a.minus);
  } else if (a.mode == "extract") {
    r = extract(cfg, a.keep, a.x_star, a.epsilon);
  } else if (a.mode == "local") {
    r = local_projection(cfg, need_cell(), a.epsilon);
  } else if (a.mode == "cell") {
    r = fluid_cell_projection(cfg, need_cell(), a.delta_X.value_or(default_delta_X(cfg)), a.epsilon);
  } else {
    throw Error(ErrorKind::InvalidArgument, "unknown projection mode '" + a.mode + "'");
  }
  s.write_json(a.out, json(r));
}

// ---------------------------------------------------------------------------------------------
// gas

struct GasArgs {
  std::string kind = "ultra-dilute", out;
  std::size_t n = 8;
  UltraDiluteParams ud;
  double ell = 50.0, chi_min = 0.5, chi_max = 2.0;
};

void cmd_gas(Session& s, const GasArgs& a, std::uint64_t seed) {
  SolitonConfig cfg;
  if (a.kind == "ultra-dilute")
    cfg = generate_ultra_dilute(a.n, a.ud);
  else if (a.kind == "uniform")
    cfg = generate_uniform(a.n, a.ell, {a.chi_min, a.chi_max}, seed);
  else
    throw Error(ErrorKind::InvalidArgument, "unknown gas kind '" + a.kind + "'");
  s.write_json(a.out, json(cfg));
}

// ---------------------------------------------------------------------------------------------
// check

struct CheckArgs {
  std::string config, out;
  AssumptionExponents e;
  AssumptionConstants c;
  int points = 201;
  double epsilon = kDefaultEpsilon;
};

void cmd_check(Session& s, const CheckArgs& a) {
  const auto cfg = load_config(a.config);
  std::vector<double> grid;
  if (!cfg.empty()) {
    const auto core = extremal_and_core(cfg);
    grid = linspace(core.x_minus - 1.0, core.x_plus + 1.0, a.points);
  }
  const auto r = check_assumptions(cfg, a.e, a.c, grid, a.epsilon);
  s.write_json(a.out, json(r));
  if (!r.pass()) throw VerificationFailed{};
}

// ---------------------------------------------------------------------------------------------
// ghd

struct GhdArgs {
  std::string rho0, out;
  int chi_nodes = 0;
  double t_end = 1.0, cfl = 0.9;
  bool outflow = false;
};

DensityField read_density(const std::string& path) {
  const auto t = read_csv(path);
  const auto ci = t.column("chi"), xi = t.column("x"), ri = t.column("rho");
  std::set<double> chis, xs;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    chis.insert(t.number(r, ci));
    xs.insert(t.number(r, xi));
  }
  DensityField f;
  f.chi_grid.assign(chis.begin(), chis.end());
  f.x_grid.assign(xs.begin(), xs.end());
  f.rho = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(chis.size()), static_cast<Eigen::Index>(xs.size()),
                                    std::nan(""));
  auto index = [](const std::vector<double>& v, double x) {
    return static_cast<Eigen::Index>(std::lower_bound(v.begin(), v.end(), x) - v.begin());
  };
  for (std::size_t r = 0; r < t.rows.size(); ++r)
    f.rho(index(f.chi_grid, t.number(r, ci)), index(f.x_grid, t.number(r, xi))) = t.number(r, ri);
  if (f.rho.hasNaN()) throw Error(ErrorKind::InvalidArgument, path + ": rho must be given on a full (chi, x) grid");
  if (f.x_grid.size() > 1) {
    const double h = f.x_grid[1] - f.x_grid[0];
    for (std::size_t i = 2; i < f.x_grid.size(); ++i)
      if (std::abs(f.x_grid[i] - f.x_grid[i - 1] - h) > 1e-9 * std::max(1.0, std::abs(h)))
        throw Error(ErrorKind::InvalidArgument, path + ": x cells must be uniform");
  }
  f.validate();
  return f;
}

// Linear interpolation in chi onto m uniform nodes over the same range.
DensityField resample_chi(const DensityField& f, int m) {
  if (m < 2) throw Error(ErrorKind::InvalidArgument, "--chi-nodes must be at least 2");
  DensityField g;
  g.x_grid = f.x_grid;
  g.time = f.time;
  g.chi_grid = linspace(f.chi_grid.front(), f.chi_grid.back(), m);
  g.rho.resize(m, f.rho.cols());
  for (int a = 0; a < m; ++a) {
    const double c = g.chi_grid[static_cast<std::size_t>(a)];
    auto it = std::upper_bound(f.chi_grid.begin(), f.chi_grid.end(), c);
    const auto hi = static_cast<Eigen::Index>(std::min<std::ptrdiff_t>(it - f.chi_grid.begin(),
                                                                        static_cast<std::ptrdiff_t>(f.chi_grid.size()) - 1));
    const Eigen::Index lo = std::max<Eigen::Index>(hi - 1, 0);
    const double c0 = f.chi_grid[static_cast<std::size_t>(lo)], c1 = f.chi_grid[static_cast<std::size_t>(hi)];
    const double w = c1 > c0 ? (c - c0) / (c1 - c0) : 0.0;
    g.rho.row(a) = (1.0 - w) * f.rho.row(lo) + w * f.rho.row(hi);
  }
  return g;
}

void cmd_ghd(Session& s, const GhdArgs& a) {
  auto rho = read_density(a.rho0);
  if (a.chi_nodes > 0 && static_cast<std::size_t>(a.chi_nodes) != rho.chi_grid.size()) rho = resample_chi(rho, a.chi_nodes);
  GhdOptions go;
  go.cfl = a.cfl;
  go.periodic = !a.outflow;
  const auto out = ghd_evolve(rho, a.t_end, go);
  CsvWriter w(s.open(a.out), {"chi", "x", "rho"});
  for (std::size_t c = 0; c < out.chi_grid.size(); ++c)
    for (std::size_t x = 0; x < out.x_grid.size(); ++x) {
      w << out.chi_grid[c] << out.x_grid[x] << out.rho(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(x));
      w.end_row();
    }
}

// ---------------------------------------------------------------------------------------------
// micro

struct MicroArgs {
  std::string config, out;
  std::vector<double> times{0.0};
  std::optional<double> delta_X;
  double epsilon = kDefaultEpsilon;
};

void cmd_micro(Session& s, const MicroArgs& a) {
  const auto cfg = load_config(a.config);
  const auto traj = microscopic_trajectories(cfg, a.times, a.delta_X.value_or(default_delta_X(cfg)), a.epsilon);
  CsvWriter w(s.open(a.out), {"t", "i", "x_eff"});
  for (std::size_t r = 0; r < a.times.size(); ++r)
    for (std::size_t i = 0; i < traj[r].size(); ++i) {
      w << a.times[r] << static_cast<long long>(i) << traj[r][i];
      w.end_row();
    }
}

// ---------------------------------------------------------------------------------------------
// verify

struct VerifyArgs {
  std::string suite = "all", config, out = "reports";
  std::vector<std::string> ladder;
  std::optional<double> x_star, delta_X;
  double offset = 1.0;
  std::vector<double> cell;
  double Lambda = 2.1;
  std::vector<int> k{0, 1, 2};
  double tolerance = 1e-4;
  bool two_sided = false;
  double epsilon = kDefaultEpsilon;
};

void cmd_verify(Session& s, const VerifyArgs& a) {
  static const std::vector<std::string> all{"local_form", "support", "fluid_cell", "weak_limit"};
  std::vector<std::string> suites;
  if (a.suite == "all")
    suites = all;
  else if (std::find(all.begin(), all.end(), a.suite) != all.end())
    suites = {a.suite};
  else
    throw Error(ErrorKind::InvalidArgument, "unknown suite '" + a.suite + "'");

  const bool needs_config = a.suite != "weak_limit" || a.ladder.empty();
  SolitonConfig cfg;
  if (needs_config) {
    if (a.config.empty()) throw Error(ErrorKind::InvalidArgument, "--config is required for this suite");
    cfg = load_config(a.config);
    if (cfg.empty()) throw Error(ErrorKind::InvalidArgument, "config has no solitons");
  }
  const double dX = a.delta_X.value_or(cfg.empty() ? 1.0 : default_delta_X(cfg));

  // independent reports run concurrently
  std::vector<TheoremReport> reports(suites.size());
  parallel_for(suites.size(), [&](std::size_t q) {
    const auto& name = suites[q];
    ScanOptions so;
    so.epsilon = a.epsilon;
    if (name == "local_form") {
      double xs;
      if (a.x_star) {
        xs = *a.x_star;
      } else {
        xs = scan_effective(cfg, dX, so).x_eff[(cfg.size() - 1) / 2];
      }
      LocalFormOptions lo;
      lo.epsilon = a.epsilon;
      lo.two_sided = a.two_sided;
      reports[q] = verify_local_form(cfg, xs, edge_ladder(cfg, xs, a.offset, a.epsilon), lo);
    } else if (name == "support") {
      reports[q] = verify_support(cfg);
    } else if (name == "fluid_cell") {
      std::pair<double, double> cell;
      if (a.cell.size() == 2) {
        cell = {a.cell[0], a.cell[1]};
      } else {
        // every soliton, with a margin where the field has decayed
        const auto eff = scan_effective(cfg, dX, so);
        const double m = 10.0 / cfg.chi(0) + eff.delta_x;
        cell = {*std::min_element(eff.x_eff.begin(), eff.x_eff.end()) - m,
                *std::max_element(eff.x_eff.begin(), eff.x_eff.end()) + m};
      }
      FluidCellOptions fo;
      fo.k_list = a.k;
      fo.tolerance = a.tolerance;
      fo.epsilon = a.epsilon;
      reports[q] = verify_fluid_cell(cfg, cell, dX, fo);
    } else {
      std::vector<SolitonConfig> ladder;
      for (const auto& p : a.ladder) ladder.push_back(load_config(p));
      if (ladder.empty()) {
        UltraDiluteParams up;
        up.R = 3.0;
        for (std::size_t n : {2u, 4u, 8u}) ladder.push_back(generate_ultra_dilute(n, up));
      }
      WeakLimitOptions wo;
      wo.epsilon = a.epsilon;
      TheoremReport merged;
      merged.theorem = "weak_limit";
      merged.pass = true;
      for (int k : a.k) {
        const auto r = verify_weak_limit(ladder, k, a.Lambda, GaussianTest{}, wo);
        const std::string tag = "_k" + std::to_string(k);
        for (const auto& [key, v] : r.measured) merged.measured[key + tag] = v;
        for (const auto& [key, v] : r.bound) merged.bound[key + tag] = v;
        for (const auto& [key, v] : r.series) merged.series[key + tag] = v;
        merged.pass = merged.pass && r.pass;
      }
      merged.metadata["Lambda"] = format_number(a.Lambda);
      merged.metadata["ladder"] = a.ladder.empty() ? "ultra-dilute R=3, N in {2,4,8}" : "user";
      reports[q] = merged;
    }
  });

  bool ok = true;
  std::ostringstream summary;
  CsvWriter w(summary, {"theorem", "pass", "quantity", "measured", "bound"});
  for (const auto& r : reports) {
    s.write_json((fs::path(a.out) / (r.theorem + ".json")).string(), json(r));
    ok = ok && r.pass;
    for (const auto& [key, v] : r.measured) {
      w << r.theorem << std::string(r.pass ? "true" : "false") << key << v;
      const auto b = r.bound.find(key);
      if (b != r.bound.end())
        w << b->second;
      else
        w << std::string();
      w.end_row();
    }
  }
  s.open((fs::path(a.out) / "summary.csv").string()) << summary.str();
  if (!ok) throw VerificationFailed{};
}

// ---------------------------------------------------------------------------------------------
// plot

struct PlotArgs {
  std::vector<std::string> inputs;
  std::string out, png;
};

std::string plot_script(const std::string& input, const std::string& png) {
  const auto t = read_csv(input);
  const auto& h = t.header;
  auto has = [&](const std::string& c) { return std::find(h.begin(), h.end(), c) != h.end(); };
  std::ostringstream g;
  g << "set datafile separator ','\n";
  if (!png.empty()) g << "set terminal pngcairo size 1000,600\nset output '" << png << "'\n";
  const std::string q = "'" + input + "'";
  if (has("x") && has("u")) {
    g << "set xlabel 'x'\nset key top right\n";
    g << "plot " << q << " using 1:2 skip 1 with lines title 'u'";
    for (std::size_t c = 2; c < h.size() && h[c].rfind("u_", 0) == 0; ++c)
      g << ", \\\n     " << q << " using 1:" << c + 1 << " skip 1 with lines title '" << h[c] << "'";
    g << '\n';
  } else if (has("chi") && has("x") && has("rho")) {
    g << "set view map\nset xlabel 'x'\nset ylabel 'chi'\nset cblabel 'rho'\n";
    g << "splot " << q << " using " << t.column("x") + 1 << ":" << t.column("chi") + 1 << ":" << t.column("rho") + 1
      << " skip 1 with points pointtype 5 pointsize 0.6 palette notitle\n";
  } else if ((has("x_star") && has("X")) || (has("t") && has("x_eff"))) {
    const bool micro = has("x_eff");
    const auto xc = t.column(micro ? "t" : "x_star") + 1, ic = t.column("i") + 1, yc = t.column(micro ? "x_eff" : "X") + 1;
    long long n = 0;
    for (std::size_t r = 0; r < t.rows.size(); ++r) n = std::max(n, static_cast<long long>(t.number(r, ic - 1)) + 1);
    g << "set xlabel '" << (micro ? "t" : "x*") << "'\nset ylabel '" << (micro ? "x_eff" : "X_i(x*)") << "'\n";
    if (!micro) g << "f(x) = x\n";
    g << "plot for [k=0:" << n - 1 << "] " << q << " using " << xc << ":($" << ic << "==k ? $" << yc
      << " : 1/0) skip 1 with " << (micro ? "linespoints" : "lines") << " title sprintf('%d', k)";
    if (!micro) g << ", \\\n     f(x) with lines dashtype 2 title 'x*'";
    g << '\n';
  } else {
    throw Error(ErrorKind::InvalidArgument, input + ": unrecognised CSV layout");
  }
  return g.str();
}

void cmd_plot(Session& s, const PlotArgs& a) {
  std::ostream& o = s.open(a.out);
  for (std::size_t i = 0; i < a.inputs.size(); ++i) {
    std::string png = a.png;
    if (!png.empty() && a.inputs.size() > 1) {
      const fs::path p(png);
      png = (p.parent_path() / (p.stem().string() + "_" + std::to_string(i) + p.extension().string())).string();
    }
    if (i) o << '\n';
    o << "# " << a.inputs[i] << '\n' << plot_script(a.inputs[i], png);
    if (png.empty() && a.inputs.size() > 1) o << "pause -1\n";
  }
}

int exit_code_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidArgument:
    case ErrorKind::CoincidentSpectral:
    case ErrorKind::Ordering:
    case ErrorKind::LengthMismatch:
    case ErrorKind::OverlappingSubsets:
    case ErrorKind::Unsupported:
      return kArgumentError;
    default:
      return kSolverFailure;
  }
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"soligas: KdV N-soliton fields, soliton positions and soliton-gas hydrodynamics"};
  app.name("soligas");
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", SOLIGAS_VERSION);

  std::uint64_t seed = 0;
  std::size_t threads = 0;
  std::string manifest_path;
  auto global = [&](CLI::App* sub) {
    sub->add_option("--seed", seed, "Seed for every random draw");
    sub->add_option("--threads", threads, "Worker threads (default: SOLIGAS_THREADS or all cores)");
    sub->add_option("--manifest", manifest_path, "Run manifest path (default: next to the outputs)");
  };

  FieldArgs fa;
  auto* field_cmd = app.add_subcommand("field", "Evaluate u and its derivatives on a grid (CSV)");
  field_cmd->add_option("--config", fa.config, "Config JSON {chi, y}")->required();
  field_cmd->add_option("--xmin", fa.xmin);
  field_cmd->add_option("--xmax", fa.xmax);
  field_cmd->add_option("--points", fa.points)->check(CLI::PositiveNumber);
  field_cmd->add_option("--order", fa.order, "Highest derivative of u")->check(CLI::Range(0, 4));
  field_cmd->add_option("--method", fa.method, "auto | expansion | determinant");
  field_cmd->add_option("--out", fa.out, "CSV path (stdout if omitted)");
  global(field_cmd);

  ChargesArgs ca;
  auto* charges_cmd = app.add_subcommand("charges", "Integrate the conserved densities (JSON)");
  charges_cmd->add_option("--config", ca.config)->required();
  charges_cmd->add_option("--k", ca.k, "Charge indices (0, 1, 2)");
  charges_cmd->add_option("--interval", ca.interval, "Finite interval a b (full line if omitted)")->expected(2);
  charges_cmd->add_option("--out", ca.out);
  global(charges_cmd);

  PositionsArgs pa;
  auto* positions_cmd = app.add_subcommand("positions", "Magnifying-glass positions: JSON at --x-star, else CSV scan");
  positions_cmd->add_option("--config", pa.config)->required();
  positions_cmd->add_option("--x-star", pa.x_star);
  positions_cmd->add_option("--xmin", pa.xmin);
  positions_cmd->add_option("--xmax", pa.xmax);
  positions_cmd->add_option("--points", pa.points)->check(CLI::PositiveNumber);
  positions_cmd->add_option("--epsilon", pa.epsilon)->check(CLI::PositiveNumber);
  positions_cmd->add_option("--out", pa.out);
  global(positions_cmd);

  EffectiveArgs ea;
  auto* effective_cmd = app.add_subcommand("effective", "Effective positions and imprecision (JSON)");
  effective_cmd->add_option("--config", ea.config)->required();
  effective_cmd->add_option("--deltaX", ea.delta_X, "Window half-width (default max(1, sqrt N))");
  effective_cmd->add_option("--epsilon", ea.epsilon)->check(CLI::PositiveNumber);
  effective_cmd->add_option("--tol-x", ea.tol_x)->check(CLI::PositiveNumber);
  effective_cmd->add_option("--margin", ea.margin);
  effective_cmd->add_option("--trajectory", ea.trajectory, "Also write X_i(x*) as CSV");
  effective_cmd->add_option("--points", ea.points, "Trajectory grid size")->check(CLI::PositiveNumber);
  effective_cmd->add_option("--out", ea.out);
  global(effective_cmd);

  ProjectArgs pr;
  auto* project_cmd = app.add_subcommand("project", "Project solitons out of a configuration (JSON)");
  project_cmd->add_option("--config", pr.config)->required();
  project_cmd->add_option("--mode", pr.mode, "shift | extract | local | cell");
  project_cmd->add_option("--plus", pr.plus, "shift: indices sent to +infinity");
  project_cmd->add_option("--minus", pr.minus, "shift: indices sent to -infinity");
  project_cmd->add_option("--keep", pr.keep, "extract: indices kept");
  project_cmd->add_option("--x-star", pr.x_star, "extract: observation point");
  project_cmd->add_option("--cell", pr.cell, "local/cell: interval a b")->expected(2);
  project_cmd->add_option("--deltaX", pr.delta_X, "cell: window half-width");
  project_cmd->add_option("--epsilon", pr.epsilon)->check(CLI::PositiveNumber);
  project_cmd->add_option("--out", pr.out);
  global(project_cmd);

  GasArgs ga;
  auto* gas_cmd = app.add_subcommand("gas", "Generate a soliton-gas configuration (JSON)");
  gas_cmd->add_option("--kind", ga.kind, "ultra-dilute | uniform");
  gas_cmd->add_option("--n", ga.n)->check(CLI::PositiveNumber);
  gas_cmd->add_option("--R", ga.ud.R, "ultra-dilute spacing prefactor");
  gas_cmd->add_option("--spacing-exponent", ga.ud.spacing_exponent);
  gas_cmd->add_option("--chi-star", ga.ud.chi_star);
  gas_cmd->add_option("--C", ga.ud.C);
  gas_cmd->add_option("--ell", ga.ell, "uniform: box length");
  gas_cmd->add_option("--chi-min", ga.chi_min);
  gas_cmd->add_option("--chi-max", ga.chi_max);
  gas_cmd->add_option("--out", ga.out);
  global(gas_cmd);

  CheckArgs ka;
  auto* check_cmd = app.add_subcommand("check", "Check the gas assumptions (JSON, exit 1 on failure)");
  check_cmd->add_option("--config", ka.config)->required();
  check_cmd->add_option("--alpha", ka.e.alpha);
  check_cmd->add_option("--beta", ka.e.beta);
  check_cmd->add_option("--sigma", ka.e.sigma);
  check_cmd->add_option("--mu", ka.e.mu);
  check_cmd->add_option("--nu", ka.e.nu);
  check_cmd->add_option("--eta", ka.e.eta);
  check_cmd->add_option("--gamma", ka.e.gamma);
  check_cmd->add_option("--eps-exponent", ka.e.epsilon);
  check_cmd->add_option("--chi-star", ka.c.chi_star);
  check_cmd->add_option("--A", ka.c.A);
  check_cmd->add_option("--B", ka.c.B);
  check_cmd->add_option("--C", ka.c.C);
  check_cmd->add_option("--D", ka.c.D);
  check_cmd->add_option("--U", ka.c.U);
  check_cmd->add_option("--G", ka.c.G);
  check_cmd->add_option("--points", ka.points, "x* grid size")->check(CLI::PositiveNumber);
  check_cmd->add_option("--epsilon", ka.epsilon)->check(CLI::PositiveNumber);
  check_cmd->add_option("--out", ka.out);
  global(check_cmd);

  GhdArgs ha;
  auto* ghd_cmd = app.add_subcommand("ghd", "Evolve a density of states (CSV chi,x,rho)");
  ghd_cmd->add_option("--rho0", ha.rho0, "Initial density CSV chi,x,rho")->required()->check(CLI::ExistingFile);
  ghd_cmd->add_option("--chi-nodes", ha.chi_nodes, "Resample onto this many uniform chi nodes (0: keep)");
  ghd_cmd->add_option("--t-end", ha.t_end)->check(CLI::NonNegativeNumber);
  ghd_cmd->add_option("--cfl", ha.cfl)->check(CLI::Range(1e-6, 1.0));
  ghd_cmd->add_flag("--outflow", ha.outflow, "Outflow instead of periodic boundaries");
  ghd_cmd->add_option("--out", ha.out);
  global(ghd_cmd);

  MicroArgs ma;
  auto* micro_cmd = app.add_subcommand("micro", "Effective-position trajectories (CSV t,i,x_eff)");
  micro_cmd->add_option("--config", ma.config)->required();
  micro_cmd->add_option("--times", ma.times);
  micro_cmd->add_option("--deltaX", ma.delta_X);
  micro_cmd->add_option("--epsilon", ma.epsilon)->check(CLI::PositiveNumber);
  micro_cmd->add_option("--out", ma.out);
  global(micro_cmd);

  VerifyArgs va;
  auto* verify_cmd = app.add_subcommand("verify", "Run verification reports (JSON per report + summary.csv)");
  verify_cmd->add_option("--suite", va.suite, "all | local_form | support | fluid_cell | weak_limit");
  verify_cmd->add_option("--config", va.config);
  verify_cmd->add_option("--ladder", va.ladder, "weak_limit: configs of increasing N");
  verify_cmd->add_option("--x-star", va.x_star, "local_form: observation point (default: middle soliton)");
  verify_cmd->add_option("--offset", va.offset, "local_form: L = 2|d_i| - offset");
  verify_cmd->add_flag("--two-sided", va.two_sided, "local_form: also bound the slope from below");
  verify_cmd->add_option("--cell", va.cell, "fluid_cell: interval a b")->expected(2);
  verify_cmd->add_option("--deltaX", va.delta_X);
  verify_cmd->add_option("--Lambda", va.Lambda, "weak_limit: scaling exponent");
  verify_cmd->add_option("--k", va.k, "charge indices");
  verify_cmd->add_option("--tolerance", va.tolerance, "fluid_cell tolerance");
  verify_cmd->add_option("--epsilon", va.epsilon)->check(CLI::PositiveNumber);
  verify_cmd->add_option("--out", va.out, "Report directory");
  global(verify_cmd);

  PlotArgs pl;
  auto* plot_cmd = app.add_subcommand("plot", "Write a gnuplot script for CSV outputs");
  plot_cmd->add_option("--input", pl.inputs, "CSV files produced by field/positions/effective/ghd/micro")
      ->required()
      ->check(CLI::ExistingFile);
  plot_cmd->add_option("--png", pl.png, "Render to PNG instead of an interactive window");
  plot_cmd->add_option("--out", pl.out, "Script path (stdout if omitted)");
  global(plot_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kArgumentError;
  }

  if (threads > 0) set_thread_count(threads);
  auto* sub = app.get_subcommands().front();

  RunManifest m;
  m.command = sub->get_name();
  for (int i = 1; i < argc; ++i) m.arguments.emplace_back(argv[i]);
  m.seed = seed;
  m.threads = thread_count();
  m.started = utc_now();

  int code = kOk;
  Session session(out, m);
  try {
    if (sub == field_cmd) cmd_field(session, fa);
    else if (sub == charges_cmd) cmd_charges(session, ca);
    else if (sub == positions_cmd) cmd_positions(session, pa);
    else if (sub == effective_cmd) cmd_effective(session, ea);
    else if (sub == project_cmd) cmd_project(session, pr);
    else if (sub == gas_cmd) cmd_gas(session, ga, seed);
    else if (sub == check_cmd) cmd_check(session, ka);
    else if (sub == ghd_cmd) cmd_ghd(session, ha);
    else if (sub == micro_cmd) cmd_micro(session, ma);
    else if (sub == verify_cmd) cmd_verify(session, va);
    else if (sub == plot_cmd) cmd_plot(session, pl);
  } catch (const VerificationFailed&) {
    code = kFailedVerification;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    code = exit_code_for(e.kind());
  } catch (const json::exception& e) {
    err << "error: " << e.what() << '\n';
    code = kArgumentError;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    code = kArgumentError;
  }
  session.close();

  if (!m.outputs.empty() || !manifest_path.empty()) {
    if (manifest_path.empty()) {
      const fs::path first(m.outputs.front().path);
      manifest_path = (m.command == "verify" ? (fs::path(va.out) / "manifest.json") : fs::path(first.string() + ".manifest.json")).string();
    }
    m.exit_code = code;
    m.finished = utc_now();
    try {
      write_manifest(manifest_path, m);
    } catch (const Error& e) {
      err << "error: " << e.what() << '\n';
      if (code == kOk) code = kArgumentError;
    }
  }
  return code;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"soligas"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace soligas::cli
