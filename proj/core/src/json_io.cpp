#include "soligas/json_io.hpp"

#include <fstream>

#include "soligas/error.hpp"

namespace soligas {

void to_json(json& j, const SolitonConfig& c) { j = json{{"chi", c.chi()}, {"y", c.y()}}; }

void from_json(const json& j, SolitonConfig& c) {
  if (!j.is_object() || !j.contains("chi") || !j.contains("y"))
    throw Error(ErrorKind::InvalidArgument, "config JSON needs arrays \"chi\" and \"y\"");
  c = SolitonConfig(j.at("chi").get<std::vector<double>>(), j.at("y").get<std::vector<double>>());
}

void to_json(json& j, const TheoremReport& r) {
  j = json{{"theorem", r.theorem}, {"measured", r.measured}, {"bound", r.bound},
           {"series", r.series},   {"metadata", r.metadata}, {"pass", r.pass}};
}

void from_json(const json& j, TheoremReport& r) {
  r.theorem = j.at("theorem").get<std::string>();
  r.measured = j.at("measured").get<std::map<std::string, double>>();
  r.bound = j.at("bound").get<std::map<std::string, double>>();
  r.series = j.value("series", std::map<std::string, std::vector<double>>{});
  r.metadata = j.value("metadata", std::map<std::string, std::string>{});
  r.pass = j.at("pass").get<bool>();
}

void to_json(json& j, const PositionSolution& s) {
  std::vector<std::string> pat;
  for (auto p : s.pattern) pat.emplace_back(to_string(p));
  j = json{{"x_star", s.x_star}, {"X", s.X},         {"d", s.d},
           {"pattern", pat},     {"residual", s.residual}, {"iterations", s.iterations},
           {"method", s.method}};
}

void to_json(json& j, const EffectiveSolution& e) {
  j = json{{"delta_X", e.delta_X},
           {"x_left", e.x_left},
           {"x_right", e.x_right},
           {"x_eff", e.x_eff},
           {"delta_x", e.delta_x},
           {"scan",
            {{"x_begin", e.scan.x_begin},
             {"x_end", e.scan.x_end},
             {"segments", e.scan.segments},
             {"folds", e.scan.folds},
             {"events", e.scan.events},
             {"tol_x", e.scan.tol_x},
             {"converged", e.scan.converged}}}};
}

void to_json(json& j, const BetheReport& b) {
  j = json{{"delta", b.delta}, {"slack", b.slack}, {"bound", b.bound}, {"worst_excess", b.worst_excess}, {"pass", b.pass}};
}

void to_json(json& j, const ProjectionResult& p) {
  j = json{{"kept", p.kept},
           {"removed_right", p.removed_right},
           {"removed_left", p.removed_left},
           {"config", p.config_out},
           {"method", to_string(p.method)},
           {"x_star", p.x_star},
           {"cell", {p.cell.first, p.cell.second}},
           {"delta_X", p.delta_X}};
  if (p.method == ProjectionMethod::FluidCell) {
    j["effective"] = p.effective;
    j["explicit_checked"] = p.explicit_checked;
    j["explicit_deviation"] = p.explicit_deviation;
    j["core_inclusion"] = p.core_inclusion;
    j["core_margin"] = p.core_margin;
  }
}

void to_json(json& j, const AssumptionReport& r) {
  j = json{{"n", r.n},
           {"spectral",
            {{"min_chi", r.spectral.min_chi},
             {"min_gap", r.spectral.min_gap},
             {"max_chi", r.spectral.max_chi},
             {"gap_bound", r.spectral.gap_bound},
             {"max_bound", r.spectral.max_bound},
             {"pass", r.spectral.pass}}},
           {"accumulation", {{"max_small", r.max_small}, {"bound", r.small_bound}, {"pass", r.accumulation_ok}}},
           {"density",
            {{"max_rho_d", r.max_density},
             {"bound", r.density_bound},
             {"d_min", r.density_d_min},
             {"worst_x_star", r.worst_x_star},
             {"pass", r.density_ok}}},
           {"variations", {{"delta_x", r.delta_x}, {"bound", r.variation_bound}, {"pass", r.variation_ok}}},
           {"grid_points", r.grid_points},
           {"failed_x_star", r.failed_x_star},
           {"pass", r.pass()}};
}

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::InvalidArgument, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, path + ": " + e.what());
  }
}

SolitonConfig load_config(const std::string& path) { return load_json(path).get<SolitonConfig>(); }

void save_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write " + path);
  out << j.dump(2) << '\n';
}

}  // namespace soligas
