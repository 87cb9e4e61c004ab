#pragma once

#include <string>

#include <json.hpp>

#include "soligas/effective.hpp"
#include "soligas/gas.hpp"
#include "soligas/model.hpp"
#include "soligas/positions.hpp"
#include "soligas/projections.hpp"
#include "soligas/verify.hpp"

namespace soligas {

using json = nlohmann::json;

// {"chi": [...], "y": [...]}
void to_json(json& j, const SolitonConfig& c);
void from_json(const json& j, SolitonConfig& c);

void to_json(json& j, const TheoremReport& r);
void from_json(const json& j, TheoremReport& r);

void to_json(json& j, const PositionSolution& s);
void to_json(json& j, const EffectiveSolution& e);
void to_json(json& j, const BetheReport& b);
void to_json(json& j, const ProjectionResult& p);
void to_json(json& j, const AssumptionReport& r);

SolitonConfig load_config(const std::string& path);
void save_json(const std::string& path, const json& j);
json load_json(const std::string& path);

}  // namespace soligas
