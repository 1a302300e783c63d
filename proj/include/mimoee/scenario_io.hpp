#pragma once

// JSON encoding of scenarios and profiles. Complex entries are [re, im]
// pairs, matrices are arrays of rows. Doubles are written in shortest
// round-trip form, so read(write(x)) reproduces every bit.

#include <filesystem>
#include <string>

#include <json.hpp>

#include "mimoee/game_model.hpp"

namespace mimoee {

nlohmann::json matrix_to_json(const ComplexMatrix& m);
ComplexMatrix matrix_from_json(const nlohmann::json& j);

nlohmann::json real_matrix_to_json(const RealMatrix& m);
nlohmann::json vector_to_json(const RealVector& v);

/// {Q, nT, nR, H, Rn, P, Psi, seed} plus an optional "meta" object.
nlohmann::json scenario_to_json(const NetworkScenario& s);
NetworkScenario scenario_from_json(const nlohmann::json& j);

nlohmann::json profile_to_json(const StrategyProfile& p);
StrategyProfile profile_from_json(const nlohmann::json& j);

void write_scenario_file(const NetworkScenario& s, const std::filesystem::path& path);
NetworkScenario read_scenario_file(const std::filesystem::path& path);

/// Reads and parses a JSON file; throws InvalidInput on I/O or parse errors.
nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace mimoee
