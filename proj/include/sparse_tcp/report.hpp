#pragma once

#include <string>

#include <json.hpp>

#include "sparse_tcp/oracle.hpp"
#include "sparse_tcp/solve.hpp"

namespace sparse_tcp {

inline constexpr const char* kReportSchema = "sparse-tcp/1";

nlohmann::json to_json(const Vector& v);
nlohmann::json to_json(const ResidualReport& r);
nlohmann::json to_json(const SolveOptions& opts);
nlohmann::json to_json(const OracleOptions& opts);
nlohmann::json to_json(const SolveReport& r);
nlohmann::json to_json(const OracleResult& r);
nlohmann::json to_json(const LeastElementResult& r);

/// Parses a JSON array of numbers. Throws ParseError.
Vector vector_from_json(const nlohmann::json& j, const std::string& field);

/// Applies a key=value override onto the options. Returns false when the key
/// belongs to neither set; throws std::invalid_argument on a bad value.
bool apply_override(const std::string& key, const std::string& value, SolveOptions& solve,
                    OracleOptions& oracle);

}  // namespace sparse_tcp
