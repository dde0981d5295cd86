#pragma once

#include <ostream>

#include <json.hpp>

#include "sparse_tcp/instance.hpp"

namespace sparse_tcp::cli {

/// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNotSolved = 3;

/// Entry point of the sparse-tcp tool; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Evaluation points of the example's solution family.
inline constexpr double kExampleFamily[] = {0.0, 0.25, 0.5, 1.0, 2.0};

/// The example instance read as an order-3, dimension-2 tensor: only the
/// listed entries whose indices stay within {1, 2} survive.
Instance paper_example_declared();

/// Reproduction report of the worked example; deterministic.
nlohmann::json example_report();

/// One CSV row per family point.
void write_example_csv(const nlohmann::json& report, std::ostream& out);

/// Plain-text adjudication table.
void write_example_table(const nlohmann::json& report, std::ostream& out);

}  // namespace sparse_tcp::cli
