#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qaml/report.hpp"

namespace qaml {

inline constexpr const char* kVersion = "0.1.0";

struct RunResult {
    std::string subcommand;
    nlohmann::json resolved_config;  // defaults overlaid with the user config
    std::uint64_t seed = 0;
    CsvTable table;
    std::uint64_t determinism_hash = 0;  // wall-time column excluded
    nlohmann::json summary;              // aggregates, echoed into the manifest
    // Extra artifacts (checkpoints): file name -> content.
    std::vector<std::pair<std::string, std::string>> extra_files;
};

std::vector<std::string> experiment_names();

// Validates the config against the subcommand's schema (unknown keys
// rejected), resolves defaults, and runs it. `threads` sizes the worker
// pool; trial outputs land in preallocated slots indexed by trial, so the
// thread count never changes the output bytes.
RunResult run_experiment(const std::string& subcommand, const nlohmann::json& config,
                         std::uint64_t seed, int threads);

// Writes <subcommand>.csv, <subcommand>_manifest.json, and the extra files
// into out_dir (created when missing). Returns the manifest path.
std::string write_run(const RunResult& result, const std::string& out_dir, double wall_time_s);

// fn(i) for i in [0, count) on a pool of `threads` workers. The first thrown
// exception is rethrown on the caller after all workers join.
void parallel_for(int count, int threads, const std::function<void(int)>& fn);

}  // namespace qaml
