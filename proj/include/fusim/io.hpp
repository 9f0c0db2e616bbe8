#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fusim/memory_model.hpp"
#include "fusim/sim.hpp"
#include "fusim/workload.hpp"

#include "json.hpp"

namespace fusim {

// Field names for all file formats are documented in docs/schema.md.

nlohmann::json job_spec_to_json(const JobSpec& spec);
WorkloadConfig::Entry job_entry_from_json(const nlohmann::json& j);

// JSON Lines, one job per line. Generator-backed datasets are materialized
// with the given seed.
std::vector<JobSpec> load_workload_jsonl(const std::filesystem::path& path,
                                         std::uint64_t seed);
void save_workload_jsonl(const std::filesystem::path& path,
                         const std::vector<JobSpec>& jobs);

// CSV with header batch_size,seq_len,mem_gb.
std::vector<MemSample> load_mem_samples_csv(const std::filesystem::path& path);
void save_mem_samples_csv(const std::filesystem::path& path,
                          const std::vector<MemSample>& samples);

nlohmann::json memory_model_to_json(const MemoryModel& model);
MemoryModel memory_model_from_json(const nlohmann::json& j);
void save_memory_model(const std::filesystem::path& path, const MemoryModel& model);
MemoryModel load_memory_model(const std::filesystem::path& path);

// Experiment spec: one JSON document naming the workload, scheduler settings,
// timing model, and strategies to compare.
struct ExperimentSpec {
    std::string name;
    SimConfig config;
    std::vector<Strategy> strategies;
};

// seed_override replaces the spec's seed before any dataset generation.
ExperimentSpec load_experiment_spec(const std::filesystem::path& path,
                                    std::optional<std::uint64_t> seed_override = {});

nlohmann::json metrics_to_json(const MetricsReport& report);
std::string metrics_to_csv(const MetricsReport& report);
std::string comparison_to_csv(const std::vector<StrategyComparison>& rows);

void write_trace_jsonl(const std::filesystem::path& path, const SimTrace& trace);
void write_decisions_jsonl(const std::filesystem::path& path, const SimTrace& trace);

// Writes to a temp file in the same directory, then renames into place.
void atomic_write(const std::filesystem::path& path, const std::string& contents);

} // namespace fusim
