#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fusim/memory_model.hpp"
#include "fusim/progress.hpp"
#include "fusim/scheduler.hpp"
#include "fusim/workload.hpp"

namespace fusim {

// Duration of one fused iteration in itime.
struct IterationTimeModel {
    double base = 0.0;
    double per_token = 0.001;   // charged per fused-batch token (incl. padding)
    double per_launch = 0.0;    // charged per kernel launch in fused mode
};

struct SimConfig {
    SchedulerConfig scheduler;
    std::vector<JobSpec> jobs;
    IterationTimeModel iter_time;
    std::uint64_t seed = 0;
    double horizon = 1e9;
    bool early_stopping = true;
    double predictor_accuracy = 1.0;
    std::optional<MemoryModel> memory_model;  // used by estimates when present
};

enum class EventType {
    JobSubmitted,
    Scheduled,
    IterationDone,
    Stopped,
    Completed,
    MemorySample,
};

const char* to_string(EventType t);

struct TraceEvent {
    double time = 0.0;
    EventType type = EventType::JobSubmitted;
    std::string job_id;              // empty for batch-wide events
    long total_tokens = 0;           // IterationDone
    long padding_tokens = 0;         // IterationDone
    int jobs_in_batch = 0;           // IterationDone
    double memory_gb = 0.0;          // MemorySample
    int iteration = 0;               // Stopped / Completed
    StopCause cause = StopCause::Completed;
};

struct TimedDecision {
    double time = 0.0;
    ScheduleDecision decision;
};

struct SimTrace {
    std::vector<TraceEvent> events;
    std::vector<TimedDecision> decisions;
    std::vector<JobState> final_states;
    double makespan = 0.0;
    double busy_time = 0.0;
    long total_iterations = 0;  // fused iterations executed
    bool truncated = false;
    std::string truncation_reason;
    double memory_budget_gb = 0.0;
    double horizon = 0.0;
};

struct JobMetrics {
    std::string id;
    int priority = 1;
    double submit = 0.0;
    double start = 0.0;
    double finish = 0.0;
    double turnaround = 0.0;  // finish - submit
    double waiting = 0.0;     // start - submit
    double virtual_turnaround = 0.0;  // turnaround * priority
};

struct MetricsReport {
    std::vector<JobMetrics> jobs;
    double mean_turnaround = 0.0;
    double mean_waiting = 0.0;
    double mean_virtual_turnaround = 0.0;
    long total_tokens = 0;
    long padding_tokens = 0;
    double padding_ratio = 0.0;
    double total_throughput = 0.0;      // tokens per itime over the makespan
    double effective_throughput = 0.0;  // (1 - padding_ratio) * total
    double peak_memory_gb = 0.0;
    double mean_memory_gb = 0.0;
    double memory_occupancy = 0.0;      // mean memory / budget
    double end_to_end_latency = 0.0;    // last finish time
    double utilization = 0.0;           // busy fraction of the makespan
    long total_job_iterations = 0;      // sum of per-job iterations executed
    bool partial = false;
    bool empty = false;
};

SimTrace run_simulation(const SimConfig& config);

MetricsReport compute_metrics(const SimTrace& trace);

struct StrategyComparison {
    Strategy strategy;
    MetricsReport report;
};

// Same workload and seed for every strategy; differences are attributable to
// the strategy alone.
std::vector<StrategyComparison> compare_strategies(const SimConfig& config,
                                                   const std::vector<Strategy>& strategies);

} // namespace fusim
