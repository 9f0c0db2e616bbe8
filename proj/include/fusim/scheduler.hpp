#pragma once

#include <map>
#include <string>
#include <vector>

#include "fusim/memory_model.hpp"
#include "fusim/progress.hpp"
#include "fusim/workload.hpp"

namespace fusim {

enum class Strategy { FifoM1, PriorityM2, MinPadM3, AdaptiveM4 };

const char* to_string(Strategy s);
Strategy strategy_from_string(const std::string& name);  // ConfigError on unknown

struct SchedulerConfig {
    Strategy strategy = Strategy::AdaptiveM4;
    int top_k = 4;                 // adaptive window size
    double memory_budget_gb = 1.0;
    int max_concurrent = 4;
    bool pack_admission = false;   // M4 variant: max_packing instead of greedy
    double refit_epsilon = 0.01;   // relative coefficient change that forces a reschedule
    double memory_floor_gb = 0.1;  // clamp floor for model estimates

    void validate() const;
};

struct ScheduleDecision {
    std::vector<std::string> selected;  // admission order
    double estimated_memory_gb = 0.0;
    std::map<std::string, double> per_job_memory_gb;
    std::map<std::string, int> predicted_remaining;  // M4 only
    Strategy strategy = Strategy::FifoM1;
    std::vector<std::string> reason_codes;
};

// Per-job memory estimate: fitted model when available (batch size x the
// dataset's longest sequence, clamped), else the job's static footprint.
double estimate_job_memory(const JobState& job, const MemoryModel* model,
                           const SchedulerConfig& config);

// One scheduling decision over the current queue. Pure given its inputs
// except for the predictor's cached draws.
ScheduleDecision schedule(const std::vector<const JobState*>& queue,
                          const SchedulerConfig& config,
                          const MemoryModel* model,
                          IterationPredictor* predictor);

// Event-driven reschedule bookkeeping: stop events and significant memory
// model updates mark the scheduler dirty; the simulator re-plans on the next
// step and clears the flag.
class Scheduler {
public:
    explicit Scheduler(SchedulerConfig config);

    const SchedulerConfig& config() const { return config_; }

    ScheduleDecision decide(const std::vector<const JobState*>& queue,
                            const MemoryModel* model,
                            IterationPredictor* predictor);

    void on_stop_event(const StopEvent& event);
    // dirty only if some coefficient moved more than refit_epsilon relative
    void on_model_update(const MemoryModel& previous, const MemoryModel& fresh);

    bool needs_reschedule() const { return dirty_; }
    void clear_dirty() { dirty_ = false; }

private:
    SchedulerConfig config_;
    bool dirty_ = true;  // nothing planned yet
};

} // namespace fusim
