#include "fusim/scheduler.hpp"

#include <algorithm>
#include <cmath>

#include "fusim/batch_select.hpp"

namespace fusim {

const char* to_string(Strategy s) {
    switch (s) {
        case Strategy::FifoM1: return "M1";
        case Strategy::PriorityM2: return "M2";
        case Strategy::MinPadM3: return "M3";
        case Strategy::AdaptiveM4: return "M4";
    }
    return "unknown";
}

Strategy strategy_from_string(const std::string& name) {
    if (name == "M1" || name == "fifo") return Strategy::FifoM1;
    if (name == "M2" || name == "priority") return Strategy::PriorityM2;
    if (name == "M3" || name == "minpad") return Strategy::MinPadM3;
    if (name == "M4" || name == "adaptive") return Strategy::AdaptiveM4;
    throw ConfigError("unknown strategy: " + name);
}

void SchedulerConfig::validate() const {
    if (top_k < 1) throw ConfigError("scheduler: top_k must be >= 1");
    if (memory_budget_gb <= 0) throw ConfigError("scheduler: memory budget must be > 0");
    if (max_concurrent < 1) throw ConfigError("scheduler: max_concurrent must be >= 1");
    if (memory_floor_gb < 0) throw ConfigError("scheduler: memory floor must be >= 0");
}

double estimate_job_memory(const JobState& job, const MemoryModel* model,
                           const SchedulerConfig& config) {
    if (model)
        return predict_memory_clamped(*model, job.spec.batch_size,
                                      job.spec.dataset.max_length(),
                                      config.memory_floor_gb);
    return job.spec.memory_gb;
}

namespace {

bool urgency_less(const JobState* a, const JobState* b) {
    if (a->spec.priority != b->spec.priority)
        return a->spec.priority > b->spec.priority;
    if (a->spec.submit_time != b->spec.submit_time)
        return a->spec.submit_time < b->spec.submit_time;
    return a->spec.id < b->spec.id;
}

bool arrival_less(const JobState* a, const JobState* b) {
    if (a->spec.submit_time != b->spec.submit_time)
        return a->spec.submit_time < b->spec.submit_time;
    return a->spec.id < b->spec.id;
}

// admit in the given order while the running total stays within budget
void greedy_admit(const std::vector<const JobState*>& order, const SchedulerConfig& cfg,
                  const MemoryModel* model, ScheduleDecision& out) {
    for (const JobState* js : order) {
        if (static_cast<int>(out.selected.size()) >= cfg.max_concurrent) break;
        const double mem = estimate_job_memory(*js, model, cfg);
        if (out.estimated_memory_gb + mem <= cfg.memory_budget_gb) {
            out.selected.push_back(js->spec.id);
            out.per_job_memory_gb[js->spec.id] = mem;
            out.estimated_memory_gb += mem;
        }
    }
}

} // namespace

ScheduleDecision schedule(const std::vector<const JobState*>& queue,
                          const SchedulerConfig& config,
                          const MemoryModel* model,
                          IterationPredictor* predictor) {
    config.validate();
    ScheduleDecision out;
    out.strategy = config.strategy;
    for (const JobState* js : queue)
        if (js->finished())
            throw UsageError("schedule: queue contains a finished job");
    if (queue.empty()) {
        out.reason_codes.push_back("empty_queue");
        return out;
    }

    std::vector<const JobState*> order = queue;
    switch (config.strategy) {
        case Strategy::FifoM1:
            std::sort(order.begin(), order.end(), arrival_less);
            greedy_admit(order, config, model, out);
            break;

        case Strategy::PriorityM2:
            std::sort(order.begin(), order.end(), urgency_less);
            greedy_admit(order, config, model, out);
            break;

        case Strategy::MinPadM3: {
            // minimize padding over candidates that fit the budget alone
            std::vector<const JobState*> fits;
            std::vector<BatchCandidate> candidates;
            for (const JobState* js : order) {
                const double mem = estimate_job_memory(*js, model, config);
                if (mem > config.memory_budget_gb) continue;
                BatchCandidate c;
                c.job_id = js->spec.id;
                c.priority = js->spec.priority;
                c.submit_time = js->spec.submit_time;
                for (const auto& item : js->next_candidate_batch())
                    c.item_lengths.push_back(item.length);
                candidates.push_back(std::move(c));
                fits.push_back(js);
            }
            if (!candidates.empty()) {
                const SelectionResult sel =
                    select_minpad(candidates, config.max_concurrent);
                std::vector<const JobState*> chosen;
                for (const auto& id : sel.chosen) {
                    auto it = std::find_if(fits.begin(), fits.end(),
                                           [&](const JobState* js) {
                                               return js->spec.id == id;
                                           });
                    chosen.push_back(*it);
                }
                greedy_admit(chosen, config, model, out);
            }
            break;
        }

        case Strategy::AdaptiveM4: {
            if (!predictor)
                throw UsageError("schedule: adaptive strategy needs a predictor");
            std::sort(order.begin(), order.end(), urgency_less);
            if (static_cast<int>(order.size()) > config.top_k)
                order.resize(config.top_k);
            for (const JobState* js : order) {
                const int predicted = predictor->predict(js->spec);
                out.predicted_remaining[js->spec.id] =
                    std::max(0, predicted - js->iterations_done);
            }
            std::stable_sort(order.begin(), order.end(),
                             [&](const JobState* a, const JobState* b) {
                                 const int ra = out.predicted_remaining.at(a->spec.id);
                                 const int rb = out.predicted_remaining.at(b->spec.id);
                                 if (ra != rb) return ra < rb;  // SJF
                                 return urgency_less(a, b);
                             });
            if (config.pack_admission) {
                PackingQuery q;
                q.budget_gb = config.memory_budget_gb;
                for (const JobState* js : order)
                    q.item_mem_gb.push_back(estimate_job_memory(*js, model, config));
                std::vector<const JobState*> packed;
                for (auto i : max_packing(q)) packed.push_back(order[i]);
                std::sort(packed.begin(), packed.end(),
                          [&](const JobState* a, const JobState* b) {
                              const int ra = out.predicted_remaining.at(a->spec.id);
                              const int rb = out.predicted_remaining.at(b->spec.id);
                              if (ra != rb) return ra < rb;
                              return urgency_less(a, b);
                          });
                greedy_admit(packed, config, model, out);
            } else {
                greedy_admit(order, config, model, out);
            }
            break;
        }
    }

    if (out.selected.empty())
        out.reason_codes.push_back("budget_exhausted");
    return out;
}

Scheduler::Scheduler(SchedulerConfig config) : config_(std::move(config)) {
    config_.validate();
}

ScheduleDecision Scheduler::decide(const std::vector<const JobState*>& queue,
                                   const MemoryModel* model,
                                   IterationPredictor* predictor) {
    clear_dirty();
    return schedule(queue, config_, model, predictor);
}

void Scheduler::on_stop_event(const StopEvent&) { dirty_ = true; }

void Scheduler::on_model_update(const MemoryModel& previous, const MemoryModel& fresh) {
    auto moved = [&](double a, double b) {
        const double denom = std::max({std::abs(a), std::abs(b), 1e-12});
        return std::abs(a - b) / denom > config_.refit_epsilon;
    };
    if (moved(previous.beta0, fresh.beta0) || moved(previous.beta1, fresh.beta1) ||
        moved(previous.beta2, fresh.beta2))
        dirty_ = true;
}

} // namespace fusim
