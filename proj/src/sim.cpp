#include "fusim/sim.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "fusim/lora.hpp"

namespace fusim {

const char* to_string(EventType t) {
    switch (t) {
        case EventType::JobSubmitted: return "job_submitted";
        case EventType::Scheduled: return "scheduled";
        case EventType::IterationDone: return "iteration_done";
        case EventType::Stopped: return "stopped";
        case EventType::Completed: return "completed";
        case EventType::MemorySample: return "memory_sample";
    }
    return "unknown";
}

namespace {

struct Engine {
    const SimConfig& config;
    SimTrace trace;
    std::vector<JobState> states;
    Scheduler scheduler;
    IterationPredictor predictor;
    std::size_t next_arrival = 0;  // index into states sorted by submit time
    double clock = 0.0;

    explicit Engine(const SimConfig& cfg)
        : config(cfg),
          scheduler(cfg.scheduler),
          predictor(cfg.predictor_accuracy, cfg.seed) {
        for (const auto& spec : cfg.jobs) {
            spec.validate();
            states.emplace_back(spec);
        }
        std::sort(states.begin(), states.end(), [](const JobState& a, const JobState& b) {
            if (a.spec.submit_time != b.spec.submit_time)
                return a.spec.submit_time < b.spec.submit_time;
            return a.spec.id < b.spec.id;
        });
        trace.memory_budget_gb = cfg.scheduler.memory_budget_gb;
        trace.horizon = cfg.horizon;
    }

    void emit(TraceEvent ev) { trace.events.push_back(std::move(ev)); }

    void ingest_arrivals() {
        while (next_arrival < states.size() &&
               states[next_arrival].spec.submit_time <= clock + 1e-12) {
            TraceEvent ev;
            ev.time = states[next_arrival].spec.submit_time;
            ev.type = EventType::JobSubmitted;
            ev.job_id = states[next_arrival].spec.id;
            emit(std::move(ev));
            ++next_arrival;
        }
    }

    std::vector<JobState*> active_jobs() {
        std::vector<JobState*> out;
        for (std::size_t i = 0; i < next_arrival; ++i)
            if (!states[i].finished()) out.push_back(&states[i]);
        return out;
    }

    void finalize_job(JobState& js, StopCause cause) {
        js.status = cause == StopCause::Completed ? JobStatus::Completed
                                                  : JobStatus::Stopped;
        js.finish_time = clock;
        TraceEvent ev;
        ev.time = clock;
        ev.type = cause == StopCause::Completed ? EventType::Completed
                                                : EventType::Stopped;
        ev.job_id = js.spec.id;
        ev.iteration = js.iterations_done;
        ev.cause = cause;
        emit(std::move(ev));
        scheduler.on_stop_event({js.spec.id, js.iterations_done, cause});
    }

    // stream-scripted early stop that fires exactly at the current iteration
    std::optional<StopCause> stream_stop(const JobState& js) const {
        if (!config.early_stopping) return std::nullopt;
        const int it = js.iterations_done;
        std::vector<double> losses(
            js.spec.loss_stream.begin(),
            js.spec.loss_stream.begin() +
                std::min<std::size_t>(it, js.spec.loss_stream.size()));
        std::vector<double> accs(
            js.spec.accuracy_stream.begin(),
            js.spec.accuracy_stream.begin() +
                std::min<std::size_t>(it, js.spec.accuracy_stream.size()));
        const auto ev = detect_stop(js.spec.id, losses, accs);
        if (ev && ev->iteration <= it) return ev->cause;
        return std::nullopt;
    }

    void run() {
        const MemoryModel* model =
            config.memory_model ? &*config.memory_model : nullptr;
        while (true) {
            ingest_arrivals();
            auto active = active_jobs();
            if (active.empty()) {
                if (next_arrival >= states.size()) break;  // all done
                clock = states[next_arrival].spec.submit_time;
                continue;
            }
            if (clock > config.horizon) {
                trace.truncated = true;
                trace.truncation_reason = "horizon_exceeded";
                break;
            }

            std::vector<const JobState*> queue(active.begin(), active.end());
            ScheduleDecision decision = scheduler.decide(queue, model, &predictor);
            trace.decisions.push_back({clock, decision});

            if (decision.selected.empty()) {
                if (next_arrival < states.size()) {
                    clock = states[next_arrival].spec.submit_time;
                    continue;
                }
                trace.truncated = true;
                trace.truncation_reason = "budget_exhausted";
                break;
            }

            std::vector<JobState*> running;
            for (const auto& id : decision.selected) {
                auto it = std::find_if(active.begin(), active.end(),
                                       [&](JobState* js) { return js->spec.id == id; });
                running.push_back(*it);
            }

            for (JobState* js : running) {
                if (js->status == JobStatus::Pending) {
                    js->status = JobStatus::Running;
                    js->start_time = clock;
                    TraceEvent ev;
                    ev.time = clock;
                    ev.type = EventType::Scheduled;
                    ev.job_id = js->spec.id;
                    emit(std::move(ev));
                }
            }

            {
                TraceEvent ev;
                ev.time = clock;
                ev.type = EventType::MemorySample;
                ev.memory_gb = decision.estimated_memory_gb;
                emit(std::move(ev));
            }

            // one fused iteration over the selected set
            std::vector<std::vector<int>> lengths;
            std::vector<std::size_t> batch_counts;
            for (JobState* js : running) {
                std::vector<int> ls;
                for (const auto& item : js->next_candidate_batch())
                    ls.push_back(item.length);
                batch_counts.push_back(ls.size());
                lengths.push_back(std::move(ls));
            }
            const FusedShape shape = fused_shape(lengths);
            const long launches =
                count_launches(static_cast<int>(running.size()), LaunchMode::Fused)
                    .total();
            const double duration = config.iter_time.base +
                                    config.iter_time.per_token * shape.total_tokens +
                                    config.iter_time.per_launch * launches;

            clock += duration;
            trace.busy_time += duration;
            ++trace.total_iterations;

            TraceEvent ev;
            ev.time = clock;
            ev.type = EventType::IterationDone;
            ev.total_tokens = shape.total_tokens;
            ev.padding_tokens = shape.padding_tokens;
            ev.jobs_in_batch = static_cast<int>(running.size());
            emit(std::move(ev));

            for (std::size_t i = 0; i < running.size(); ++i) {
                JobState* js = running[i];
                js->commit_batch(batch_counts[i]);
                ++js->iterations_done;

                if (const auto cause = stream_stop(*js)) {
                    finalize_job(*js, *cause);
                    continue;
                }
                const int bound = js->iteration_bound(config.early_stopping);
                if (js->iterations_done >= bound) {
                    const bool early = bound < js->spec.true_iterations;
                    finalize_job(*js,
                                 early ? StopCause::AccuracyDecline : StopCause::Completed);
                }
            }
        }
        trace.makespan = clock;
        trace.final_states = states;
    }
};

} // namespace

SimTrace run_simulation(const SimConfig& config) {
    config.scheduler.validate();
    if (config.horizon <= 0) throw ConfigError("simulation horizon must be > 0");
    if (config.iter_time.base < 0 || config.iter_time.per_token < 0 ||
        config.iter_time.per_launch < 0)
        throw ConfigError("iteration time costs must be >= 0");
    Engine engine(config);
    engine.run();
    return std::move(engine.trace);
}

MetricsReport compute_metrics(const SimTrace& trace) {
    MetricsReport r;
    r.partial = trace.truncated;
    if (trace.events.empty() && trace.final_states.empty()) {
        r.empty = true;
        return r;
    }

    double mem_sum = 0.0;
    long mem_samples = 0;
    for (const auto& ev : trace.events) {
        switch (ev.type) {
            case EventType::IterationDone:
                r.total_tokens += ev.total_tokens;
                r.padding_tokens += ev.padding_tokens;
                r.total_job_iterations += ev.jobs_in_batch;
                break;
            case EventType::MemorySample:
                r.peak_memory_gb = std::max(r.peak_memory_gb, ev.memory_gb);
                mem_sum += ev.memory_gb;
                ++mem_samples;
                break;
            default:
                break;
        }
    }
    if (mem_samples > 0) r.mean_memory_gb = mem_sum / mem_samples;
    if (trace.memory_budget_gb > 0)
        r.memory_occupancy = r.mean_memory_gb / trace.memory_budget_gb;

    r.padding_ratio = r.total_tokens == 0
                          ? 0.0
                          : static_cast<double>(r.padding_tokens) / r.total_tokens;
    if (trace.makespan > 0) {
        r.total_throughput = static_cast<double>(r.total_tokens) / trace.makespan;
        r.utilization = trace.busy_time / trace.makespan;
    }
    r.effective_throughput = (1.0 - r.padding_ratio) * r.total_throughput;

    double tt_sum = 0, wt_sum = 0, vtt_sum = 0;
    for (const auto& js : trace.final_states) {
        if (!js.finished()) {
            r.partial = true;
            continue;
        }
        JobMetrics jm;
        jm.id = js.spec.id;
        jm.priority = js.spec.priority;
        jm.submit = js.spec.submit_time;
        jm.start = js.start_time.value_or(jm.submit);
        jm.finish = js.finish_time.value_or(jm.start);
        jm.turnaround = jm.finish - jm.submit;
        jm.waiting = jm.start - jm.submit;
        jm.virtual_turnaround = jm.turnaround * js.spec.priority;
        tt_sum += jm.turnaround;
        wt_sum += jm.waiting;
        vtt_sum += jm.virtual_turnaround;
        r.end_to_end_latency = std::max(r.end_to_end_latency, jm.finish);
        r.jobs.push_back(std::move(jm));
    }
    if (!r.jobs.empty()) {
        r.mean_turnaround = tt_sum / r.jobs.size();
        r.mean_waiting = wt_sum / r.jobs.size();
        r.mean_virtual_turnaround = vtt_sum / r.jobs.size();
    }
    return r;
}

std::vector<StrategyComparison> compare_strategies(const SimConfig& config,
                                                   const std::vector<Strategy>& strategies) {
    std::vector<StrategyComparison> out;
    out.reserve(strategies.size());
    for (Strategy s : strategies) {
        SimConfig c = config;
        c.scheduler.strategy = s;
        out.push_back({s, compute_metrics(run_simulation(c))});
    }
    return out;
}

} // namespace fusim
