#include "fusim/progress.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fusim {

const char* to_string(StopCause c) {
    switch (c) {
        case StopCause::NaNLoss: return "nan_loss";
        case StopCause::AccuracyDecline: return "accuracy_decline";
        case StopCause::Completed: return "completed";
    }
    return "unknown";
}

IterationPredictor::IterationPredictor(double accuracy, std::uint64_t seed)
    : accuracy_(accuracy), rng_(seed) {
    if (accuracy <= 0.0 || accuracy > 1.0)
        throw UsageError("predictor accuracy must lie in (0, 1]");
}

int IterationPredictor::predict(const JobSpec& job) {
    if (auto it = cache_.find(job.id); it != cache_.end()) return it->second;
    const int truth = job.early_stop_iteration.value_or(job.true_iterations);
    int prediction = truth;
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    if (coin(rng_) > accuracy_ && job.true_iterations > 1) {
        // wrong guess: uniform over [1, I] excluding the truth
        std::uniform_int_distribution<int> d(1, job.true_iterations - 1);
        int v = d(rng_);
        if (v >= truth) ++v;
        prediction = v;
    }
    cache_[job.id] = prediction;
    return prediction;
}

void ThroughputScenario::validate() const {
    if (slots < 1) throw UsageError("scenario: slots must be >= 1");
    if (total_jobs < slots) throw UsageError("scenario: need total_jobs >= slots");
    if (static_cast<int>(iteration_counts.size()) != total_jobs)
        throw UsageError("scenario: iteration_counts size must equal total_jobs");
    for (long L : iteration_counts)
        if (L < 1) throw UsageError("scenario: iteration counts must be >= 1");
    if (predictor_accuracy <= 0.0 || predictor_accuracy > 1.0)
        throw UsageError("scenario: accuracy must lie in (0, 1]");
}

namespace {

long top_k_sum(const ThroughputScenario& s) {
    std::vector<long> sorted = s.iteration_counts;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    return std::accumulate(sorted.begin(), sorted.begin() + s.slots, 0L);
}

} // namespace

double throughput_with_prediction(const ThroughputScenario& s) {
    s.validate();
    const double total =
        std::accumulate(s.iteration_counts.begin(), s.iteration_counts.end(), 0.0);
    return s.predictor_accuracy * s.slots * s.total_jobs / total;
}

double throughput_worst(const ThroughputScenario& s) {
    s.validate();
    return static_cast<double>(s.total_jobs) / top_k_sum(s);
}

ThroughputGain throughput_gain(const ThroughputScenario& s) {
    s.validate();
    const double te = throughput_with_prediction(s);
    const double tw = throughput_worst(s);
    const double total =
        std::accumulate(s.iteration_counts.begin(), s.iteration_counts.end(), 0.0);

    ThroughputGain g;
    g.tau = s.predictor_accuracy * s.slots * top_k_sum(s) / total;
    g.t_average = (te + tw) / 2.0;
    g.gain = (te - g.t_average) / g.t_average;
    const double closed_form = (g.tau - 1.0) / (g.tau + 1.0);
    if (std::abs(g.gain - closed_form) > 1e-12 * std::max(1.0, std::abs(closed_form)))
        throw NumericError("throughput_gain: identity check failed");
    return g;
}

std::optional<StopEvent> detect_stop(const std::string& job_id,
                                     const std::vector<double>& losses,
                                     const std::vector<double>& accuracies,
                                     const StopPolicy& policy) {
    std::optional<StopEvent> nan_event;
    for (std::size_t i = 0; i < losses.size(); ++i) {
        if (!std::isfinite(losses[i])) {
            nan_event = StopEvent{job_id, static_cast<int>(i + 1), StopCause::NaNLoss};
            break;
        }
    }

    std::optional<StopEvent> decline_event;
    if (!accuracies.empty() && policy.patience >= 1) {
        double best = accuracies[0];
        int streak = 0;
        for (std::size_t i = 1; i < accuracies.size(); ++i) {
            if (accuracies[i] <= best) {
                if (++streak == policy.patience) {
                    decline_event = StopEvent{job_id, static_cast<int>(i + 1),
                                              StopCause::AccuracyDecline};
                    break;
                }
            } else {
                best = accuracies[i];
                streak = 0;
            }
        }
    }

    if (nan_event && decline_event)
        return nan_event->iteration <= decline_event->iteration ? nan_event
                                                                : decline_event;
    return nan_event ? nan_event : decline_event;
}

} // namespace fusim
