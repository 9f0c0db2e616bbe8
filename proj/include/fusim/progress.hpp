#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "fusim/errors.hpp"
#include "fusim/workload.hpp"

namespace fusim {

enum class StopCause { NaNLoss, AccuracyDecline, Completed };

const char* to_string(StopCause c);

struct StopEvent {
    std::string job_id;
    int iteration = 1;  // 1-based iteration at which the job stops
    StopCause cause = StopCause::Completed;
};

// Synthetic early-stopping oracle: with probability `accuracy` the prediction
// equals the job's true stopping iteration; otherwise it is drawn uniformly
// from [1, true_iterations] excluding the truth. Predictions are cached per
// job so repeated queries during a run stay consistent.
class IterationPredictor {
public:
    IterationPredictor(double accuracy, std::uint64_t seed);

    double accuracy() const { return accuracy_; }
    int predict(const JobSpec& job);

private:
    double accuracy_;
    std::mt19937_64 rng_;
    std::map<std::string, int> cache_;
};

struct ThroughputScenario {
    int total_jobs = 1;   // N
    int slots = 1;        // concurrent capacity k
    std::vector<long> iteration_counts;  // true per-job iteration counts
    double predictor_accuracy = 1.0;

    void validate() const;  // UsageError on violations
};

// Jobs per unit time when scheduling uses prediction information.
double throughput_with_prediction(const ThroughputScenario& s);

// Worst case without prediction: the k longest jobs occupy the slots.
double throughput_worst(const ThroughputScenario& s);

struct ThroughputGain {
    double tau = 0.0;
    double gain = 0.0;       // (tau-1)/(tau+1), equal to (Te-Ta)/Ta
    double t_average = 0.0;  // (Te+Tw)/2
};

// Computes the gain both ways and verifies they agree to 1e-12.
ThroughputGain throughput_gain(const ThroughputScenario& s);

struct StopPolicy {
    int patience = 3;  // consecutive non-improving accuracy evals before stop
};

// NaNLoss fires at the first non-finite loss; AccuracyDecline after `patience`
// consecutive evaluations that fail to improve on the best so far. Earliest
// trigger wins. Streams are per-iteration scalars; either may be empty.
std::optional<StopEvent> detect_stop(const std::string& job_id,
                                     const std::vector<double>& losses,
                                     const std::vector<double>& accuracies,
                                     const StopPolicy& policy = {});

} // namespace fusim
