#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "fusim/errors.hpp"

namespace fusim {

// One training example, reduced to its token count.
struct DataItem {
    int length = 1;
};

struct DatasetProfile {
    std::string name;
    std::vector<DataItem> items;

    int max_length() const;
    bool empty() const { return items.empty(); }
};

struct JobSpec {
    std::string id;
    int priority = 1;          // larger = more urgent
    double submit_time = 0.0;  // itime
    DatasetProfile dataset;
    int batch_size = 1;
    int lora_rank = 1;
    int true_iterations = 1;
    std::optional<int> early_stop_iteration;
    double memory_gb = 0.0;    // static footprint used when no fitted model exists

    // scripted per-iteration signals driving early-stop detection in simulation
    std::vector<double> loss_stream;
    std::vector<double> accuracy_stream;

    // throws ConfigError on any invariant violation
    void validate() const;
};

enum class JobStatus { Pending, Running, Stopped, Completed };

const char* to_string(JobStatus s);

struct JobState {
    JobSpec spec;
    JobStatus status = JobStatus::Pending;
    int iterations_done = 0;
    std::size_t cursor = 0;  // position into dataset, always < dataset size
    std::optional<double> start_time;
    std::optional<double> finish_time;

    explicit JobState(JobSpec s) : spec(std::move(s)) {}

    // iteration count at which the job stops: early_stop_iteration when early
    // stopping is in effect, true_iterations otherwise
    int iteration_bound(bool early_stopping) const;

    bool finished() const {
        return status == JobStatus::Stopped || status == JobStatus::Completed;
    }

    // Peek the next up-to-batch_size items without advancing the cursor.
    // Stops at the epoch boundary (a batch never straddles the wrap).
    std::vector<DataItem> next_candidate_batch() const;

    // Advance the cursor past n consumed items; wraps to 0 at the epoch end.
    void commit_batch(std::size_t n);
};

enum class LengthFamily { Uniform, NormalTruncated, EmpiricalHistogram };

struct LengthDistribution {
    LengthFamily family = LengthFamily::Uniform;
    int min_len = 1;
    int max_len = 1;
    double mean = 0.0;    // normal-truncated only
    double stddev = 1.0;  // normal-truncated only
    std::map<int, int> histogram;  // empirical only: length -> count

    void validate() const;
};

struct GeneratorSpec {
    LengthDistribution dist;
    int count = 1;
};

// Jobs whose dataset is to be synthesized carry a GeneratorSpec; jobs with
// explicit items leave it empty.
struct WorkloadConfig {
    struct Entry {
        JobSpec spec;
        std::optional<GeneratorSpec> generate;
    };
    std::vector<Entry> jobs;
    std::uint64_t seed = 0;
};

// Deterministic given config.seed; generated datasets are filled in job order.
std::vector<JobSpec> generate_workload(const WorkloadConfig& config);

std::vector<int> sample_lengths(const LengthDistribution& dist, int count,
                                std::mt19937_64& rng);

} // namespace fusim
