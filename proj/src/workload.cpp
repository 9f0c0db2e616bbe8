#include "fusim/workload.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fusim {

int DatasetProfile::max_length() const {
    int m = 0;
    for (const auto& it : items) m = std::max(m, it.length);
    return m;
}

void JobSpec::validate() const {
    if (id.empty()) throw ConfigError("job id must be non-empty");
    if (priority < 1) throw ConfigError("job " + id + ": priority must be >= 1");
    if (batch_size < 1) throw ConfigError("job " + id + ": batch_size must be >= 1");
    if (lora_rank < 1) throw ConfigError("job " + id + ": lora_rank must be >= 1");
    if (true_iterations < 1)
        throw ConfigError("job " + id + ": true_iterations must be >= 1");
    if (early_stop_iteration) {
        if (*early_stop_iteration < 1 || *early_stop_iteration > true_iterations)
            throw ConfigError("job " + id +
                              ": early_stop_iteration must lie in [1, true_iterations]");
    }
    if (memory_gb < 0) throw ConfigError("job " + id + ": memory_gb must be >= 0");
    if (dataset.items.empty())
        throw ConfigError("job " + id + ": dataset must be non-empty");
    for (const auto& it : dataset.items)
        if (it.length < 1)
            throw ConfigError("job " + id + ": data item lengths must be >= 1");
}

const char* to_string(JobStatus s) {
    switch (s) {
        case JobStatus::Pending: return "pending";
        case JobStatus::Running: return "running";
        case JobStatus::Stopped: return "stopped";
        case JobStatus::Completed: return "completed";
    }
    return "unknown";
}

int JobState::iteration_bound(bool early_stopping) const {
    if (early_stopping && spec.early_stop_iteration) return *spec.early_stop_iteration;
    return spec.true_iterations;
}

std::vector<DataItem> JobState::next_candidate_batch() const {
    if (finished())
        throw StateError("job " + spec.id + " is " + to_string(status) +
                         "; no further batches");
    const auto n = spec.dataset.items.size();
    const std::size_t pos = cursor % n;
    const std::size_t take = std::min<std::size_t>(spec.batch_size, n - pos);
    std::vector<DataItem> out(spec.dataset.items.begin() + pos,
                              spec.dataset.items.begin() + pos + take);
    return out;
}

void JobState::commit_batch(std::size_t n) {
    const auto size = spec.dataset.items.size();
    cursor += n;
    if (cursor >= size) cursor = 0;  // epoch boundary: wrap and re-read
}

void LengthDistribution::validate() const {
    switch (family) {
        case LengthFamily::Uniform:
        case LengthFamily::NormalTruncated:
            if (min_len < 1) throw ConfigError("min_len must be >= 1");
            if (max_len < min_len) throw ConfigError("max_len must be >= min_len");
            if (family == LengthFamily::NormalTruncated && stddev <= 0)
                throw ConfigError("stddev must be positive");
            break;
        case LengthFamily::EmpiricalHistogram: {
            if (histogram.empty()) throw ConfigError("empirical histogram is empty");
            for (const auto& [len, count] : histogram) {
                if (len < 1) throw ConfigError("histogram lengths must be >= 1");
                if (count < 1) throw ConfigError("histogram counts must be >= 1");
            }
            break;
        }
    }
}

std::vector<int> sample_lengths(const LengthDistribution& dist, int count,
                                std::mt19937_64& rng) {
    dist.validate();
    if (count < 1) throw ConfigError("sample count must be >= 1");
    std::vector<int> out;
    out.reserve(count);
    switch (dist.family) {
        case LengthFamily::Uniform: {
            std::uniform_int_distribution<int> d(dist.min_len, dist.max_len);
            for (int i = 0; i < count; ++i) out.push_back(d(rng));
            break;
        }
        case LengthFamily::NormalTruncated: {
            std::normal_distribution<double> d(dist.mean, dist.stddev);
            for (int i = 0; i < count; ++i) {
                int v = static_cast<int>(std::lround(d(rng)));
                out.push_back(std::clamp(v, dist.min_len, dist.max_len));
            }
            break;
        }
        case LengthFamily::EmpiricalHistogram: {
            // Expand the histogram once; draws cycle whole multisets so that
            // taking exactly the histogram total reproduces it exactly.
            std::vector<int> pool;
            for (const auto& [len, c] : dist.histogram)
                pool.insert(pool.end(), c, len);
            while (static_cast<int>(out.size()) < count) {
                std::vector<int> round = pool;
                std::shuffle(round.begin(), round.end(), rng);
                const int need = count - static_cast<int>(out.size());
                const int take = std::min<int>(need, static_cast<int>(round.size()));
                out.insert(out.end(), round.begin(), round.begin() + take);
            }
            break;
        }
    }
    return out;
}

std::vector<JobSpec> generate_workload(const WorkloadConfig& config) {
    std::mt19937_64 rng(config.seed);
    std::vector<JobSpec> jobs;
    jobs.reserve(config.jobs.size());
    for (const auto& entry : config.jobs) {
        JobSpec spec = entry.spec;
        if (entry.generate) {
            const auto lengths =
                sample_lengths(entry.generate->dist, entry.generate->count, rng);
            spec.dataset.items.clear();
            spec.dataset.items.reserve(lengths.size());
            for (int len : lengths) spec.dataset.items.push_back(DataItem{len});
        }
        spec.validate();
        jobs.push_back(std::move(spec));
    }
    return jobs;
}

} // namespace fusim
