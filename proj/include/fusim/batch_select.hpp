#pragma once

#include <map>
#include <string>
#include <vector>

#include "fusim/errors.hpp"
#include "fusim/lora.hpp"

namespace fusim {

// Snapshot of one job's next candidate batch, as seen by a selection strategy.
struct BatchCandidate {
    std::string job_id;
    std::vector<int> item_lengths;
    int priority = 1;
    double submit_time = 0.0;

    int max_len() const;
    long token_count() const;
};

struct SelectionResult {
    std::vector<std::string> chosen;  // distinct, |chosen| <= M
    int fused_max_len = 0;
    long total_sequences = 0;
    long padding_tokens = 0;
    double padding_ratio = 0.0;       // padding_tokens / (sequences * max_len)
};

// Padding cost of fusing exactly this subset of candidates.
SelectionResult score_subset(const std::vector<BatchCandidate>& candidates,
                             const std::vector<std::size_t>& subset);

// First M in arrival order (submit asc, id asc).
SelectionResult select_fifo(const std::vector<BatchCandidate>& candidates, int m);

// Top M by (priority desc, submit asc, id asc).
SelectionResult select_priority(const std::vector<BatchCandidate>& candidates, int m);

// Size-min(M,n) subset minimizing fused padding tokens. Exact: every candidate
// is tried as the batch-max anchor and the cheapest companions at that anchor
// length are taken. Ties go to (priority desc, submit asc, id asc).
SelectionResult select_minpad(const std::vector<BatchCandidate>& candidates, int m);

// Exhaustive minimum over all size-min(M,n) subsets. Test oracle; guarded to
// at most 20 candidates.
SelectionResult brute_force_min_padding(const std::vector<BatchCandidate>& candidates, int m);

enum class PickOrder { Shortest, Longest };

// Length-sorted per-job consumption: each pick() returns the current extreme
// remaining item of every job and advances past it. Minimizes padding but
// feeds each job its data in sorted order, which is hostile to convergence;
// kept for analysis and tests.
class OptimalBatchPicker {
public:
    OptimalBatchPicker(const std::map<std::string, std::vector<int>>& per_job_lengths,
                       PickOrder order);

    bool exhausted() const;
    // job id -> picked length, for every job with data remaining
    std::map<std::string, int> pick();

private:
    struct JobQueue {
        std::vector<int> sorted_lengths;
        std::size_t next = 0;
    };
    std::map<std::string, JobQueue> jobs_;
};

} // namespace fusim
