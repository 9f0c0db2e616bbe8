#include "fusim/batch_select.hpp"

#include <algorithm>
#include <numeric>

namespace fusim {

namespace {

// deterministic strategy tie-break: urgent first, then arrival, then id
bool urgency_less(const BatchCandidate& a, const BatchCandidate& b) {
    if (a.priority != b.priority) return a.priority > b.priority;
    if (a.submit_time != b.submit_time) return a.submit_time < b.submit_time;
    return a.job_id < b.job_id;
}

bool arrival_less(const BatchCandidate& a, const BatchCandidate& b) {
    if (a.submit_time != b.submit_time) return a.submit_time < b.submit_time;
    return a.job_id < b.job_id;
}

SelectionResult take_prefix(std::vector<std::size_t> order,
                            const std::vector<BatchCandidate>& candidates, int m) {
    if (static_cast<int>(order.size()) > m) order.resize(m);
    return score_subset(candidates, order);
}

} // namespace

int BatchCandidate::max_len() const {
    int m = 0;
    for (int len : item_lengths) m = std::max(m, len);
    return m;
}

long BatchCandidate::token_count() const {
    return std::accumulate(item_lengths.begin(), item_lengths.end(), 0L);
}

SelectionResult score_subset(const std::vector<BatchCandidate>& candidates,
                             const std::vector<std::size_t>& subset) {
    SelectionResult r;
    std::vector<std::vector<int>> lengths;
    for (auto i : subset) {
        r.chosen.push_back(candidates[i].job_id);
        lengths.push_back(candidates[i].item_lengths);
    }
    const FusedShape shape = fused_shape(lengths);
    r.fused_max_len = shape.max_len;
    r.total_sequences = shape.sequences;
    r.padding_tokens = shape.padding_tokens;
    r.padding_ratio = shape.padding_ratio();
    return r;
}

SelectionResult select_fifo(const std::vector<BatchCandidate>& candidates, int m) {
    if (m < 1) throw UsageError("select_fifo: M must be >= 1");
    std::vector<std::size_t> order(candidates.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return arrival_less(candidates[a], candidates[b]);
    });
    return take_prefix(std::move(order), candidates, m);
}

SelectionResult select_priority(const std::vector<BatchCandidate>& candidates, int m) {
    if (m < 1) throw UsageError("select_priority: M must be >= 1");
    std::vector<std::size_t> order(candidates.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return urgency_less(candidates[a], candidates[b]);
    });
    return take_prefix(std::move(order), candidates, m);
}

SelectionResult select_minpad(const std::vector<BatchCandidate>& candidates, int m) {
    if (m < 1) throw UsageError("select_minpad: M must be >= 1");
    const std::size_t n = candidates.size();
    if (n == 0) return {};
    const std::size_t want = std::min<std::size_t>(m, n);

    // The optimum's batch max equals some candidate's own max_len, so try each
    // candidate as the anchor. Companions must not exceed the anchor length;
    // at a fixed batch max L a candidate's padding cost is |items|*L - tokens,
    // so the cheapest companions are picked directly.
    std::vector<std::size_t> anchor_order(n);
    std::iota(anchor_order.begin(), anchor_order.end(), 0);
    std::sort(anchor_order.begin(), anchor_order.end(),
              [&](std::size_t a, std::size_t b) {
                  return urgency_less(candidates[a], candidates[b]);
              });

    bool have_best = false;
    long best_padding = 0;
    std::vector<std::size_t> best_subset;
    for (std::size_t anchor : anchor_order) {
        const int L = candidates[anchor].max_len();
        std::vector<std::size_t> eligible;
        for (std::size_t i = 0; i < n; ++i)
            if (i != anchor && candidates[i].max_len() <= L) eligible.push_back(i);
        if (eligible.size() + 1 < want) continue;

        auto cost = [&](std::size_t i) {
            return static_cast<long>(candidates[i].item_lengths.size()) * L -
                   candidates[i].token_count();
        };
        std::sort(eligible.begin(), eligible.end(), [&](std::size_t a, std::size_t b) {
            const long ca = cost(a), cb = cost(b);
            if (ca != cb) return ca < cb;
            return urgency_less(candidates[a], candidates[b]);
        });
        std::vector<std::size_t> subset{anchor};
        subset.insert(subset.end(), eligible.begin(), eligible.begin() + (want - 1));

        long padding = 0;
        for (auto i : subset) padding += cost(i);
        if (!have_best || padding < best_padding) {
            have_best = true;
            best_padding = padding;
            best_subset = std::move(subset);
        }
    }

    std::sort(best_subset.begin(), best_subset.end(), [&](std::size_t a, std::size_t b) {
        return urgency_less(candidates[a], candidates[b]);
    });
    return score_subset(candidates, best_subset);
}

SelectionResult brute_force_min_padding(const std::vector<BatchCandidate>& candidates,
                                        int m) {
    if (m < 1) throw UsageError("brute_force_min_padding: M must be >= 1");
    const std::size_t n = candidates.size();
    if (n > 20) throw UsageError("brute_force_min_padding: too many candidates");
    if (n == 0) return {};
    const std::size_t want = std::min<std::size_t>(m, n);

    bool have_best = false;
    SelectionResult best;
    std::vector<std::size_t> subset;
    // enumerate all size-want index combinations
    auto recurse = [&](auto&& self, std::size_t start) -> void {
        if (subset.size() == want) {
            SelectionResult r = score_subset(candidates, subset);
            if (!have_best || r.padding_tokens < best.padding_tokens) {
                have_best = true;
                best = std::move(r);
            }
            return;
        }
        for (std::size_t i = start; i < n; ++i) {
            subset.push_back(i);
            self(self, i + 1);
            subset.pop_back();
        }
    };
    recurse(recurse, 0);
    return best;
}

OptimalBatchPicker::OptimalBatchPicker(
    const std::map<std::string, std::vector<int>>& per_job_lengths, PickOrder order) {
    for (const auto& [job, lengths] : per_job_lengths) {
        JobQueue q;
        q.sorted_lengths = lengths;
        std::sort(q.sorted_lengths.begin(), q.sorted_lengths.end());
        if (order == PickOrder::Longest)
            std::reverse(q.sorted_lengths.begin(), q.sorted_lengths.end());
        jobs_[job] = std::move(q);
    }
}

bool OptimalBatchPicker::exhausted() const {
    for (const auto& [job, q] : jobs_)
        if (q.next < q.sorted_lengths.size()) return false;
    return true;
}

std::map<std::string, int> OptimalBatchPicker::pick() {
    std::map<std::string, int> out;
    for (auto& [job, q] : jobs_) {
        if (q.next < q.sorted_lengths.size()) out[job] = q.sorted_lengths[q.next++];
    }
    return out;
}

} // namespace fusim
