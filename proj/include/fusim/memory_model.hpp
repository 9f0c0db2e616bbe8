#pragma once

#include <utility>
#include <vector>

#include "fusim/errors.hpp"

namespace fusim {

struct MemSample {
    int batch_size = 1;
    int seq_len = 1;
    double mem_gb = 0.0;
};

// Fitted coefficients of M = b0 + b1*Bt*Ln + b2*Bt*Ln^2.
struct MemoryModel {
    double beta0 = 0.0;
    double beta1 = 0.0;
    double beta2 = 0.0;
    double rmse = 0.0;
    int sample_count = 0;
};

enum class FitConstraint { Unconstrained, NonNegative };

// Linear least squares on features (1, Bt*Ln, Bt*Ln^2); the model is linear
// in its coefficients so this reaches the same optimum as a nonlinear solver.
// NonNegative mode solves the constrained problem exactly by active-set
// enumeration over the three coefficients.
// Requires >= 3 samples spanning >= 3 distinct Bt*Ln values, else FitError.
MemoryModel fit_memory_model(const std::vector<MemSample>& samples,
                             FitConstraint constraint = FitConstraint::Unconstrained);

// Raw model evaluation; may go negative out of the fitted domain.
double predict_memory(const MemoryModel& model, int batch_size, int seq_len);

// Evaluation clamped to floor_gb; sets *clamped when the raw value fell below.
double predict_memory_clamped(const MemoryModel& model, int batch_size, int seq_len,
                              double floor_gb, bool* clamped = nullptr);

struct PackingQuery {
    std::vector<double> item_mem_gb;
    double budget_gb = 0.0;
};

// Subset feasibility: sum of members <= budget (1e-9 GB slack for
// floating-point accumulation).
bool feasible(const PackingQuery& query, const std::vector<std::size_t>& subset);

// Feasible subset maximizing total memory (indices, ascending). Exact for up
// to 30 items via a 0.01 GB-granularity subset-sum DP (item sizes rounded up,
// budget rounded down, so the result is always feasible in real GB); larger
// inputs fall back to the greedy first-fit packer.
std::vector<std::size_t> max_packing(const PackingQuery& query);
std::vector<std::size_t> max_packing_greedy(const PackingQuery& query);

struct WarmupPlan {
    std::vector<std::pair<int, int>> probes;  // (batch_size, seq_len)
    bool sufficient = false;  // >= 3 distinct Bt*Ln values, enough to fit
};

// Cross-product probe schedule for the pre-training data-collection phase.
WarmupPlan warmup_plan(const std::vector<int>& batch_sizes,
                       const std::vector<int>& seq_lens);

} // namespace fusim
