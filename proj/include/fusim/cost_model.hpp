#pragma once

#include "fusim/errors.hpp"

namespace fusim {

// GPU memory footprint components, all in GB.
struct MemoryFootprint {
    double base_weights_gb = 0.0;      // pretrained model, shared when fused
    double adapter_gb = 0.0;           // one low-rank adapter
    double per_job_overhead_gb = 0.0;  // per-job training overhead
};

struct CostReport {
    int jobs = 0;
    double total_no_share_gb = 0.0;
    double total_shared_gb = 0.0;
    double memory_saved_gb = 0.0;        // (k-1) * base weights
    double launch_saving_fraction = 0.0; // (2k-2)/(4k)
};

// shared=false: k*(Wp+Wl+We); shared=true: Wp + k*(Wl+We)
double memory_cost(const MemoryFootprint& fp, int jobs, bool shared);

// Fraction of launch cost removed by fusing, (2k-2)/(4k + ...). large_weight
// scales the cost of a large launch relative to a small one (default: equal).
double launch_saving(int jobs, double large_weight = 1.0);

CostReport cost_report(const MemoryFootprint& fp, int jobs);

} // namespace fusim
