#include "fusim/cost_model.hpp"

namespace fusim {

double memory_cost(const MemoryFootprint& fp, int jobs, bool shared) {
    if (jobs < 1) throw UsageError("memory_cost: need at least one job");
    const double per_job = fp.adapter_gb + fp.per_job_overhead_gb;
    if (shared) return fp.base_weights_gb + jobs * per_job;
    return jobs * fp.base_weights_gb + jobs * per_job;
}

double launch_saving(int jobs, double large_weight) {
    if (jobs < 1) throw UsageError("launch_saving: need at least one job");
    if (large_weight < 0) throw UsageError("launch_saving: weight must be >= 0");
    const double k = jobs;
    return (2.0 * k - 2.0 * large_weight) / (4.0 * k);
}

CostReport cost_report(const MemoryFootprint& fp, int jobs) {
    CostReport r;
    r.jobs = jobs;
    r.total_no_share_gb = memory_cost(fp, jobs, false);
    r.total_shared_gb = memory_cost(fp, jobs, true);
    r.memory_saved_gb = (jobs - 1) * fp.base_weights_gb;
    r.launch_saving_fraction = launch_saving(jobs);
    return r;
}

} // namespace fusim
