#pragma once

#include <random>
#include <string>
#include <vector>

#include "fusim/sim.hpp"
#include "fusim/workload.hpp"

namespace fusim::testing {

// Heterogeneous workload: jobs draw lengths from job-specific uniform bands so
// length distributions genuinely differ across jobs.
inline std::vector<JobSpec> random_workload(std::uint64_t seed, int num_jobs = 10,
                                            bool mixed_priorities = true) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> lo_d(4, 40);
    std::uniform_int_distribution<int> spread_d(2, 12);
    std::uniform_int_distribution<int> pri_d(1, 5);
    std::uniform_int_distribution<int> iters_d(4, 16);
    std::uniform_int_distribution<int> bs_d(2, 4);
    std::uniform_int_distribution<int> items_d(8, 24);
    std::uniform_real_distribution<double> mem_d(2.0, 6.0);

    std::vector<JobSpec> jobs;
    for (int i = 0; i < num_jobs; ++i) {
        JobSpec s;
        s.id = "j" + std::to_string(i);
        s.priority = mixed_priorities ? pri_d(rng) : 1;
        s.submit_time = 0.0;
        s.batch_size = bs_d(rng);
        s.true_iterations = iters_d(rng);
        s.memory_gb = mem_d(rng);
        const int lo = lo_d(rng);
        const int hi = lo + spread_d(rng);
        std::uniform_int_distribution<int> len_d(lo, hi);
        const int items = items_d(rng);
        for (int k = 0; k < items; ++k)
            s.dataset.items.push_back(DataItem{len_d(rng)});
        s.dataset.name = s.id;
        jobs.push_back(std::move(s));
    }
    return jobs;
}

inline SimConfig base_sim_config(std::vector<JobSpec> jobs, Strategy strategy,
                                 std::uint64_t seed) {
    SimConfig cfg;
    cfg.jobs = std::move(jobs);
    cfg.scheduler.strategy = strategy;
    cfg.scheduler.memory_budget_gb = 12.0;
    cfg.scheduler.max_concurrent = 4;
    cfg.scheduler.top_k = 8;
    cfg.iter_time.base = 0.0;
    cfg.iter_time.per_token = 0.001;
    cfg.iter_time.per_launch = 0.0;
    cfg.seed = seed;
    return cfg;
}

} // namespace fusim::testing
