#include "doctest.h"

#include <algorithm>
#include <map>

#include "fusim/workload.hpp"

using namespace fusim;

namespace {

WorkloadConfig::Entry entry_with_generator(std::string id, LengthDistribution dist,
                                           int count) {
    WorkloadConfig::Entry e;
    e.spec.id = std::move(id);
    e.spec.dataset.name = e.spec.id;
    e.generate = GeneratorSpec{std::move(dist), count};
    return e;
}

std::vector<int> lengths_of(const JobSpec& spec) {
    std::vector<int> out;
    for (const auto& it : spec.dataset.items) out.push_back(it.length);
    return out;
}

} // namespace

TEST_CASE("degenerate uniform distribution yields constant lengths") {
    LengthDistribution d;
    d.family = LengthFamily::Uniform;
    d.min_len = 5;
    d.max_len = 5;
    WorkloadConfig cfg;
    cfg.seed = 123;
    cfg.jobs.push_back(entry_with_generator("a", d, 3));
    const auto jobs = generate_workload(cfg);
    CHECK(lengths_of(jobs[0]) == std::vector<int>{5, 5, 5});
}

TEST_CASE("generation is deterministic in the seed") {
    LengthDistribution d;
    d.family = LengthFamily::NormalTruncated;
    d.min_len = 1;
    d.max_len = 100;
    d.mean = 40;
    d.stddev = 15;
    WorkloadConfig cfg;
    cfg.seed = 777;
    cfg.jobs.push_back(entry_with_generator("a", d, 50));
    cfg.jobs.push_back(entry_with_generator("b", d, 50));

    const auto first = generate_workload(cfg);
    const auto second = generate_workload(cfg);
    REQUIRE(first.size() == second.size());
    for (std::size_t i = 0; i < first.size(); ++i)
        CHECK(lengths_of(first[i]) == lengths_of(second[i]));

    cfg.seed = 778;
    const auto other = generate_workload(cfg);
    CHECK(lengths_of(first[0]) != lengths_of(other[0]));
}

TEST_CASE("empirical histogram reproduces the multiset when count matches total") {
    LengthDistribution d;
    d.family = LengthFamily::EmpiricalHistogram;
    d.histogram = {{4, 2}, {7, 1}};
    for (std::uint64_t seed : {1ULL, 2ULL, 99ULL}) {
        WorkloadConfig cfg;
        cfg.seed = seed;
        cfg.jobs.push_back(entry_with_generator("a", d, 3));
        auto got = lengths_of(generate_workload(cfg)[0]);
        std::sort(got.begin(), got.end());
        CHECK(got == std::vector<int>{4, 4, 7});
    }
}

TEST_CASE("invalid distribution parameters raise config errors") {
    std::mt19937_64 rng(0);
    LengthDistribution d;
    d.family = LengthFamily::Uniform;
    d.min_len = 0;
    d.max_len = 5;
    CHECK_THROWS_AS(sample_lengths(d, 3, rng), ConfigError);
    d.min_len = 6;
    CHECK_THROWS_AS(sample_lengths(d, 3, rng), ConfigError);
    d = {};
    d.family = LengthFamily::EmpiricalHistogram;
    CHECK_THROWS_AS(sample_lengths(d, 3, rng), ConfigError);
    d.histogram = {{3, 0}};
    CHECK_THROWS_AS(sample_lengths(d, 3, rng), ConfigError);
}

TEST_CASE("generated lengths stay within configured bounds") {
    LengthDistribution d;
    d.family = LengthFamily::NormalTruncated;
    d.min_len = 10;
    d.max_len = 20;
    d.mean = 0;  // mass far below the window; clamping must hold the floor
    d.stddev = 5;
    std::mt19937_64 rng(42);
    for (int len : sample_lengths(d, 500, rng)) {
        CHECK(len >= 10);
        CHECK(len <= 20);
    }
}

TEST_CASE("next_candidate_batch peeks without advancing") {
    JobSpec spec;
    spec.id = "j";
    spec.batch_size = 2;
    spec.true_iterations = 10;
    spec.dataset.items = {{3}, {5}, {4}};
    JobState js(spec);

    auto a = js.next_candidate_batch();
    auto b = js.next_candidate_batch();
    REQUIRE(a.size() == 2);
    CHECK(a[0].length == 3);
    CHECK(a[1].length == 5);
    REQUIRE(b.size() == 2);
    CHECK(b[0].length == a[0].length);
    CHECK(b[1].length == a[1].length);
    CHECK(js.cursor == 0);
}

TEST_CASE("short final batch truncates at the epoch tail") {
    JobSpec spec;
    spec.id = "j";
    spec.batch_size = 4;
    spec.true_iterations = 10;
    spec.dataset.items = {{3}, {5}, {4}};
    JobState js(spec);
    const auto batch = js.next_candidate_batch();
    REQUIRE(batch.size() == 3);
    CHECK(batch[0].length == 3);
    CHECK(batch[1].length == 5);
    CHECK(batch[2].length == 4);
}

TEST_CASE("dataset wraps cyclically at epoch boundaries") {
    JobSpec spec;
    spec.id = "j";
    spec.batch_size = 2;
    spec.true_iterations = 10;
    spec.dataset.items = {{3}, {5}, {4}};
    JobState js(spec);

    // oracle: with batch size B over a dataset of size N, consumption is the
    // item stream by index, batches cut at each epoch end
    auto expected_batches = [&](int rounds) {
        std::vector<std::vector<int>> out;
        std::size_t pos = 0;
        const auto& items = spec.dataset.items;
        for (int r = 0; r < rounds; ++r) {
            std::size_t take =
                std::min<std::size_t>(spec.batch_size, items.size() - pos);
            std::vector<int> batch;
            for (std::size_t i = 0; i < take; ++i) batch.push_back(items[pos + i].length);
            pos = (pos + take) % items.size();
            out.push_back(std::move(batch));
        }
        return out;
    };

    const auto expected = expected_batches(6);
    for (const auto& want : expected) {
        const auto got = js.next_candidate_batch();
        REQUIRE(got.size() == want.size());
        for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i].length == want[i]);
        js.commit_batch(got.size());
    }
    CHECK(js.cursor == 0);  // 6 batches of the 3-item set land on the boundary
}

TEST_CASE("finished jobs reject further batches") {
    JobSpec spec;
    spec.id = "j";
    spec.dataset.items = {{3}};
    JobState js(spec);
    js.status = JobStatus::Completed;
    CHECK_THROWS_AS(js.next_candidate_batch(), StateError);
    js.status = JobStatus::Stopped;
    CHECK_THROWS_AS(js.next_candidate_batch(), StateError);
}

TEST_CASE("job spec invariants are enforced") {
    JobSpec s;
    s.id = "j";
    s.dataset.items = {{3}};
    CHECK_NOTHROW(s.validate());
    s.early_stop_iteration = 5;
    s.true_iterations = 3;
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s.early_stop_iteration.reset();
    s.priority = 0;
    CHECK_THROWS_AS(s.validate(), ConfigError);
}

TEST_CASE("committed batch sizes account for every consumed item") {
    JobSpec spec;
    spec.id = "j";
    spec.batch_size = 3;
    spec.true_iterations = 100;
    spec.dataset.items = {{2}, {9}, {4}, {7}, {1}};
    JobState js(spec);

    std::size_t consumed = 0;
    std::map<int, int> seen;
    for (int it = 0; it < 40; ++it) {
        const auto batch = js.next_candidate_batch();
        for (const auto& item : batch) ++seen[item.length];
        consumed += batch.size();
        js.commit_batch(batch.size());
    }
    // every batch is full except at epoch tails
    CHECK(consumed <= 40u * 3u);
    CHECK(consumed >= 40u * 2u);
    // cyclic consumption keeps item frequencies within one epoch of each other
    int lo = seen.begin()->second, hi = lo;
    for (const auto& [len, count] : seen) {
        lo = std::min(lo, count);
        hi = std::max(hi, count);
    }
    CHECK(hi - lo <= 1);
}
