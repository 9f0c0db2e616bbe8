#include "doctest.h"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "fusim/io.hpp"

using namespace fusim;
namespace fs = std::filesystem;

namespace {

const std::string kCli = FUSIM_CLI_PATH;

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("fusim_test_" + std::to_string(::rand()) + "_" +
                std::to_string(reinterpret_cast<std::uintptr_t>(this)));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

struct RunResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

RunResult run_cli(const TempDir& dir, const std::string& args) {
    const fs::path out_file = dir.path / "stdout.txt";
    const fs::path err_file = dir.path / "stderr.txt";
    const std::string cmd = kCli + " " + args + " >" + out_file.string() + " 2>" +
                            err_file.string();
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    auto slurp = [](const fs::path& p) {
        std::ifstream in(p);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    r.out = slurp(out_file);
    r.err = slurp(err_file);
    return r;
}

std::string slurp_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& p, const std::string& contents) {
    std::ofstream out(p, std::ios::binary);
    out << contents;
}

std::vector<MemSample> synthetic_samples() {
    std::vector<MemSample> samples;
    for (int bt : {1, 2, 4, 8})
        for (int ln : {128, 256, 512, 1024, 2048}) {
            const double u = static_cast<double>(bt) * ln;
            samples.push_back({bt, ln, 6.56 + 1.42e-3 * u - 8.76e-8 * u * ln});
        }
    return samples;
}

const std::string kSpecJson = R"({
  "name": "demo",
  "seed": 11,
  "scheduler": {
    "strategy": "M4",
    "top_k": 4,
    "memory_budget_gb": 10.0,
    "max_concurrent": 2
  },
  "iteration_time": {"base": 0.0, "per_token": 0.001},
  "strategies": ["M1", "M4"],
  "workload": "jobs.jsonl"
})";

const std::string kWorkloadJsonl =
    R"({"id":"a","priority":2,"batch_size":2,"true_iterations":5,"memory_gb":4.0,"dataset":{"lengths":[6,8,6,8]}})"
    "\n"
    R"({"id":"b","priority":1,"batch_size":2,"true_iterations":4,"memory_gb":4.0,"dataset":{"generate":{"family":"uniform","count":6,"min_len":4,"max_len":9}}})"
    "\n";

} // namespace

TEST_CASE("cost command prints the closed-form figures") {
    TempDir dir;
    const auto r = run_cli(dir, "cost --k 3 --wp 7 --wl 0.1 --we 2");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("memory_saved: 14.0 GB") != std::string::npos);
    CHECK(r.out.find("total_no_share: 27.3 GB") != std::string::npos);
    CHECK(r.out.find("total_shared: 13.3 GB") != std::string::npos);

    const auto two = run_cli(dir, "cost --k 2");
    CHECK(two.out.find("launch_saving: 25.0%") != std::string::npos);

    const auto one = run_cli(dir, "cost --k 1 --wp 7");
    CHECK(one.out.find("memory_saved: 0.0 GB") != std::string::npos);
    CHECK(one.out.find("launch_saving: 0.0%") != std::string::npos);
}

TEST_CASE("cost command rejects k=0 and emits json on request") {
    TempDir dir;
    CHECK(run_cli(dir, "cost --k 0").exit_code == 2);

    const auto j = run_cli(dir, "cost --k 4 --wp 7 --wl 0.1 --we 2 --json");
    CHECK(j.exit_code == 0);
    const auto parsed = nlohmann::json::parse(j.out);
    CHECK(parsed.at("k") == 4);
    CHECK(parsed.at("memory_saved_gb").get<double>() == doctest::Approx(21.0));
}

TEST_CASE("fit-mem recovers coefficients from a noiseless CSV") {
    TempDir dir;
    const auto csv = dir.path / "samples.csv";
    save_mem_samples_csv(csv, synthetic_samples());
    const auto model_path = dir.path / "model.json";
    const auto r = run_cli(dir, "fit-mem --samples " + csv.string() + " --out " +
                                    model_path.string());
    CHECK(r.exit_code == 0);
    const auto model = load_memory_model(model_path);
    CHECK(std::abs(model.beta0 - 6.56) / 6.56 < 1e-6);
    CHECK(std::abs(model.beta1 - 1.42e-3) / 1.42e-3 < 1e-6);
    CHECK(std::abs(model.beta2 + 8.76e-8) / 8.76e-8 < 1e-6);
}

TEST_CASE("fit-mem fails cleanly on underdetermined input") {
    TempDir dir;
    const auto csv = dir.path / "two_rows.csv";
    write_file(csv, "batch_size,seq_len,mem_gb\n1,128,6.7\n2,128,6.9\n");
    const auto r = run_cli(dir, "fit-mem --samples " + csv.string() + " --out " +
                                    (dir.path / "m.json").string());
    CHECK(r.exit_code == 2);
    CHECK_FALSE(r.err.empty());
}

TEST_CASE("fit-mem nonnegative mode clamps and costs fit quality") {
    TempDir dir;
    const auto csv = dir.path / "samples.csv";
    save_mem_samples_csv(csv, synthetic_samples());
    const auto free_path = dir.path / "free.json";
    const auto nn_path = dir.path / "nn.json";
    CHECK(run_cli(dir, "fit-mem --samples " + csv.string() + " --out " +
                           free_path.string())
              .exit_code == 0);
    CHECK(run_cli(dir, "fit-mem --samples " + csv.string() + " --out " +
                           nn_path.string() + " --nonnegative")
              .exit_code == 0);
    const auto free_fit = load_memory_model(free_path);
    const auto nn_fit = load_memory_model(nn_path);
    CHECK(free_fit.beta2 < 0.0);
    CHECK(nn_fit.beta2 >= 0.0);
    CHECK(nn_fit.rmse > free_fit.rmse);
}

TEST_CASE("simulate writes metrics, traces and a comparison table") {
    TempDir dir;
    write_file(dir.path / "exp.json", kSpecJson);
    write_file(dir.path / "jobs.jsonl", kWorkloadJsonl);
    const auto out = dir.path / "out";
    const auto r = run_cli(dir, "simulate --spec " + (dir.path / "exp.json").string() +
                                    " --out " + out.string());
    CHECK(r.exit_code == 0);
    for (const std::string name :
         {"demo_M1_metrics.json", "demo_M1_metrics.csv", "demo_M1_trace.jsonl",
          "demo_M1_decisions.jsonl", "demo_M4_metrics.json", "demo_compare.csv"})
        CHECK(fs::exists(out / name));

    const auto metrics =
        nlohmann::json::parse(slurp_file(out / "demo_M4_metrics.json"));
    CHECK(metrics.at("jobs").size() == 2);
    CHECK_FALSE(metrics.at("partial").get<bool>());

    const auto compare = slurp_file(out / "demo_compare.csv");
    CHECK(compare.rfind("strategy,metric,value\n", 0) == 0);
    CHECK(compare.find("M1,mean_turnaround,") != std::string::npos);
    CHECK(compare.find("M4,mean_turnaround,") != std::string::npos);
}

TEST_CASE("simulate re-runs are byte-identical") {
    TempDir dir;
    write_file(dir.path / "exp.json", kSpecJson);
    write_file(dir.path / "jobs.jsonl", kWorkloadJsonl);
    const auto out1 = dir.path / "run1";
    const auto out2 = dir.path / "run2";
    const std::string spec = (dir.path / "exp.json").string();
    REQUIRE(run_cli(dir, "simulate --spec " + spec + " --out " + out1.string())
                .exit_code == 0);
    REQUIRE(run_cli(dir, "simulate --spec " + spec + " --out " + out2.string())
                .exit_code == 0);
    for (const std::string name :
         {"demo_M1_metrics.json", "demo_M4_metrics.json", "demo_M1_trace.jsonl",
          "demo_M4_decisions.jsonl", "demo_compare.csv"})
        CHECK(slurp_file(out1 / name) == slurp_file(out2 / name));
}

TEST_CASE("simulate seed override changes generated datasets") {
    TempDir dir;
    write_file(dir.path / "exp.json", kSpecJson);
    write_file(dir.path / "jobs.jsonl", kWorkloadJsonl);
    const std::string spec = (dir.path / "exp.json").string();
    const auto a = dir.path / "a";
    const auto b = dir.path / "b";
    REQUIRE(run_cli(dir, "simulate --spec " + spec + " --out " + a.string() +
                             " --seed 5")
                .exit_code == 0);
    REQUIRE(run_cli(dir, "simulate --spec " + spec + " --out " + b.string() +
                             " --seed 6")
                .exit_code == 0);
    // job b's dataset is generated; different seeds shift its token totals
    CHECK(slurp_file(a / "demo_M1_trace.jsonl") != slurp_file(b / "demo_M1_trace.jsonl"));
}

TEST_CASE("missing workload file fails with a diagnostic naming the path") {
    TempDir dir;
    write_file(dir.path / "exp.json", kSpecJson);  // jobs.jsonl intentionally absent
    const auto r = run_cli(dir, "simulate --spec " + (dir.path / "exp.json").string() +
                                    " --out " + (dir.path / "out").string());
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("jobs.jsonl") != std::string::npos);
}

TEST_CASE("malformed spec and bad flags exit with code 2") {
    TempDir dir;
    write_file(dir.path / "bad.json", "{not json");
    CHECK(run_cli(dir, "simulate --spec " + (dir.path / "bad.json").string())
              .exit_code == 2);
    CHECK(run_cli(dir, "simulate").exit_code == 2);  // --spec is required
    CHECK(run_cli(dir, "frobnicate").exit_code == 2);
    CHECK(run_cli(dir, "--help").exit_code == 0);
}

TEST_CASE("strategy override narrows the run to one report") {
    TempDir dir;
    write_file(dir.path / "exp.json", kSpecJson);
    write_file(dir.path / "jobs.jsonl", kWorkloadJsonl);
    const auto out = dir.path / "out";
    const auto r = run_cli(dir, "simulate --spec " + (dir.path / "exp.json").string() +
                                    " --out " + out.string() + " --strategy M2 --json");
    CHECK(r.exit_code == 0);
    CHECK(fs::exists(out / "demo_M2_metrics.json"));
    CHECK_FALSE(fs::exists(out / "demo_compare.csv"));
    const auto summary = nlohmann::json::parse(r.out);
    REQUIRE(summary.at("strategies").size() == 1);
    CHECK(summary.at("strategies")[0].at("strategy") == "M2");
}

TEST_CASE("workload jsonl round-trips through save and load") {
    TempDir dir;
    const auto path = dir.path / "wl.jsonl";
    const auto jobs = load_workload_jsonl(
        [&] {
            write_file(path, kWorkloadJsonl);
            return path;
        }(),
        11);
    REQUIRE(jobs.size() == 2);
    CHECK(jobs[0].dataset.items.size() == 4);
    CHECK(jobs[1].dataset.items.size() == 6);
    for (const auto& item : jobs[1].dataset.items) {
        CHECK(item.length >= 4);
        CHECK(item.length <= 9);
    }

    const auto copy = dir.path / "copy.jsonl";
    save_workload_jsonl(copy, jobs);
    const auto again = load_workload_jsonl(copy, 999);  // materialized, seed moot
    REQUIRE(again.size() == 2);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(again[i].id == jobs[i].id);
        CHECK(again[i].dataset.items.size() == jobs[i].dataset.items.size());
        for (std::size_t k = 0; k < again[i].dataset.items.size(); ++k)
            CHECK(again[i].dataset.items[k].length == jobs[i].dataset.items[k].length);
    }
}

TEST_CASE("mem sample csv and model json round-trip") {
    TempDir dir;
    const auto csv = dir.path / "s.csv";
    const auto samples = synthetic_samples();
    save_mem_samples_csv(csv, samples);
    const auto loaded = load_mem_samples_csv(csv);
    REQUIRE(loaded.size() == samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        CHECK(loaded[i].batch_size == samples[i].batch_size);
        CHECK(loaded[i].seq_len == samples[i].seq_len);
        CHECK(loaded[i].mem_gb == doctest::Approx(samples[i].mem_gb).epsilon(1e-12));
    }

    const MemoryModel model{6.56, 1.42e-3, -8.76e-8, 0.031, 20};
    const auto mj = dir.path / "m.json";
    save_memory_model(mj, model);
    const auto back = load_memory_model(mj);
    CHECK(back.beta0 == model.beta0);
    CHECK(back.beta1 == model.beta1);
    CHECK(back.beta2 == model.beta2);
    CHECK(back.rmse == model.rmse);
    CHECK(back.sample_count == model.sample_count);
}

TEST_CASE("experiment specs accept inline jobs") {
    TempDir dir;
    const auto spec_path = dir.path / "inline.json";
    write_file(spec_path, R"({
      "name": "inline",
      "scheduler": {"strategy": "M1", "memory_budget_gb": 8.0},
      "jobs": [
        {"id": "x", "batch_size": 1, "true_iterations": 2, "memory_gb": 1.0,
         "dataset": {"lengths": [5, 5]}}
      ]
    })");
    const auto spec = load_experiment_spec(spec_path);
    CHECK(spec.name == "inline");
    REQUIRE(spec.config.jobs.size() == 1);
    CHECK(spec.config.jobs[0].id == "x");
    REQUIRE(spec.strategies.size() == 1);
    CHECK(spec.strategies[0] == Strategy::FifoM1);
}

TEST_CASE("metrics csv lists one scalar per row") {
    MetricsReport r;
    r.mean_turnaround = 6.25;
    const auto csv = metrics_to_csv(r);
    CHECK(csv.rfind("metric,value\n", 0) == 0);
    CHECK(csv.find("mean_turnaround,6.25\n") != std::string::npos);
}
