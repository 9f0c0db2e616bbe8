// fusim: multi-adapter fine-tuning scheduling simulator and analytic models.
//
// Subcommands:
//   simulate  run one or more scheduling strategies over a workload
//   fit-mem   fit the quadratic memory model to profiled samples
//   cost      closed-form memory / kernel-launch cost figures

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "fusim/cost_model.hpp"
#include "fusim/io.hpp"
#include "fusim/memory_model.hpp"
#include "fusim/sim.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

bool verbose_logging() {
    const char* env = std::getenv("FUSIM_LOG");
    return env && std::string(env) != "" && std::string(env) != "0";
}

void log_info(const std::string& msg) {
    if (verbose_logging()) std::cerr << "[fusim] " << msg << "\n";
}

int cmd_simulate(const std::string& spec_path, const std::string& out_dir,
                 std::optional<std::uint64_t> seed,
                 std::optional<std::string> strategy,
                 std::optional<int> top_k, std::optional<double> mmem,
                 bool json_output) {
    fusim::ExperimentSpec spec = fusim::load_experiment_spec(spec_path, seed);
    if (top_k) spec.config.scheduler.top_k = *top_k;
    if (mmem) spec.config.scheduler.memory_budget_gb = *mmem;
    if (strategy) spec.strategies = {fusim::strategy_from_string(*strategy)};

    const fs::path out(out_dir);
    fs::create_directories(out);

    std::vector<fusim::StrategyComparison> rows;
    json summary;
    summary["name"] = spec.name;
    summary["strategies"] = json::array();
    for (fusim::Strategy s : spec.strategies) {
        fusim::SimConfig cfg = spec.config;
        cfg.scheduler.strategy = s;
        log_info("running strategy " + std::string(fusim::to_string(s)));
        const fusim::SimTrace trace = fusim::run_simulation(cfg);
        const fusim::MetricsReport report = fusim::compute_metrics(trace);
        rows.push_back({s, report});

        const std::string prefix = spec.name + "_" + fusim::to_string(s);
        fusim::write_trace_jsonl(out / (prefix + "_trace.jsonl"), trace);
        fusim::write_decisions_jsonl(out / (prefix + "_decisions.jsonl"), trace);
        fusim::atomic_write(out / (prefix + "_metrics.json"),
                            fusim::metrics_to_json(report).dump(2) + "\n");
        fusim::atomic_write(out / (prefix + "_metrics.csv"),
                            fusim::metrics_to_csv(report));

        json row;
        row["strategy"] = fusim::to_string(s);
        row["metrics"] = fusim::metrics_to_json(report);
        summary["strategies"].push_back(std::move(row));
    }
    if (rows.size() > 1)
        fusim::atomic_write(out / (spec.name + "_compare.csv"),
                            fusim::comparison_to_csv(rows));

    if (json_output) std::cout << summary.dump(2) << "\n";
    else
        std::cout << "wrote " << rows.size() << " strategy report(s) to "
                  << out.string() << "\n";
    return 0;
}

int cmd_fit_mem(const std::string& samples_path, const std::string& out_path,
                bool nonnegative, bool json_output) {
    const auto samples = fusim::load_mem_samples_csv(samples_path);
    const auto model = fusim::fit_memory_model(
        samples, nonnegative ? fusim::FitConstraint::NonNegative
                             : fusim::FitConstraint::Unconstrained);
    fusim::save_memory_model(out_path, model);
    if (json_output) {
        std::cout << fusim::memory_model_to_json(model).dump(2) << "\n";
    } else {
        std::printf("beta0: %.6g\nbeta1: %.6g\nbeta2: %.6g\nrmse: %.6g GB\n",
                    model.beta0, model.beta1, model.beta2, model.rmse);
        std::cout << "model written to " << out_path << "\n";
    }
    return 0;
}

int cmd_cost(int k, double wp, double wl, double we, bool json_output) {
    const fusim::MemoryFootprint fp{wp, wl, we};
    const fusim::CostReport report = fusim::cost_report(fp, k);
    if (json_output) {
        json j;
        j["k"] = report.jobs;
        j["total_no_share_gb"] = report.total_no_share_gb;
        j["total_shared_gb"] = report.total_shared_gb;
        j["memory_saved_gb"] = report.memory_saved_gb;
        j["launch_saving_fraction"] = report.launch_saving_fraction;
        std::cout << j.dump(2) << "\n";
    } else {
        std::printf("k: %d\n", report.jobs);
        std::printf("total_no_share: %.1f GB\n", report.total_no_share_gb);
        std::printf("total_shared: %.1f GB\n", report.total_shared_gb);
        std::printf("memory_saved: %.1f GB\n", report.memory_saved_gb);
        std::printf("launch_saving: %.1f%%\n", report.launch_saving_fraction * 100.0);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"multi-adapter fine-tuning scheduling simulator"};
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "run a simulation experiment");
    std::string spec_path, out_dir = "out";
    std::optional<std::uint64_t> seed;
    std::optional<std::string> strategy;
    std::optional<int> top_k;
    std::optional<double> mmem;
    bool sim_json = false;
    sim->add_option("--spec", spec_path, "experiment spec JSON")->required();
    sim->add_option("--out", out_dir, "output directory");
    sim->add_option("--seed", seed, "override workload seed");
    sim->add_option("--strategy", strategy, "run a single strategy (M1..M4)");
    sim->add_option("--topk", top_k, "override adaptive top_k");
    sim->add_option("--mmem", mmem, "override memory budget (GB)");
    sim->add_flag("--json", sim_json, "machine-readable stdout");

    // fit-mem
    auto* fit = app.add_subcommand("fit-mem", "fit the memory usage model");
    std::string samples_path, model_out = "model.json";
    bool nonnegative = false, fit_json = false;
    fit->add_option("--samples", samples_path, "CSV of (batch_size,seq_len,mem_gb)")
        ->required();
    fit->add_option("--out", model_out, "output model JSON path");
    fit->add_flag("--nonnegative", nonnegative, "constrain coefficients to >= 0");
    fit->add_flag("--json", fit_json, "machine-readable stdout");

    // cost
    auto* cost = app.add_subcommand("cost", "closed-form cost analysis");
    int k = 1;
    double wp = 0, wl = 0, we = 0;
    bool cost_json = false;
    cost->add_option("--k", k, "number of concurrent jobs")->required();
    cost->add_option("--wp", wp, "pretrained weights (GB)");
    cost->add_option("--wl", wl, "one adapter (GB)");
    cost->add_option("--we", we, "per-job training overhead (GB)");
    cost->add_flag("--json", cost_json, "machine-readable stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 2;
    }

    try {
        if (sim->parsed())
            return cmd_simulate(spec_path, out_dir, seed, strategy, top_k, mmem,
                                sim_json);
        if (fit->parsed()) return cmd_fit_mem(samples_path, model_out, nonnegative, fit_json);
        if (cost->parsed()) return cmd_cost(k, wp, wl, we, cost_json);
    } catch (const fusim::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const fusim::UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const fusim::FitError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "runtime failure: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
