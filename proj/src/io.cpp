#include "fusim/io.hpp"

#include <fstream>
#include <limits>
#include <sstream>

namespace fusim {

using nlohmann::json;

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open file: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json parse_json(const std::string& text, const std::string& what) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError("malformed JSON in " + what + ": " + e.what());
    }
}

LengthFamily family_from_string(const std::string& name) {
    if (name == "uniform") return LengthFamily::Uniform;
    if (name == "normal-truncated") return LengthFamily::NormalTruncated;
    if (name == "empirical-histogram") return LengthFamily::EmpiricalHistogram;
    throw ConfigError("unknown length distribution family: " + name);
}

// JSON has no NaN literal; serialization writes non-finite values as null
std::vector<double> stream_from_json(const json& j) {
    std::vector<double> out;
    for (const auto& v : j)
        out.push_back(v.is_null() ? std::numeric_limits<double>::quiet_NaN()
                                  : v.get<double>());
    return out;
}

GeneratorSpec generator_from_json(const json& j) {
    GeneratorSpec g;
    g.dist.family = family_from_string(j.at("family").get<std::string>());
    g.count = j.at("count").get<int>();
    switch (g.dist.family) {
        case LengthFamily::Uniform:
            g.dist.min_len = j.at("min_len").get<int>();
            g.dist.max_len = j.at("max_len").get<int>();
            break;
        case LengthFamily::NormalTruncated:
            g.dist.min_len = j.at("min_len").get<int>();
            g.dist.max_len = j.at("max_len").get<int>();
            g.dist.mean = j.at("mean").get<double>();
            g.dist.stddev = j.at("stddev").get<double>();
            break;
        case LengthFamily::EmpiricalHistogram:
            for (const auto& [key, value] : j.at("histogram").items())
                g.dist.histogram[std::stoi(key)] = value.get<int>();
            break;
    }
    return g;
}

} // namespace

json job_spec_to_json(const JobSpec& spec) {
    json j;
    j["id"] = spec.id;
    j["priority"] = spec.priority;
    j["submit_time"] = spec.submit_time;
    j["batch_size"] = spec.batch_size;
    j["lora_rank"] = spec.lora_rank;
    j["true_iterations"] = spec.true_iterations;
    if (spec.early_stop_iteration) j["early_stop_iteration"] = *spec.early_stop_iteration;
    j["memory_gb"] = spec.memory_gb;
    json ds;
    ds["name"] = spec.dataset.name;
    json lengths = json::array();
    for (const auto& item : spec.dataset.items) lengths.push_back(item.length);
    ds["lengths"] = std::move(lengths);
    j["dataset"] = std::move(ds);
    if (!spec.loss_stream.empty()) j["loss_stream"] = spec.loss_stream;
    if (!spec.accuracy_stream.empty()) j["accuracy_stream"] = spec.accuracy_stream;
    return j;
}

WorkloadConfig::Entry job_entry_from_json(const json& j) {
    WorkloadConfig::Entry entry;
    JobSpec& spec = entry.spec;
    spec.id = j.at("id").get<std::string>();
    spec.priority = j.value("priority", 1);
    spec.submit_time = j.value("submit_time", 0.0);
    spec.batch_size = j.value("batch_size", 1);
    spec.lora_rank = j.value("lora_rank", 1);
    spec.true_iterations = j.value("true_iterations", 1);
    if (j.contains("early_stop_iteration"))
        spec.early_stop_iteration = j.at("early_stop_iteration").get<int>();
    spec.memory_gb = j.value("memory_gb", 0.0);
    if (j.contains("loss_stream")) spec.loss_stream = stream_from_json(j.at("loss_stream"));
    if (j.contains("accuracy_stream"))
        spec.accuracy_stream = stream_from_json(j.at("accuracy_stream"));

    const json& ds = j.at("dataset");
    spec.dataset.name = ds.value("name", spec.id);
    if (ds.contains("lengths")) {
        for (const auto& len : ds.at("lengths"))
            spec.dataset.items.push_back(DataItem{len.get<int>()});
    } else if (ds.contains("generate")) {
        entry.generate = generator_from_json(ds.at("generate"));
    } else {
        throw ConfigError("job " + spec.id +
                          ": dataset needs either 'lengths' or 'generate'");
    }
    return entry;
}

std::vector<JobSpec> load_workload_jsonl(const std::filesystem::path& path,
                                         std::uint64_t seed) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open workload file: " + path.string());
    WorkloadConfig config;
    config.seed = seed;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const json j =
            parse_json(line, path.string() + ":" + std::to_string(lineno));
        config.jobs.push_back(job_entry_from_json(j));
    }
    if (config.jobs.empty())
        throw ConfigError("workload file is empty: " + path.string());
    return generate_workload(config);
}

void save_workload_jsonl(const std::filesystem::path& path,
                         const std::vector<JobSpec>& jobs) {
    std::string out;
    for (const auto& spec : jobs) out += job_spec_to_json(spec).dump() + "\n";
    atomic_write(path, out);
}

std::vector<MemSample> load_mem_samples_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open samples file: " + path.string());
    std::vector<MemSample> samples;
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        if (header) {
            header = false;
            if (line.find("batch_size") != std::string::npos) continue;
            // headerless file: fall through and parse the first row
        }
        std::istringstream ss(line);
        std::string field;
        MemSample s;
        try {
            std::getline(ss, field, ',');
            s.batch_size = std::stoi(field);
            std::getline(ss, field, ',');
            s.seq_len = std::stoi(field);
            std::getline(ss, field, ',');
            s.mem_gb = std::stod(field);
        } catch (const std::exception&) {
            throw ConfigError("malformed CSV row in " + path.string() + ": " + line);
        }
        samples.push_back(s);
    }
    return samples;
}

void save_mem_samples_csv(const std::filesystem::path& path,
                          const std::vector<MemSample>& samples) {
    std::ostringstream out;
    out << "batch_size,seq_len,mem_gb\n";
    for (const auto& s : samples)
        out << s.batch_size << "," << s.seq_len << "," << json(s.mem_gb).dump() << "\n";
    atomic_write(path, out.str());
}

json memory_model_to_json(const MemoryModel& model) {
    json j;
    j["beta0"] = model.beta0;
    j["beta1"] = model.beta1;
    j["beta2"] = model.beta2;
    j["rmse"] = model.rmse;
    j["sample_count"] = model.sample_count;
    return j;
}

MemoryModel memory_model_from_json(const json& j) {
    MemoryModel m;
    m.beta0 = j.at("beta0").get<double>();
    m.beta1 = j.at("beta1").get<double>();
    m.beta2 = j.at("beta2").get<double>();
    m.rmse = j.value("rmse", 0.0);
    m.sample_count = j.value("sample_count", 0);
    return m;
}

void save_memory_model(const std::filesystem::path& path, const MemoryModel& model) {
    atomic_write(path, memory_model_to_json(model).dump(2) + "\n");
}

MemoryModel load_memory_model(const std::filesystem::path& path) {
    return memory_model_from_json(parse_json(read_file(path), path.string()));
}

ExperimentSpec load_experiment_spec(const std::filesystem::path& path,
                                    std::optional<std::uint64_t> seed_override) {
    const json j = parse_json(read_file(path), path.string());
    ExperimentSpec spec;
    spec.name = j.value("name", path.stem().string());
    SimConfig& cfg = spec.config;

    cfg.seed = seed_override ? *seed_override : j.value("seed", 0ULL);
    cfg.horizon = j.value("horizon", 1e9);
    cfg.early_stopping = j.value("early_stopping", true);

    if (j.contains("scheduler")) {
        const json& s = j.at("scheduler");
        if (s.contains("strategy"))
            cfg.scheduler.strategy = strategy_from_string(s.at("strategy"));
        cfg.scheduler.top_k = s.value("top_k", cfg.scheduler.top_k);
        cfg.scheduler.memory_budget_gb =
            s.value("memory_budget_gb", cfg.scheduler.memory_budget_gb);
        cfg.scheduler.max_concurrent =
            s.value("max_concurrent", cfg.scheduler.max_concurrent);
        cfg.scheduler.pack_admission =
            s.value("pack_admission", cfg.scheduler.pack_admission);
        cfg.scheduler.memory_floor_gb =
            s.value("memory_floor_gb", cfg.scheduler.memory_floor_gb);
    }
    if (j.contains("iteration_time")) {
        const json& t = j.at("iteration_time");
        cfg.iter_time.base = t.value("base", cfg.iter_time.base);
        cfg.iter_time.per_token = t.value("per_token", cfg.iter_time.per_token);
        cfg.iter_time.per_launch = t.value("per_launch", cfg.iter_time.per_launch);
    }
    if (j.contains("predictor"))
        cfg.predictor_accuracy = j.at("predictor").value("accuracy", 1.0);

    const auto base_dir = path.parent_path();
    if (j.contains("workload")) {
        auto wl = base_dir / j.at("workload").get<std::string>();
        if (!std::filesystem::exists(wl))
            throw ConfigError("workload file not found: " + wl.string());
        cfg.jobs = load_workload_jsonl(wl, cfg.seed);
    } else if (j.contains("jobs")) {
        WorkloadConfig wc;
        wc.seed = cfg.seed;
        for (const auto& job : j.at("jobs"))
            wc.jobs.push_back(job_entry_from_json(job));
        cfg.jobs = generate_workload(wc);
    } else {
        throw ConfigError("experiment spec needs 'workload' or 'jobs'");
    }

    if (j.contains("memory_model")) {
        auto mm = base_dir / j.at("memory_model").get<std::string>();
        if (!std::filesystem::exists(mm))
            throw ConfigError("memory model file not found: " + mm.string());
        cfg.memory_model = load_memory_model(mm);
    }

    if (j.contains("strategies")) {
        for (const auto& s : j.at("strategies"))
            spec.strategies.push_back(strategy_from_string(s.get<std::string>()));
    } else {
        spec.strategies.push_back(cfg.scheduler.strategy);
    }
    return spec;
}

json metrics_to_json(const MetricsReport& r) {
    json j;
    j["mean_turnaround"] = r.mean_turnaround;
    j["mean_waiting"] = r.mean_waiting;
    j["mean_virtual_turnaround"] = r.mean_virtual_turnaround;
    j["total_tokens"] = r.total_tokens;
    j["padding_tokens"] = r.padding_tokens;
    j["padding_ratio"] = r.padding_ratio;
    j["total_throughput"] = r.total_throughput;
    j["effective_throughput"] = r.effective_throughput;
    j["peak_memory_gb"] = r.peak_memory_gb;
    j["mean_memory_gb"] = r.mean_memory_gb;
    j["memory_occupancy"] = r.memory_occupancy;
    j["end_to_end_latency"] = r.end_to_end_latency;
    j["utilization"] = r.utilization;
    j["total_job_iterations"] = r.total_job_iterations;
    j["partial"] = r.partial;
    j["empty"] = r.empty;
    json jobs = json::array();
    for (const auto& jm : r.jobs) {
        json e;
        e["id"] = jm.id;
        e["priority"] = jm.priority;
        e["submit"] = jm.submit;
        e["start"] = jm.start;
        e["finish"] = jm.finish;
        e["turnaround"] = jm.turnaround;
        e["waiting"] = jm.waiting;
        e["virtual_turnaround"] = jm.virtual_turnaround;
        jobs.push_back(std::move(e));
    }
    j["jobs"] = std::move(jobs);
    return j;
}

namespace {

std::vector<std::pair<std::string, double>> scalar_metrics(const MetricsReport& r) {
    return {
        {"mean_turnaround", r.mean_turnaround},
        {"mean_waiting", r.mean_waiting},
        {"mean_virtual_turnaround", r.mean_virtual_turnaround},
        {"total_tokens", static_cast<double>(r.total_tokens)},
        {"padding_tokens", static_cast<double>(r.padding_tokens)},
        {"padding_ratio", r.padding_ratio},
        {"total_throughput", r.total_throughput},
        {"effective_throughput", r.effective_throughput},
        {"peak_memory_gb", r.peak_memory_gb},
        {"mean_memory_gb", r.mean_memory_gb},
        {"memory_occupancy", r.memory_occupancy},
        {"end_to_end_latency", r.end_to_end_latency},
        {"utilization", r.utilization},
        {"total_job_iterations", static_cast<double>(r.total_job_iterations)},
    };
}

} // namespace

std::string metrics_to_csv(const MetricsReport& r) {
    std::ostringstream out;
    out << "metric,value\n";
    for (const auto& [name, value] : scalar_metrics(r))
        out << name << "," << json(value).dump() << "\n";
    return out.str();
}

std::string comparison_to_csv(const std::vector<StrategyComparison>& rows) {
    std::ostringstream out;
    out << "strategy,metric,value\n";
    for (const auto& row : rows)
        for (const auto& [name, value] : scalar_metrics(row.report))
            out << to_string(row.strategy) << "," << name << ","
                << json(value).dump() << "\n";
    return out.str();
}

void write_trace_jsonl(const std::filesystem::path& path, const SimTrace& trace) {
    std::string out;
    for (const auto& ev : trace.events) {
        json j;
        j["time"] = ev.time;
        j["type"] = to_string(ev.type);
        if (!ev.job_id.empty()) j["job"] = ev.job_id;
        switch (ev.type) {
            case EventType::IterationDone:
                j["total_tokens"] = ev.total_tokens;
                j["padding_tokens"] = ev.padding_tokens;
                j["jobs_in_batch"] = ev.jobs_in_batch;
                break;
            case EventType::MemorySample:
                j["memory_gb"] = ev.memory_gb;
                break;
            case EventType::Stopped:
            case EventType::Completed:
                j["iteration"] = ev.iteration;
                j["cause"] = to_string(ev.cause);
                break;
            default:
                break;
        }
        out += j.dump() + "\n";
    }
    atomic_write(path, out);
}

void write_decisions_jsonl(const std::filesystem::path& path, const SimTrace& trace) {
    std::string out;
    for (const auto& td : trace.decisions) {
        json j;
        j["time"] = td.time;
        j["strategy"] = to_string(td.decision.strategy);
        j["selected"] = td.decision.selected;
        j["estimated_memory_gb"] = td.decision.estimated_memory_gb;
        if (!td.decision.predicted_remaining.empty())
            j["predicted_remaining"] = td.decision.predicted_remaining;
        if (!td.decision.reason_codes.empty())
            j["reasons"] = td.decision.reason_codes;
        out += j.dump() + "\n";
    }
    atomic_write(path, out);
}

void atomic_write(const std::filesystem::path& path, const std::string& contents) {
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write file: " + tmp);
        out << contents;
    }
    std::filesystem::rename(tmp, path);
}

} // namespace fusim
