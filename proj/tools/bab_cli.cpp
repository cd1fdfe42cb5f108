#include <CLI11.hpp>
#include <json.hpp>
#include <omp.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "bab/engine.hpp"
#include "bab/parallel.hpp"
#include "bab/report.hpp"

namespace fs = std::filesystem;

namespace {

struct RunJob {
    bab::Scenario scenario;
    fs::path dir;
};

std::vector<std::uint64_t> parse_seeds(const std::string& text, std::uint64_t fallback) {
    std::vector<std::uint64_t> seeds;
    if (text.empty()) return {fallback};
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto dash = item.find('-');
        try {
            if (dash != std::string::npos && dash > 0) {
                const auto a = std::stoull(item.substr(0, dash));
                const auto b = std::stoull(item.substr(dash + 1));
                if (b < a) throw std::invalid_argument("range");
                for (auto s = a; s <= b; ++s) seeds.push_back(s);
            } else {
                seeds.push_back(std::stoull(item));
            }
        } catch (const std::logic_error&) {
            throw CLI::ValidationError("--seeds", "bad seed '" + item + "' (use e.g. 1,2,7 or 1-10)");
        }
    }
    return seeds;
}

void apply_axis(bab::Scenario& s, const std::string& axis, double v) {
    if (axis == "slave_count") {
        s.layout.count = static_cast<int>(v);
        s.apply_layout();
    } else if (axis == "sigma_deg") {
        s.cold_start.config.sigma_deg = v;
    } else if (axis == "bandwidth_hz") {
        s.chirp.bandwidth_hz = v;
    } else if (axis == "lb_distance_m") {
        s.leader = {s.node.position.x + v, s.node.position.y, s.leader.z};
    } else if (axis == "speed_mps") {
        s.mobility.speed_mps = v;
        s.mobility.enabled = v > 0.0;
    } else {
        throw CLI::ValidationError("--axis",
                                   "unknown sweep axis '" + axis +
                                       "' (slave_count, sigma_deg, bandwidth_hz, lb_distance_m, speed_mps)");
    }
}

std::string value_label(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

int execute(std::vector<RunJob> jobs, int n_jobs) {
    if (n_jobs > 0) omp_set_num_threads(n_jobs);
    const auto results = bab::replicate(jobs.size(), [&](std::size_t i) {
        const auto& job = jobs[i];
        fs::create_directories(job.dir);
        {
            std::ofstream cfg(job.dir / "config.json");
            cfg << bab::serialize_scenario(job.scenario);
        }
        const auto m = bab::engine::run_scenario(job.scenario);
        bab::engine::write_metrics((job.dir / "metrics.json").string(), m);
        bab::engine::write_trace_csv((job.dir / "trace.csv").string(), m);
        if (m.heatmap) bab::engine::write_heatmap_csv((job.dir / "heatmap.csv").string(), *m.heatmap);
        return m.power_percentage;
    });
    for (std::size_t i = 0; i < jobs.size(); ++i)
        std::cout << jobs[i].dir.string() << "  power_percentage=" << results[i] << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Battery-free backscatter beamforming simulator"};
    app.require_subcommand(1);

    std::string config, out = "runs", seeds_text, axis;
    std::vector<double> values;
    int jobs = 0;

    auto* run = app.add_subcommand("run", "simulate one scenario for each seed");
    run->add_option("--config", config, "scenario JSON")->required()->check(CLI::ExistingFile);
    run->add_option("--out", out, "output directory");
    run->add_option("--seeds", seeds_text, "comma list or ranges, e.g. 1,2,5-9 (default: config seed)");
    run->add_option("--jobs", jobs, "parallel runs (default: OpenMP default)");

    auto* sweep = app.add_subcommand("sweep", "simulate a scenario over one swept parameter");
    sweep->add_option("--config", config, "scenario JSON")->required()->check(CLI::ExistingFile);
    sweep->add_option("--out", out, "output directory");
    sweep->add_option("--seeds", seeds_text, "comma list or ranges");
    sweep->add_option("--jobs", jobs, "parallel runs");
    sweep->add_option("--axis", axis, "slave_count | sigma_deg | bandwidth_hz | lb_distance_m | speed_mps");
    sweep->add_option("--values", values, "values of the swept parameter")->delimiter(',');

    auto* report = app.add_subcommand("report", "summarize the runs under a directory");
    report->add_option("--out", out, "directory holding run outputs");

    CLI11_PARSE(app, argc, argv);

    try {
        if (report->parsed()) {
            std::cout << bab::report::format_report(bab::report::collect_runs(out));
            return 0;
        }
        const auto base = bab::load_scenario(config);
        const auto seeds = parse_seeds(seeds_text, base.seed);
        std::vector<RunJob> todo;

        if (run->parsed()) {
            for (auto seed : seeds) {
                auto s = base;
                s.seed = seed;
                todo.push_back({s, fs::path(out) / (s.name + "_seed" + std::to_string(seed))});
            }
        } else {
            if (axis.empty() || values.empty()) {
                // Fall back to the "sweep" block of the config file.
                std::ifstream f(config);
                const auto j = nlohmann::json::parse(f);
                if (!j.contains("sweep"))
                    throw CLI::ValidationError("sweep", "no --axis/--values given and the config has no \"sweep\" block");
                const auto& sw = j.at("sweep");
                if (axis.empty()) axis = sw.at("axis").get<std::string>();
                if (values.empty()) values = sw.at("values").get<std::vector<double>>();
            }
            for (double v : values) {
                for (auto seed : seeds) {
                    auto s = base;
                    s.seed = seed;
                    apply_axis(s, axis, v);
                    s.name = base.name + "[" + axis + "=" + value_label(v) + "]";
                    s.validate();
                    todo.push_back({s, fs::path(out) / (axis + "_" + value_label(v)) / ("seed" + std::to_string(seed))});
                }
            }
        }
        return execute(std::move(todo), jobs);
    } catch (const bab::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const CLI::Error& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
