#include "bab/report.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace bab::report {

RunSummary parse_metrics(const std::string& text, const std::string& origin) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
        RunSummary r;
        r.path = origin;
        r.scenario = j.at("scenario").get<std::string>();
        r.method = j.at("method").get<std::string>();
        r.seed = j.at("seed").get<std::uint64_t>();
        r.slaves = j.at("slaves").get<int>();
        r.power_percentage = j.at("power_percentage").get<double>();
        r.rounds_to_converge = j.at("rounds_to_converge").get<int>();
        r.failed = j.at("sync").at("failed").get<bool>() ||
                   (j.at("cold_start").at("attempted").get<bool>() && !j.at("cold_start").at("success").get<bool>());
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(origin + ": " + e.what());
    }
}

std::vector<RunSummary> collect_runs(const std::filesystem::path& root) {
    namespace fs = std::filesystem;
    std::vector<fs::path> files;
    if (fs::exists(root))
        for (const auto& e : fs::recursive_directory_iterator(root))
            if (e.is_regular_file() && e.path().filename() == "metrics.json") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    std::vector<RunSummary> out;
    for (const auto& f : files) {
        std::ifstream in(f);
        std::stringstream ss;
        ss << in.rdbuf();
        out.push_back(parse_metrics(ss.str(), f.string()));
    }
    return out;
}

std::vector<Group> aggregate(const std::vector<RunSummary>& runs) {
    std::vector<Group> groups;
    std::vector<std::vector<double>> pp;
    for (const auto& r : runs) {
        auto it = std::find_if(groups.begin(), groups.end(),
                               [&](const Group& g) { return g.scenario == r.scenario && g.method == r.method; });
        if (it == groups.end()) {
            groups.push_back({r.scenario, r.method});
            pp.emplace_back();
            it = groups.end() - 1;
        }
        const std::size_t k = it - groups.begin();
        ++it->runs;
        if (r.failed) {
            ++it->failures;
            continue;
        }
        pp[k].push_back(r.power_percentage);
        if (r.rounds_to_converge >= 0) {
            it->mean_rounds_to_converge += r.rounds_to_converge;
            ++it->converged;
        }
    }
    for (std::size_t k = 0; k < groups.size(); ++k) {
        auto& g = groups[k];
        if (g.converged > 0) g.mean_rounds_to_converge /= g.converged;
        const auto& v = pp[k];
        if (v.empty()) continue;
        double mean = 0.0;
        for (double x : v) mean += x;
        mean /= v.size();
        g.mean_power_percentage = mean;
        if (v.size() > 1) {
            double ss = 0.0;
            for (double x : v) ss += (x - mean) * (x - mean);
            g.ci95_power_percentage = 1.96 * std::sqrt(ss / (v.size() - 1) / v.size());
        }
    }
    return groups;
}

std::string format_report(const std::vector<RunSummary>& runs) {
    if (runs.empty()) return "no runs found\n";
    std::ostringstream os;
    os << std::left << std::setw(40) << "scenario" << std::setw(14) << "method" << std::right << std::setw(6)
       << "runs" << std::setw(8) << "failed" << std::setw(12) << "power_%" << std::setw(10) << "ci95"
       << std::setw(14) << "conv_rounds" << '\n';
    os << std::fixed;
    for (const auto& g : aggregate(runs)) {
        os << std::left << std::setw(40) << g.scenario << std::setw(14) << g.method << std::right << std::setw(6)
           << g.runs << std::setw(8) << g.failures << std::setw(12) << std::setprecision(2)
           << 100.0 * g.mean_power_percentage << std::setw(10) << 100.0 * g.ci95_power_percentage;
        if (g.converged > 0)
            os << std::setw(14) << std::setprecision(1) << g.mean_rounds_to_converge;
        else
            os << std::setw(14) << "-";
        os << '\n';
    }
    return os.str();
}

}  // namespace bab::report
