#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace bab::report {

struct RunSummary {
    std::string path;
    std::string scenario;
    std::string method;
    std::uint64_t seed = 0;
    int slaves = 0;
    double power_percentage = 0.0;
    int rounds_to_converge = -1;
    bool failed = false;
};

struct Group {
    std::string scenario;
    std::string method;
    int runs = 0;
    int failures = 0;
    double mean_power_percentage = 0.0;
    double ci95_power_percentage = 0.0;  // half-width, normal approximation
    double mean_rounds_to_converge = 0.0;  // over converged runs only
    int converged = 0;
};

// Reads every metrics.json below `root`, sorted by path. Malformed files throw
// std::runtime_error naming the file.
std::vector<RunSummary> collect_runs(const std::filesystem::path& root);
RunSummary parse_metrics(const std::string& text, const std::string& origin);

// Groups by (scenario, method) in first-seen order.
std::vector<Group> aggregate(const std::vector<RunSummary>& runs);

// Human-readable table; "no runs found" when `runs` is empty.
std::string format_report(const std::vector<RunSummary>& runs);

}  // namespace bab::report
