#pragma once

#include <string>
#include <vector>

#include "terradapt/sim/config.hpp"
#include "terradapt/sim/runner.hpp"

namespace terradapt::sim {

struct Stats {
    int count = 0;
    double median = 0.0;
    double mean = 0.0;
    double std = 0.0;  // sample standard deviation (n - 1)
    double min = 0.0;
    double max = 0.0;
};
Stats stats(std::vector<double> values);

// sqrt(mean ||p - p_d||^2) from telemetry columns, skipping the terminal row
// (the tick after the last control interval is logged but not scored).
double position_rmse_from_telemetry(const Telemetry& t);

struct VariantSummary {
    std::string variant;
    int failed = 0;
    Stats cumulative_error;
    Stats position_rmse;
    Stats velocity_rmse_v;
    Stats velocity_rmse_omega;
};
// Only successful runs enter the statistics.
VariantSummary summarize(const std::string& variant, const std::vector<RunResult>& runs);

// 100 (base - other) / base; 0 when both are 0.
double improvement_percent(double base, double other);

json run_json(const RunResult& r);
json summary_json(const VariantSummary& s);

} // namespace terradapt::sim
