#include "terradapt/sim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace terradapt::sim {

Stats stats(std::vector<double> v) {
    Stats s;
    s.count = static_cast<int>(v.size());
    if (v.empty()) return s;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    s.median = n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
    s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(n);
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.std = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
    s.min = v.front();
    s.max = v.back();
    return s;
}

double position_rmse_from_telemetry(const Telemetry& t) {
    const auto px = t.series("p_x"), py = t.series("p_y"), dx = t.series("p_d_x"), dy = t.series("p_d_y");
    if (px.size() < 2) return 0.0;
    const std::size_t n = px.size() - 1;
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double ex = px[i] - dx[i], ey = py[i] - dy[i];
        acc += ex * ex + ey * ey;
    }
    return std::sqrt(acc / static_cast<double>(n));
}

VariantSummary summarize(const std::string& variant, const std::vector<RunResult>& runs) {
    VariantSummary s;
    s.variant = variant;
    std::vector<double> ce, pr, vv, vo;
    for (const auto& r : runs) {
        if (!r.ok) {
            ++s.failed;
            continue;
        }
        ce.push_back(r.cumulative_error);
        pr.push_back(r.position_rmse);
        vv.push_back(r.velocity_rmse_v);
        vo.push_back(r.velocity_rmse_omega);
    }
    s.cumulative_error = stats(ce);
    s.position_rmse = stats(pr);
    s.velocity_rmse_v = stats(vv);
    s.velocity_rmse_omega = stats(vo);
    return s;
}

double improvement_percent(double base, double other) {
    if (base == 0.0) return other == 0.0 ? 0.0 : -100.0;
    return 100.0 * (base - other) / base;
}

namespace {
json stats_json(const Stats& s) {
    return {{"count", s.count}, {"median", s.median}, {"mean", s.mean}, {"std", s.std}, {"min", s.min}, {"max", s.max}};
}
} // namespace

json run_json(const RunResult& r) {
    json j = {{"run", r.run},
              {"variant", r.variant},
              {"ok", r.ok},
              {"position_rmse", r.position_rmse},
              {"velocity_rmse_v", r.velocity_rmse_v},
              {"velocity_rmse_omega", r.velocity_rmse_omega},
              {"cumulative_error", r.cumulative_error},
              {"ticks", r.ticks},
              {"fallback_steps", r.fallback_steps},
              {"clamped_steps", r.clamped_steps},
              {"rejected_adapt_steps", r.rejected_adapt_steps},
              {"gain_clamped_steps", r.gain_clamped_steps},
              {"feature_clamps", r.feature_clamps},
              {"final_theta", std::vector<double>(r.final_theta.data(), r.final_theta.data() + r.final_theta.size())}};
    if (!r.ok) j["failure"] = r.failure;
    return j;
}

json summary_json(const VariantSummary& s) {
    return {{"variant", s.variant},
            {"failed_runs", s.failed},
            {"cumulative_error", stats_json(s.cumulative_error)},
            {"position_rmse", stats_json(s.position_rmse)},
            {"velocity_rmse_v", stats_json(s.velocity_rmse_v)},
            {"velocity_rmse_omega", stats_json(s.velocity_rmse_omega)}};
}

} // namespace terradapt::sim
