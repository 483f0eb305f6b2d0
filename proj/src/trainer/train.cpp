#include "terradapt/trainer/train.hpp"

#include <chrono>
#include <cmath>

#include "terradapt/common/log.hpp"

namespace terradapt::trainer {

void TrainerConfig::validate() const {
    if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
    if (!(lambda_r > 0.0)) throw ConfigError("lambda_r must be positive");
    if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
    if (!(window_min_s > 0.0) || window_max_s < window_min_s)
        throw ConfigError("window bounds must satisfy 0 < window_min_s <= window_max_s");
    if (max_iters < 1) throw ConfigError("max_iters must be at least 1");
    if (convergence_span < 1) throw ConfigError("convergence_span must be at least 1");
    if (power_iterations < 1) throw ConfigError("power_iterations must be at least 1");
    if (!theta_r.allFinite() || theta_r.size() == 0) throw ConfigError("theta_r must be a finite vector");
}

std::vector<Window> sample_windows(const TrajectoryDataset& data, const TrainerConfig& cfg, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> pick_traj(0, static_cast<int>(data.trajectories.size()) - 1);
    std::uniform_real_distribution<double> pick_len(cfg.window_min_s, cfg.window_max_s);
    std::vector<Window> out;
    out.reserve(static_cast<std::size_t>(cfg.batch_size));
    for (int k = 0; k < cfg.batch_size; ++k) {
        Window w;
        w.traj = pick_traj(rng);
        const int len = data.trajectories[static_cast<std::size_t>(w.traj)].length();
        w.length = static_cast<int>(std::lround(pick_len(rng) / data.dt));
        w.length = std::clamp(w.length, 1, len);
        std::uniform_int_distribution<int> pick_start(0, len - w.length);
        w.start = pick_start(rng);
        out.push_back(w);
    }
    return out;
}

AdamState::AdamState(int n, double lr, double b1, double b2, double eps)
    : m_(VecX::Zero(n)), v_(VecX::Zero(n)), lr_(lr), b1_(b1), b2_(b2), eps_(eps) {}

VecX AdamState::step(const VecX& params, const VecX& grad) {
    ++t_;
    m_ = b1_ * m_ + (1.0 - b1_) * grad;
    v_ = b2_ * v_ + (1.0 - b2_) * grad.cwiseAbs2();
    const double c1 = 1.0 - std::pow(b1_, t_);
    const double c2 = 1.0 - std::pow(b2_, t_);
    return params - lr_ * ((m_ / c1).array() / ((v_ / c2).array().sqrt() + eps_)).matrix();
}

TrainResult train(const TrajectoryDataset& data, const TrainerConfig& cfg, const basis::BasisNet* init,
                  const StepCallback& on_step) {
    data.validate();
    cfg.validate();
    if (cfg.theta_r.size() != data.residual_dim * data.input_dim && init == nullptr)
        log().info("theta_r has {} entries; basis built with n_theta = {}", cfg.theta_r.size(), cfg.theta_r.size());

    TrainResult res;
    const basis::BasisShape shape{data.residual_dim, data.input_dim, static_cast<int>(cfg.theta_r.size())};
    res.net = init ? *init
                   : basis::BasisNet::initialized(data.state_dim + data.feature_dim, cfg.hidden, shape,
                                                  basis::parse_activation(cfg.activation), cfg.seed);
    if (!(res.net.shape() == shape)) throw DimensionError("initial net shape does not match dataset and theta_r");

    log().info("training: lr={} lambda_r={} K={} window=[{}, {}] s max_iters={} optimizer={}", cfg.learning_rate,
               cfg.lambda_r, cfg.batch_size, cfg.window_min_s, cfg.window_max_s, cfg.max_iters,
               cfg.optimizer == Optimizer::Adam ? "adam" : "sgd");

    std::mt19937_64 rng(cfg.seed ^ 0x5DEECE66DULL);
    AdamState adam(res.net.num_parameters(), cfg.learning_rate, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps);
    const auto t0 = std::chrono::steady_clock::now();
    const int span = cfg.convergence_span;

    for (int it = 0; it < cfg.max_iters; ++it) {
        const std::vector<Window> windows = sample_windows(data, cfg, rng);
        const MetaLoss ml = meta_loss(res.net, data, windows, cfg.lambda_r, cfg.theta_r, true);
        const VecX g = basis::BasisNet::flatten(ml.grad);
        if (!std::isfinite(ml.loss) || !g.allFinite()) {
            const double last = res.history.empty() ? NAN : res.history.back().loss;
            throw NumericalError("training diverged at iteration " + std::to_string(it) + " (loss " +
                                 std::to_string(ml.loss) + ", previous " + std::to_string(last) + ")");
        }
        const VecX p = res.net.parameters();
        res.net.set_parameters(cfg.optimizer == Optimizer::Adam ? adam.step(p, g) : VecX(p - cfg.learning_rate * g));
        res.net.spectral_normalize(cfg.power_iterations);
        if (on_step) on_step(it, res.net);

        IterationRecord rec;
        rec.iter = it;
        rec.loss = ml.loss;
        rec.mean_loss = ml.samples > 0 ? ml.loss / (ml.samples * data.residual_dim) : 0.0;
        rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        res.history.push_back(rec);
        if (it % 100 == 0) log().debug("iter {} loss {:.6g} mean {:.6g}", it, rec.loss, rec.mean_loss);

        // Compare the mean per-sample loss of the last two blocks.
        if (static_cast<int>(res.history.size()) >= 2 * span) {
            double a = 0.0, b = 0.0;
            const std::size_t n = res.history.size();
            for (int k = 0; k < span; ++k) {
                a += res.history[n - 1 - k].mean_loss;
                b += res.history[n - 1 - span - k].mean_loss;
            }
            if (b > 0.0 && std::abs(a - b) / b < cfg.convergence_tol) {
                res.converged = true;
                log().info("training converged after {} iterations", it + 1);
                break;
            }
        }
    }
    res.theta0 = fit_theta_all(res.net, data, cfg.lambda_r, cfg.theta_r).theta;
    log().info("training finished: {} iterations, theta0 = [{}]", res.history.size(),
               [&] {
                   std::string s;
                   for (Eigen::Index i = 0; i < res.theta0.size(); ++i)
                       s += (i ? ", " : "") + std::to_string(res.theta0(i));
                   return s;
               }());
    return res;
}

} // namespace terradapt::trainer
