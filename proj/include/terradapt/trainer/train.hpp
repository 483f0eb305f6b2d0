#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "terradapt/trainer/meta.hpp"

namespace terradapt::trainer {

enum class Optimizer { Adam, Sgd };

struct TrainerConfig {
    double learning_rate = 1e-3;
    VecX theta_r = VecX::Ones(4);
    double lambda_r = 0.1;
    int batch_size = 70;
    double window_min_s = 1.2;
    double window_max_s = 30.0;
    int max_iters = 1500;
    double convergence_tol = 1e-5;  // relative change of the loss moving average
    int convergence_span = 50;      // iterations per moving-average block
    Optimizer optimizer = Optimizer::Adam;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    int power_iterations = 30;
    std::vector<int> hidden = {64, 64};
    std::string activation = "tanh";
    std::uint64_t seed = 0;

    void validate() const;
};

struct IterationRecord {
    int iter = 0;
    double loss = 0.0;        // sum of window costs in the minibatch
    double mean_loss = 0.0;   // loss per residual sample
    double wall_seconds = 0.0;
};

struct TrainResult {
    basis::BasisNet net;
    VecX theta0;
    std::vector<IterationRecord> history;
    bool converged = false;
};

// Windows drawn as the trainer draws them: trajectory uniform, length uniform
// in seconds then rounded to samples, start uniform over valid positions.
std::vector<Window> sample_windows(const TrajectoryDataset& data, const TrainerConfig& cfg, std::mt19937_64& rng);

class AdamState {
public:
    AdamState(int n, double lr, double b1, double b2, double eps);
    VecX step(const VecX& params, const VecX& grad);

private:
    VecX m_, v_;
    double lr_, b1_, b2_, eps_;
    int t_ = 0;
};

using StepCallback = std::function<void(int iter, const basis::BasisNet& net)>;

// Runs the offline meta-learning loop. If init is null a fresh net is
// initialized from the seed. on_step is invoked after every spectral
// normalization.
TrainResult train(const TrajectoryDataset& data, const TrainerConfig& cfg, const basis::BasisNet* init = nullptr,
                  const StepCallback& on_step = {});

} // namespace terradapt::trainer
