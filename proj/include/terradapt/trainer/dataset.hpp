#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "terradapt/common/math.hpp"

namespace terradapt::trainer {

// One continuous trajectory; column t of every matrix is sample t.
struct Trajectory {
    MatX x;  // state sub-vector fed to the basis (state_dim x T)
    MatX u;  // control input (m x T)
    MatX e;  // terrain features (feature_dim x T)
    MatX y;  // filtered dynamics residual (n x T)

    [[nodiscard]] int length() const { return static_cast<int>(x.cols()); }
};

struct TrajectoryDataset {
    double dt = 0.05;
    int state_dim = 2;
    int input_dim = 2;
    int feature_dim = 8;
    int residual_dim = 2;
    std::vector<Trajectory> trajectories;
    std::string metadata;  // free-form JSON echoed from the generator

    void validate() const;
    [[nodiscard]] std::size_t total_samples() const;
};

// CSV with '#'-prefixed header lines, then one row per sample:
// traj,t,x...,u...,e...,y...   Values are printed with 17 significant digits.
void write_dataset(const TrajectoryDataset& data, const std::filesystem::path& path);
TrajectoryDataset read_dataset(const std::filesystem::path& path);

} // namespace terradapt::trainer
