#pragma once

#include <vector>

#include "terradapt/basis/basis_function.hpp"
#include "terradapt/trainer/dataset.hpp"

namespace terradapt::trainer {

struct Window {
    int traj = 0;
    int start = 0;   // zero-based first sample
    int length = 1;  // samples
};

// Stacked per-sample designs of a window: rows n*t .. n*t+n-1 hold
// H_t = [Phi_1 u_t, ..., Phi_ntheta u_t].
struct WindowDesign {
    MatX H;  // (n * L) x n_theta
    VecX Y;  // n * L
};

// phi_flat holds one flat basis output per column.
WindowDesign stack_design(const MatX& phi_flat, const MatX& U, const MatX& Y, const basis::BasisShape& shape);
WindowDesign window_design(const basis::BasisFunction& basis, const Trajectory& traj, const Window& w);
WindowDesign window_design(const basis::BasisNet& net, const Trajectory& traj, const Window& w);

struct RidgeSolution {
    VecX theta;
    double cost = 0.0;  // sum_t ||y_t - H_t theta||^2, no regularization term
};

// theta* = (sum H^T H + lambda I)^-1 (sum H^T y + lambda theta_r) by Cholesky.
RidgeSolution solve_ridge(const WindowDesign& d, double lambda_r, const VecX& theta_r);
RidgeSolution solve_theta_star(const basis::BasisNet& net, const Trajectory& traj, const Window& w,
                               double lambda_r, const VecX& theta_r);

double window_cost(const WindowDesign& d, const VecX& theta);
double window_cost(const basis::BasisNet& net, const Trajectory& traj, const Window& w, const VecX& theta);

// Meta-loss sum_k J_k of a set of windows with theta* substituted, and its
// exact gradient with respect to every net parameter (adjoint of the normal
// equations, one extra solve per window).
struct MetaLoss {
    double loss = 0.0;
    int samples = 0;
    basis::NetGradients grad;
};

MetaLoss meta_loss(const basis::BasisNet& net, const TrajectoryDataset& data, const std::vector<Window>& windows,
                   double lambda_r, const VecX& theta_r, bool with_gradient = true);

// Largest per-parameter relative error between the analytic meta-gradient and
// central finite differences with step h. The denominator is floored at
// 1e-3 of the largest finite-difference magnitude.
struct GradCheck {
    double max_rel_error = 0.0;
    double max_abs_grad = 0.0;
    int parameters = 0;
};

GradCheck gradcheck_meta(const basis::BasisNet& net, const TrajectoryDataset& data, const std::vector<Window>& windows,
                         double lambda_r, const VecX& theta_r, double h = 1e-5);

// theta* fitted over every sample of every trajectory.
RidgeSolution fit_theta_all(const basis::BasisNet& net, const TrajectoryDataset& data, double lambda_r,
                            const VecX& theta_r);

} // namespace terradapt::trainer
