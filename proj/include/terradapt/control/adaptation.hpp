#pragma once

#include <string>

#include "terradapt/basis/basis_output.hpp"

namespace terradapt::control {

enum class AdaptLaw { Scalar, Matrix };

AdaptLaw parse_adapt_law(const std::string& name);
std::string to_string(AdaptLaw law);

struct AdaptConfig {
    AdaptLaw law = AdaptLaw::Scalar;
    double lambda = 0.01;
    MatX R = MatX::Identity(2, 2) * 0.1;  // n x n
    MatX Q = MatX::Identity(4, 4);        // n_theta x n_theta; the scalar law uses its diagonal
    double gamma0 = 0.01;
    double gamma_min = 1e-4;
    double gamma_max = 1e3;

    void validate(int n, int n_theta) const;
};

struct AdaptState {
    VecX theta_hat;
    VecX gamma;  // scalar law
    MatX Gamma;  // matrix law
    int rejected_steps = 0;
    int clamped_steps = 0;

    static AdaptState initial(const AdaptConfig& cfg, const VecX& theta0);
    // Gains as a matrix (diagonal for the scalar law).
    [[nodiscard]] MatX gain_matrix(AdaptLaw law) const;
};

// theta_dot_i = -lambda theta_i - gamma_i h_i^T R^-1 (H theta - y) + gamma_i h_i^T s
// gamma_dot_i = -2 lambda gamma_i + q_i + gamma_i h_i^T R^-1 h_i gamma_i
// with H = [h_1 ... h_ntheta]. Euler step, gamma clamped to [gamma_min, gamma_max].
// Returns false (state untouched) when the update is non-finite.
bool adapt_step_scalar(AdaptState& st, const AdaptConfig& cfg, const VecX& s, const VecX& y, const MatX& H,
                       double dt);

// theta_dot = -lambda theta - Gamma H^T R^-1 (H theta - y) + Gamma H^T s
// Gamma_dot = -2 lambda Gamma + Q - Gamma H^T R^-1 H Gamma
// then Gamma is symmetrized and its eigenvalues floored at gamma_min.
bool adapt_step_matrix(AdaptState& st, const AdaptConfig& cfg, const VecX& s, const VecX& y, const MatX& H,
                       double dt);

bool adapt_step(AdaptState& st, const AdaptConfig& cfg, const VecX& s, const VecX& y, const MatX& H, double dt);

inline bool adapt_step(AdaptState& st, const AdaptConfig& cfg, const VecX& s, const VecX& y,
                       const basis::BasisOutput& phi, const VecX& u, double dt) {
    return adapt_step(st, cfg, s, y, phi.design(u), dt);
}

// V = s^T s + (theta_hat - theta)^T Gamma^-1 (theta_hat - theta)
double lyapunov_value(const VecX& s, const AdaptState& st, AdaptLaw law, const VecX& theta_true);

} // namespace terradapt::control
