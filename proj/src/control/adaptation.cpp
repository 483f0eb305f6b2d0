#include "terradapt/control/adaptation.hpp"

#include <algorithm>

#include "terradapt/common/log.hpp"

namespace terradapt::control {

AdaptLaw parse_adapt_law(const std::string& name) {
    if (name == "scalar") return AdaptLaw::Scalar;
    if (name == "matrix") return AdaptLaw::Matrix;
    throw ConfigError("unknown adaptation law '" + name + "' (expected scalar or matrix)");
}

std::string to_string(AdaptLaw law) { return law == AdaptLaw::Scalar ? "scalar" : "matrix"; }

void AdaptConfig::validate(int n, int n_theta) const {
    if (lambda < 0.0) throw ConfigError("adaptation lambda must be non-negative");
    if (R.rows() != n || R.cols() != n) throw ConfigError("adaptation R has the wrong size");
    if (Q.rows() != n_theta || Q.cols() != n_theta) throw ConfigError("adaptation Q has the wrong size");
    if (Eigen::LLT<MatX>(R).info() != Eigen::Success) throw ConfigError("adaptation R must be positive definite");
    if (Eigen::LLT<MatX>(Q).info() != Eigen::Success) throw ConfigError("adaptation Q must be positive definite");
    if (!(gamma_min > 0.0) || gamma_max < gamma_min) throw ConfigError("need 0 < gamma_min <= gamma_max");
    if (!(gamma0 >= gamma_min && gamma0 <= gamma_max)) throw ConfigError("gamma0 must lie in [gamma_min, gamma_max]");
}

AdaptState AdaptState::initial(const AdaptConfig& cfg, const VecX& theta0) {
    AdaptState st;
    st.theta_hat = theta0;
    const auto p = theta0.size();
    st.gamma = VecX::Constant(p, cfg.gamma0);
    st.Gamma = MatX::Identity(p, p) * cfg.gamma0;
    return st;
}

MatX AdaptState::gain_matrix(AdaptLaw law) const {
    return law == AdaptLaw::Scalar ? MatX(gamma.asDiagonal()) : Gamma;
}

namespace {

void check_dims(const AdaptState& st, const AdaptConfig& cfg, const VecX& s, const VecX& y, const MatX& H) {
    const auto p = st.theta_hat.size();
    if (H.cols() != p || H.rows() != s.size() || y.size() != s.size() || cfg.R.rows() != s.size())
        throw DimensionError("adaptation inputs have inconsistent sizes");
}

} // namespace

bool adapt_step_scalar(AdaptState& st, const AdaptConfig& cfg, const VecX& s, const VecX& y, const MatX& H,
                       double dt) {
    check_dims(st, cfg, s, y, H);
    const Eigen::LLT<MatX> Rllt(cfg.R);
    const VecX pred_err = H * st.theta_hat - y;
    const VecX Rinv_err = Rllt.solve(pred_err);
    const MatX Rinv_H = Rllt.solve(H);
    const auto p = st.theta_hat.size();
    VecX theta = st.theta_hat;
    VecX gamma = st.gamma;
    bool clamped = false;
    for (Eigen::Index i = 0; i < p; ++i) {
        const double g = st.gamma(i);
        const double theta_dot =
            -cfg.lambda * st.theta_hat(i) - g * H.col(i).dot(Rinv_err) + g * s.dot(H.col(i));
        const double gamma_dot = -2.0 * cfg.lambda * g + cfg.Q(i, i) + g * H.col(i).dot(Rinv_H.col(i)) * g;
        theta(i) += dt * theta_dot;
        gamma(i) += dt * gamma_dot;
        if (gamma(i) < cfg.gamma_min || gamma(i) > cfg.gamma_max) clamped = true;
        gamma(i) = std::clamp(gamma(i), cfg.gamma_min, cfg.gamma_max);
    }
    if (!theta.allFinite() || !gamma.allFinite()) {
        ++st.rejected_steps;
        log().warn("adaptation step rejected: non-finite update");
        return false;
    }
    if (clamped) ++st.clamped_steps;
    st.theta_hat = theta;
    st.gamma = gamma;
    return true;
}

bool adapt_step_matrix(AdaptState& st, const AdaptConfig& cfg, const VecX& s, const VecX& y, const MatX& H,
                       double dt) {
    check_dims(st, cfg, s, y, H);
    const Eigen::LLT<MatX> Rllt(cfg.R);
    const MatX& G = st.Gamma;
    const VecX theta_dot =
        -cfg.lambda * st.theta_hat - G * (H.transpose() * Rllt.solve(H * st.theta_hat - y)) + G * (H.transpose() * s);
    const MatX Gamma_dot = -2.0 * cfg.lambda * G + cfg.Q - G * H.transpose() * Rllt.solve(H) * G;
    VecX theta = st.theta_hat + dt * theta_dot;
    MatX Gamma = G + dt * Gamma_dot;
    if (!theta.allFinite() || !Gamma.allFinite()) {
        ++st.rejected_steps;
        log().warn("adaptation step rejected: non-finite update");
        return false;
    }
    Gamma = 0.5 * (Gamma + Gamma.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<MatX> eig(Gamma);
    const VecX ev = eig.eigenvalues();
    if (ev.minCoeff() < cfg.gamma_min || ev.maxCoeff() > cfg.gamma_max) {
        ++st.clamped_steps;
        const VecX fixed = ev.cwiseMax(cfg.gamma_min).cwiseMin(cfg.gamma_max);
        Gamma = eig.eigenvectors() * fixed.asDiagonal() * eig.eigenvectors().transpose();
        Gamma = 0.5 * (Gamma + Gamma.transpose()).eval();
    }
    st.theta_hat = theta;
    st.Gamma = Gamma;
    return true;
}

bool adapt_step(AdaptState& st, const AdaptConfig& cfg, const VecX& s, const VecX& y, const MatX& H, double dt) {
    return cfg.law == AdaptLaw::Scalar ? adapt_step_scalar(st, cfg, s, y, H, dt)
                                       : adapt_step_matrix(st, cfg, s, y, H, dt);
}

double lyapunov_value(const VecX& s, const AdaptState& st, AdaptLaw law, const VecX& theta_true) {
    const VecX err = st.theta_hat - theta_true;
    if (law == AdaptLaw::Scalar) return s.squaredNorm() + (err.array().square() / st.gamma.array()).sum();
    return s.squaredNorm() + err.dot(st.Gamma.llt().solve(err));
}

} // namespace terradapt::control
