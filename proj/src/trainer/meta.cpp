#include "terradapt/trainer/meta.hpp"

#include <algorithm>
#include <cmath>

namespace terradapt::trainer {

using basis::BasisNet;
using basis::BasisShape;

namespace {

void check_window(const TrajectoryDataset& data, const Window& w) {
    if (w.traj < 0 || w.traj >= static_cast<int>(data.trajectories.size()))
        throw DimensionError("window trajectory index out of range");
    const int len = data.trajectories[static_cast<std::size_t>(w.traj)].length();
    if (w.length < 1 || w.start < 0 || w.start + w.length > len) throw DimensionError("window outside trajectory");
}

void check_window(const Trajectory& t, const Window& w) {
    if (w.length < 1 || w.start < 0 || w.start + w.length > t.length())
        throw DimensionError("window outside trajectory");
}

MatX net_input(const Trajectory& t, int start, int len) {
    MatX X(t.x.rows() + t.e.rows(), len);
    X.topRows(t.x.rows()) = t.x.middleCols(start, len);
    X.bottomRows(t.e.rows()) = t.e.middleCols(start, len);
    return X;
}

} // namespace

WindowDesign stack_design(const MatX& phi_flat, const MatX& U, const MatX& Y, const BasisShape& shape) {
    const auto L = phi_flat.cols();
    if (phi_flat.rows() != shape.size() || U.cols() != L || Y.cols() != L || U.rows() != shape.m
        || Y.rows() != shape.n)
        throw DimensionError("design inputs do not match the basis shape");
    const int n = shape.n;
    const int m = shape.m;
    const int nm = n * m;
    WindowDesign d{MatX::Zero(n * L, shape.n_theta), VecX(n * L)};
    for (Eigen::Index t = 0; t < L; ++t) {
        for (int i = 0; i < shape.n_theta; ++i)
            for (int a = 0; a < n; ++a) {
                double acc = 0.0;
                for (int b = 0; b < m; ++b) acc += phi_flat(i * nm + a * m + b, t) * U(b, t);
                d.H(n * t + a, i) = acc;
            }
        d.Y.segment(n * t, n) = Y.col(t);
    }
    return d;
}

WindowDesign window_design(const basis::BasisFunction& basis, const Trajectory& traj, const Window& w) {
    check_window(traj, w);
    const BasisShape s = basis.shape();
    MatX phi(s.size(), w.length);
    for (int k = 0; k < w.length; ++k)
        phi.col(k) = basis.evaluate(traj.x.col(w.start + k), traj.e.col(w.start + k)).flat();
    return stack_design(phi, traj.u.middleCols(w.start, w.length), traj.y.middleCols(w.start, w.length), s);
}

WindowDesign window_design(const BasisNet& net, const Trajectory& traj, const Window& w) {
    check_window(traj, w);
    const MatX phi = net.forward_batch(net_input(traj, w.start, w.length));
    return stack_design(phi, traj.u.middleCols(w.start, w.length), traj.y.middleCols(w.start, w.length),
                        net.shape());
}

RidgeSolution solve_ridge(const WindowDesign& d, double lambda_r, const VecX& theta_r) {
    const auto p = d.H.cols();
    if (theta_r.size() != p) throw DimensionError("theta_r size does not match basis");
    if (!(lambda_r > 0.0)) throw ConfigError("lambda_r must be positive");
    MatX A = d.H.transpose() * d.H;
    A.diagonal().array() += lambda_r;
    const VecX b = d.H.transpose() * d.Y + lambda_r * theta_r;
    Eigen::LLT<MatX> llt(A);
    if (llt.info() != Eigen::Success) throw NumericalError("ridge normal equations are not positive definite");
    RidgeSolution sol;
    sol.theta = llt.solve(b);
    sol.cost = window_cost(d, sol.theta);
    return sol;
}

RidgeSolution solve_theta_star(const BasisNet& net, const Trajectory& traj, const Window& w, double lambda_r,
                               const VecX& theta_r) {
    return solve_ridge(window_design(net, traj, w), lambda_r, theta_r);
}

double window_cost(const WindowDesign& d, const VecX& theta) { return (d.Y - d.H * theta).squaredNorm(); }

double window_cost(const BasisNet& net, const Trajectory& traj, const Window& w, const VecX& theta) {
    return window_cost(window_design(net, traj, w), theta);
}

MetaLoss meta_loss(const BasisNet& net, const TrajectoryDataset& data, const std::vector<Window>& windows,
                   double lambda_r, const VecX& theta_r, bool with_gradient) {
    const BasisShape s = net.shape();
    const int n = s.n;
    const int m = s.m;
    const int nm = n * m;
    const int p = s.n_theta;
    if (data.residual_dim != n || data.input_dim != m) throw DimensionError("dataset does not match basis shape");
    if (data.state_dim + data.feature_dim != net.input_dim()) throw DimensionError("dataset does not match net input");

    int total = 0;
    for (const Window& w : windows) {
        check_window(data, w);
        total += w.length;
    }
    MetaLoss out;
    if (total == 0) {
        if (with_gradient) out.grad.set_zero_like(net.layers());
        return out;
    }

    // One batched forward over every window sample.
    MatX X(net.input_dim(), total);
    int col = 0;
    for (const Window& w : windows) {
        X.middleCols(col, w.length) = net_input(data.trajectories[static_cast<std::size_t>(w.traj)], w.start, w.length);
        col += w.length;
    }
    basis::ForwardCache cache;
    const MatX phi = net.forward_batch(X, with_gradient ? &cache : nullptr);
    MatX d_phi = with_gradient ? MatX::Zero(phi.rows(), total) : MatX();

    col = 0;
    for (const Window& w : windows) {
        const Trajectory& t = data.trajectories[static_cast<std::size_t>(w.traj)];
        const MatX U = t.u.middleCols(w.start, w.length);
        const WindowDesign d = stack_design(phi.middleCols(col, w.length), U, t.y.middleCols(w.start, w.length), s);
        MatX A = d.H.transpose() * d.H;
        A.diagonal().array() += lambda_r;
        Eigen::LLT<MatX> llt(A);
        if (llt.info() != Eigen::Success) throw NumericalError("ridge normal equations are not positive definite");
        const VecX theta = llt.solve(d.H.transpose() * d.Y + lambda_r * theta_r);
        const VecX r = d.Y - d.H * theta;
        out.loss += r.squaredNorm();

        if (with_gradient) {
            // dJ/dtheta = -2 H^T r; mu = A^-1 dJ/dtheta.
            const VecX mu = llt.solve(-2.0 * d.H.transpose() * r);
            const VecX Hmu = d.H * mu;
            for (int k = 0; k < w.length; ++k) {
                for (int a = 0; a < n; ++a) {
                    const double rk = r(n * k + a);
                    const double hm = Hmu(n * k + a);
                    for (int i = 0; i < p; ++i) {
                        const double gH = -2.0 * rk * theta(i) + rk * mu(i) - hm * theta(i);
                        for (int b = 0; b < m; ++b) d_phi(i * nm + a * m + b, col + k) = gH * U(b, k);
                    }
                }
            }
        }
        col += w.length;
    }
    out.samples = total;
    if (with_gradient) out.grad = net.backward(cache, d_phi);
    return out;
}

GradCheck gradcheck_meta(const BasisNet& net, const TrajectoryDataset& data, const std::vector<Window>& windows,
                         double lambda_r, const VecX& theta_r, double h) {
    const MetaLoss ml = meta_loss(net, data, windows, lambda_r, theta_r, true);
    const VecX analytic = BasisNet::flatten(ml.grad);
    const VecX p0 = net.parameters();
    VecX fd(p0.size());
    BasisNet probe = net;
    for (Eigen::Index j = 0; j < p0.size(); ++j) {
        VecX p = p0;
        p(j) = p0(j) + h;
        probe.set_parameters(p);
        const double fp = meta_loss(probe, data, windows, lambda_r, theta_r, false).loss;
        p(j) = p0(j) - h;
        probe.set_parameters(p);
        const double fm = meta_loss(probe, data, windows, lambda_r, theta_r, false).loss;
        fd(j) = (fp - fm) / (2.0 * h);
    }
    GradCheck gc;
    gc.parameters = static_cast<int>(p0.size());
    gc.max_abs_grad = fd.cwiseAbs().maxCoeff();
    const double floor = std::max(1e-3 * gc.max_abs_grad, 1e-300);
    for (Eigen::Index j = 0; j < p0.size(); ++j) {
        const double denom = std::max({std::abs(analytic(j)), std::abs(fd(j)), floor});
        gc.max_rel_error = std::max(gc.max_rel_error, std::abs(analytic(j) - fd(j)) / denom);
    }
    return gc;
}

RidgeSolution fit_theta_all(const BasisNet& net, const TrajectoryDataset& data, double lambda_r,
                            const VecX& theta_r) {
    const int p = net.shape().n_theta;
    MatX A = MatX::Zero(p, p);
    VecX b = VecX::Zero(p);
    std::vector<WindowDesign> designs;
    for (const Trajectory& t : data.trajectories) {
        designs.push_back(window_design(net, t, Window{0, 0, t.length()}));
        A += designs.back().H.transpose() * designs.back().H;
        b += designs.back().H.transpose() * designs.back().Y;
    }
    A.diagonal().array() += lambda_r;
    b += lambda_r * theta_r;
    Eigen::LLT<MatX> llt(A);
    if (llt.info() != Eigen::Success) throw NumericalError("ridge normal equations are not positive definite");
    RidgeSolution sol;
    sol.theta = llt.solve(b);
    for (const auto& d : designs) sol.cost += window_cost(d, sol.theta);
    return sol;
}

} // namespace terradapt::trainer
