#include <doctest.h>

#include "helpers.hpp"
#include "terradapt/basis/basis_function.hpp"
#include "terradapt/trainer/dataset.hpp"
#include "terradapt/trainer/train.hpp"

using namespace terradapt;
using namespace terradapt::trainer;

namespace {

TrajectoryDataset random_dataset(std::mt19937_64& rng, int trajectories, int length, int feature_dim = 3) {
    TrajectoryDataset ds;
    ds.dt = 0.05;
    ds.state_dim = 2;
    ds.input_dim = 2;
    ds.feature_dim = feature_dim;
    ds.residual_dim = 2;
    for (int k = 0; k < trajectories; ++k)
        ds.trajectories.push_back({test::randn(rng, 2, length), test::randn(rng, 2, length),
                                   test::randn(rng, feature_dim, length), test::randn(rng, 2, length)});
    return ds;
}

// y_t = (sum_i theta_i Phi_i(x_t, e_t)) u_t from a known net, one theta per trajectory.
TrajectoryDataset planted_dataset(const basis::BasisNet& truth, std::mt19937_64& rng, int trajectories, int length,
                                  double noise) {
    TrajectoryDataset ds = random_dataset(rng, trajectories, length, truth.input_dim() - 2);
    std::normal_distribution<double> g(0.0, 1.0);
    for (Trajectory& t : ds.trajectories) {
        VecX theta(4);
        for (int i = 0; i < 4; ++i) theta(i) = 1.0 + g(rng);
        for (int k = 0; k < length; ++k) {
            const basis::BasisOutput phi = truth.forward(t.x.col(k), t.e.col(k));
            t.y.col(k) = basis::contract(phi, theta) * t.u.col(k) + noise * test::randn(rng, 2, 1);
        }
    }
    return ds;
}

// Ridge solution from an augmented QR least-squares problem.
VecX qr_oracle(const WindowDesign& d, double lambda, const VecX& theta_r) {
    const Eigen::Index p = d.H.cols();
    MatX A(d.H.rows() + p, p);
    VecX b(d.H.rows() + p);
    A << d.H, std::sqrt(lambda) * MatX::Identity(p, p);
    b << d.Y, std::sqrt(lambda) * theta_r;
    return A.colPivHouseholderQr().solve(b);
}

double regularized(const WindowDesign& d, const VecX& theta, double lambda, const VecX& theta_r) {
    return window_cost(d, theta) + lambda * (theta - theta_r).squaredNorm();
}

} // namespace

TEST_CASE("theta* special cases") {
    std::mt19937_64 rng(1);
    TrajectoryDataset ds = random_dataset(rng, 1, 20);
    const basis::BasisNet net = basis::BasisNet::initialized(5, {8}, {2, 2, 4}, basis::Activation::Tanh, 3);
    const Window w{0, 2, 10};

    Trajectory quiet = ds.trajectories[0];
    quiet.y.setZero();
    CHECK(solve_theta_star(net, quiet, w, 0.1, VecX::Zero(4)).theta.norm() <= 1e-15);

    const VecX theta_r = VecX::LinSpaced(4, -1.0, 2.0);
    CHECK((solve_theta_star(net, ds.trajectories[0], w, 1e6, theta_r).theta - theta_r).norm() <= 1e-3);
    CHECK_THROWS_AS((void)solve_theta_star(net, ds.trajectories[0], Window{0, 15, 10}, 0.1, theta_r), Error);
}

TEST_CASE("theta* agrees with a QR least-squares oracle and is optimal") {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int inst = 0; inst < 20; ++inst) {
        const TrajectoryDataset ds = random_dataset(rng, 1, 5);
        const basis::BasisNet net =
            basis::BasisNet::initialized(5, {6}, {2, 2, 4}, basis::Activation::Tanh, 50 + static_cast<unsigned>(inst));
        const Window w{0, 0, 5};
        const VecX theta_r = test::randn(rng, 4, 1);
        const double lambda = 0.05 + 0.1 * inst;
        const RidgeSolution sol = solve_theta_star(net, ds.trajectories[0], w, lambda, theta_r);
        const WindowDesign d = window_design(net, ds.trajectories[0], w);
        const VecX oracle = qr_oracle(d, lambda, theta_r);
        CHECK((sol.theta - oracle).norm() <= 1e-8 * std::max(1.0, oracle.norm()));
        CHECK(sol.cost == doctest::Approx(window_cost(d, sol.theta)));

        const double best = regularized(d, sol.theta, lambda, theta_r);
        for (int k = 0; k < 100; ++k) {
            const VecX delta = 1e-3 * test::randn(rng, 4, 1);
            REQUIRE(regularized(d, sol.theta + delta, lambda, theta_r) >= best * (1.0 - 1e-10));
        }
    }
}

TEST_CASE("constant basis reduces to ordinary ridge regression") {
    std::mt19937_64 rng(3);
    const TrajectoryDataset ds = random_dataset(rng, 1, 30);
    const basis::ConstantBasis cb;
    const Window w{0, 4, 20};
    const WindowDesign d = window_design(cb, ds.trajectories[0], w);
    // Rows for sample t: [u1 u2 0 0; 0 0 u1 u2].
    MatX H = MatX::Zero(40, 4);
    VecX Y(40);
    for (int k = 0; k < 20; ++k) {
        const VecX u = ds.trajectories[0].u.col(4 + k);
        H.block(2 * k, 0, 1, 2) = u.transpose();
        H.block(2 * k + 1, 2, 1, 2) = u.transpose();
        Y.segment(2 * k, 2) = ds.trajectories[0].y.col(4 + k);
    }
    CHECK((d.H - H).norm() == 0.0);
    const VecX theta_r = VecX::Ones(4);
    const RidgeSolution sol = solve_ridge(d, 0.3, theta_r);
    const VecX ridge = (H.transpose() * H + 0.3 * MatX::Identity(4, 4)).ldlt().solve(H.transpose() * Y + 0.3 * theta_r);
    CHECK((sol.theta - ridge).norm() <= 1e-12);
    CHECK(sol.cost == doctest::Approx((Y - H * ridge).squaredNorm()).epsilon(1e-12));
}

TEST_CASE("realizable data fits with vanishing cost as lambda shrinks") {
    std::mt19937_64 rng(4);
    const basis::BasisNet truth = basis::BasisNet::initialized(5, {8}, {2, 2, 4}, basis::Activation::Tanh, 9);
    const TrajectoryDataset ds = planted_dataset(truth, rng, 1, 40, 0.0);
    const Window w{0, 0, 40};
    double prev = 1e300;
    for (double lambda : {1.0, 1e-2, 1e-4, 1e-6}) {
        const double c = solve_theta_star(truth, ds.trajectories[0], w, lambda, VecX::Zero(4)).cost;
        CHECK(c <= prev);
        prev = c;
    }
    CHECK(prev <= 1e-8);
}

TEST_CASE("meta-gradient vanishes without data") {
    std::mt19937_64 rng(5);
    TrajectoryDataset ds = random_dataset(rng, 2, 12);
    for (Trajectory& t : ds.trajectories) t.y.setZero();
    const basis::BasisNet net = basis::BasisNet::initialized(5, {6}, {2, 2, 4}, basis::Activation::Tanh, 1);
    const MetaLoss ml = meta_loss(net, ds, {{0, 0, 6}, {1, 3, 9}}, 0.1, VecX::Zero(4));
    CHECK(ml.loss == 0.0);
    CHECK(basis::BasisNet::flatten(ml.grad).norm() == 0.0);
    const MetaLoss none = meta_loss(net, ds, {}, 0.1, VecX::Zero(4));
    CHECK(none.samples == 0);
    CHECK(basis::BasisNet::flatten(none.grad).norm() == 0.0);
}

TEST_CASE("gradcheck on a small tanh net") {
    std::mt19937_64 rng(6);
    const TrajectoryDataset ds = random_dataset(rng, 2, 15);
    const basis::BasisNet net = basis::BasisNet::initialized(5, {5, 4}, {2, 2, 3}, basis::Activation::Tanh, 2);
    const GradCheck gc = gradcheck_meta(net, ds, {{0, 1, 7}, {1, 0, 15}}, 0.1, VecX::Ones(3));
    CHECK(gc.parameters == net.num_parameters());
    CHECK(gc.max_rel_error <= 1e-4);
}

TEST_CASE("one SGD step on a linear net matches the closed-form meta-gradient") {
    std::mt19937_64 rng(7);
    const TrajectoryDataset ds = random_dataset(rng, 1, 30);
    basis::BasisNet init = basis::BasisNet::initialized(5, {}, {2, 2, 4}, basis::Activation::Identity, 4);
    init.set_parameters(0.1 * init.parameters());  // keeps the step clear of normalization

    TrainerConfig cfg;
    cfg.hidden = {};
    cfg.activation = "identity";
    cfg.batch_size = 1;
    cfg.window_min_s = cfg.window_max_s = 100.0;  // clamps to the whole trajectory
    cfg.max_iters = 1;
    cfg.optimizer = Optimizer::Sgd;
    cfg.learning_rate = 1e-3;
    cfg.lambda_r = 0.1;

    // Linear in parameters: H(p) = sum_j p_j H(e_j); differentiate theta* exactly.
    const Window w{0, 0, 30};
    const WindowDesign d = window_design(init, ds.trajectories[0], w);
    MatX A = d.H.transpose() * d.H;
    A.diagonal().array() += cfg.lambda_r;
    const VecX theta = A.fullPivLu().solve(d.H.transpose() * d.Y + cfg.lambda_r * cfg.theta_r);
    const VecX r = d.Y - d.H * theta;
    const VecX p0 = init.parameters();
    VecX grad(p0.size());
    basis::BasisNet unit = init;
    for (Eigen::Index j = 0; j < p0.size(); ++j) {
        unit.set_parameters(VecX::Unit(p0.size(), j));
        const MatX dH = window_design(unit, ds.trajectories[0], w).H;
        const VecX dtheta = A.fullPivLu().solve(dH.transpose() * r - d.H.transpose() * (dH * theta));
        grad(j) = -2.0 * r.dot(dH * theta + d.H * dtheta);
    }

    const TrainResult res = train(ds, cfg, &init);
    REQUIRE(res.history.size() == 1);
    CHECK(res.history[0].loss == doctest::Approx(r.squaredNorm()).epsilon(1e-12));
    const VecX expected = p0 - cfg.learning_rate * grad;
    CHECK((res.net.parameters() - expected).norm() <= 1e-12 * expected.norm());
}

TEST_CASE("training: spectral constraint each step, determinism, decreasing loss") {
    std::mt19937_64 rng(8);
    const basis::BasisNet truth = basis::BasisNet::initialized(6, {12}, {2, 2, 4}, basis::Activation::Tanh, 31);
    const TrajectoryDataset ds = planted_dataset(truth, rng, 6, 200, 0.02);

    TrainerConfig cfg;
    cfg.hidden = {16, 16};
    cfg.max_iters = 400;
    cfg.batch_size = 10;
    cfg.window_max_s = 5.0;
    cfg.learning_rate = 3e-3;
    cfg.convergence_tol = 0.0;
    cfg.seed = 3;

    double worst_norm = 0.0;
    int calls = 0;
    const TrainResult a = train(ds, cfg, nullptr, [&](int, const basis::BasisNet& net) {
        ++calls;
        for (const auto& l : net.layers())
            worst_norm = std::max(worst_norm, Eigen::JacobiSVD<MatX>(l.W).singularValues()(0));
    });
    CHECK(calls == 400);
    CHECK(worst_norm <= 1.0 + 1e-6);

    const TrainResult b = train(ds, cfg);
    REQUIRE(a.history.size() == b.history.size());
    for (std::size_t k = 0; k < a.history.size(); ++k) REQUIRE(a.history[k].loss == b.history[k].loss);
    CHECK(a.net.parameters() == b.net.parameters());
    CHECK(a.theta0 == b.theta0);

    // 100-step moving average, allowing 5% upticks.
    std::vector<double> avg;
    for (std::size_t k = 100; k <= a.history.size(); k += 50) {
        double s = 0.0;
        for (std::size_t j = k - 100; j < k; ++j) s += a.history[j].mean_loss;
        avg.push_back(s / 100.0);
    }
    for (std::size_t k = 1; k < avg.size(); ++k) CHECK(avg[k] <= 1.05 * avg[k - 1]);
    CHECK(avg.back() < 0.7 * avg.front());
}

TEST_CASE("window sampling stays inside the trajectories") {
    std::mt19937_64 rng(9);
    TrajectoryDataset ds = random_dataset(rng, 3, 50);
    ds.trajectories[1] = {test::randn(rng, 2, 10), test::randn(rng, 2, 10), test::randn(rng, 3, 10),
                          test::randn(rng, 2, 10)};
    TrainerConfig cfg;
    cfg.batch_size = 500;
    std::mt19937_64 pick(1);
    for (const Window& w : sample_windows(ds, cfg, pick)) {
        const int len = ds.trajectories[static_cast<std::size_t>(w.traj)].length();
        REQUIRE(w.length >= 1);
        REQUIRE(w.length <= len);
        REQUIRE(w.start >= 0);
        REQUIRE(w.start + w.length <= len);
        REQUIRE(w.length >= std::min(len, 24));  // 1.2 s at 20 Hz
    }
}

TEST_CASE("dataset file round-trip") {
    test::TempDir tmp("dataset");
    std::mt19937_64 rng(10);
    TrajectoryDataset ds = random_dataset(rng, 2, 17);
    ds.metadata = R"({"note":"x"})";
    write_dataset(ds, tmp / "d.csv");
    const TrajectoryDataset r = read_dataset(tmp / "d.csv");
    CHECK(r.dt == ds.dt);
    CHECK(r.metadata == ds.metadata);
    REQUIRE(r.trajectories.size() == 2);
    for (std::size_t k = 0; k < 2; ++k) {
        CHECK(r.trajectories[k].x == ds.trajectories[k].x);
        CHECK(r.trajectories[k].u == ds.trajectories[k].u);
        CHECK(r.trajectories[k].e == ds.trajectories[k].e);
        CHECK(r.trajectories[k].y == ds.trajectories[k].y);
    }
    CHECK_THROWS_AS((void)read_dataset(tmp / "missing.csv"), IoError);

    TrajectoryDataset bad = ds;
    bad.trajectories[0].y(0, 3) = std::nan("");
    CHECK_THROWS_AS(bad.validate(), NumericalError);
}

TEST_CASE("trainer config validation") {
    TrainerConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.lambda_r = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.batch_size = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
