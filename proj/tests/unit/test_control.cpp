#include <doctest.h>

#include <numbers>

#include "helpers.hpp"
#include "terradapt/basis/basis_function.hpp"
#include "terradapt/control/adaptation.hpp"
#include "terradapt/control/lateral.hpp"
#include "terradapt/control/reference.hpp"
#include "terradapt/control/residual.hpp"
#include "terradapt/control/tracked_controller.hpp"

using namespace terradapt;
using namespace terradapt::control;

namespace {

const basis::BasisOutput kConst = basis::ConstantBasis().evaluate(VecX::Zero(2), VecX::Zero(8));

AdaptConfig adapt_config(int n_theta) {
    AdaptConfig c;
    c.lambda = 0.02;
    c.R = Vec2(0.5, 2.0).asDiagonal();
    c.Q = MatX::Identity(n_theta, n_theta) * 0.3;
    c.gamma0 = 0.2;
    return c;
}

} // namespace

TEST_CASE("reference velocities") {
    const PoseGains g;
    // On the trajectory moving along +x.
    const ReferenceState on = reference_velocities({2.0, 1.0}, 0.0, {{2.0, 1.0}, {1.0, 0.0}, 0.0}, g, 0.0);
    CHECK(on.v_ref_x == doctest::Approx(1.0));
    CHECK(on.omega_ref == doctest::Approx(0.0));
    CHECK_FALSE(on.turn_in_place);

    // Standing on the target: heading tracks psi_d.
    const ReferenceState tip = reference_velocities({0.0, 0.0}, 0.2, {{0.0, 0.0}, {0.0, 0.0}, 0.7}, g, 0.0);
    CHECK(tip.turn_in_place);
    CHECK(tip.psi_ref == doctest::Approx(0.7));
    CHECK(tip.omega_ref == doctest::Approx(g.k_psi * 0.5));

    // Static target straight to the left.
    const ReferenceState left = reference_velocities({0.0, 0.0}, 0.0, {{0.0, 1.0}, {0.0, 0.0}, 0.0}, g, 0.0);
    CHECK(std::abs(left.v_ref_x) <= 1e-15);
    CHECK(left.psi_ref == doctest::Approx(std::numbers::pi / 2));
    CHECK(left.omega_ref == doctest::Approx(g.k_psi * std::numbers::pi / 2));

    // Heading error is taken on the circle.
    const ReferenceState wrap = reference_velocities({0.0, 0.0}, 3.0, {{0.0, 0.0}, {std::cos(-3.0), std::sin(-3.0)}, 0.0},
                                                     g, 0.0);
    CHECK(wrap.psi_ref == doctest::Approx(-3.0));
    CHECK(wrap.omega_ref == doctest::Approx(-g.k_psi * (6.0 - 2.0 * std::numbers::pi)));
}

TEST_CASE("turn-in-place switch stays finite near the threshold") {
    ReferenceGenerator gen(PoseGains{}, 0.05, 2.0);
    int switches = 0, crossings = 0;
    bool prev = false, above = false;
    for (int k = 0; k < 200; ++k) {
        // Target drifts through the target point so ||v_ref|| crosses v_eps.
        const double off = 0.05 * std::cos(0.05 * k);
        const ReferenceState r = gen.update({off, 0.0}, 0.1, {{0.0, 0.0}, {0.0, 0.0}, 0.5});
        REQUIRE(std::isfinite(r.omega_ref));
        REQUIRE(std::isfinite(r.omega_ref_dot));
        const bool now_above = r.v_ref_inertial.squaredNorm() > gen.gains().v_eps;
        if (k > 0 && r.turn_in_place != prev) ++switches;
        if (k > 0 && now_above != above) ++crossings;
        prev = r.turn_in_place;
        above = now_above;
    }
    CHECK(crossings >= 2);
    CHECK(switches <= crossings);
}

TEST_CASE("tracking error") {
    ReferenceState r;
    CHECK(tracking_error({0.0, 0.0}, r) == Vec2::Zero());
    r.v_ref_x = 1.0;
    CHECK(tracking_error({0.0, 0.0}, r) == Vec2(-1.0, 0.0));
    r.omega_ref = -0.4;
    CHECK(tracking_error({0.3, 0.2}, r).isApprox(Vec2(-0.7, 0.6)));
}

TEST_CASE("tracked control law") {
    const vehicle::TrackedParams p;
    const TrackedGains K;
    const ActuatorLimits lim;
    ReferenceState ref;
    ref.v_ref_x = 1.0;
    ref.omega_ref = 0.5;
    const Vec2 a = p.a_nominal() * ref.velocity();
    ref.v_ref_x_dot = a(0);
    ref.omega_ref_dot = a(1);
    const TrackedCommand zero = control_tracked(Vec2::Zero(), ref, kConst, VecX::Zero(4), p, K, lim);
    CHECK(zero.u.vector().norm() <= 1e-15);

    std::mt19937_64 rng(3);
    const Vec2 s = test::randn(rng, 2, 1);
    ref.v_ref_x_dot = 0.3;
    ref.omega_ref_dot = -0.2;
    const Vec2 nu = K.K() * s + p.a_nominal() * ref.velocity() - ref.acceleration();
    const TrackedCommand nom = control_tracked(s, ref, kConst, VecX::Zero(4), p, K, lim);
    CHECK(nom.u.u_v == doctest::Approx(-nu(0) / 2.0));
    CHECK(nom.u.u_omega == doctest::Approx(-nu(1) / 2.5));

    VecX theta(4);
    theta << -0.5, 0.1, 0.2, -0.3;
    Mat2 B;
    B << 2.0 - 0.5, 0.1, 0.2, 2.5 - 0.3;
    const TrackedCommand adapted = control_tracked(s, ref, kConst, theta, p, K, lim);
    CHECK((adapted.u.vector() - (-B.inverse() * nu)).norm() <= 1e-12);
    CHECK_FALSE(adapted.fallback);

    VecX cancel(4);
    cancel << -2.0, 0.0, 0.0, -2.5;
    const TrackedCommand fb = control_tracked(s, ref, kConst, cancel, p, K, lim);
    CHECK(fb.fallback);
    CHECK((fb.u.vector() - nom.u.vector()).norm() <= 1e-12);

    const TrackedCommand big = control_tracked(Vec2(-400.0, 300.0), ref, kConst, VecX::Zero(4), p, K, lim);
    CHECK(big.clamped);
    CHECK(big.u.u_v == doctest::Approx(lim.u_v_max));
    CHECK(big.u.u_omega == doctest::Approx(-lim.u_omega_max));
}

TEST_CASE("residual estimation") {
    const vehicle::TrackedParams p;
    const Vec2 v(0.6, -0.2), u(0.8, 0.1);
    const Vec2 nominal = p.a_nominal() * v + p.b_nominal() * u;
    const Vec2 eta(0.7, 0.5);
    const Vec2 scaled = p.a_nominal() * v + eta.asDiagonal() * (p.b_nominal() * u);
    for (ResidualFilterMode mode : {ResidualFilterMode::Residual, ResidualFilterMode::Measurement}) {
        ResidualEstimator nom(2.0, 0.05, mode), dist(2.0, 0.05, mode);
        Vec2 y0, y1;
        for (int k = 0; k < 100; ++k) {
            y0 = nom.tracked(nominal, v, u, p);
            y1 = dist.tracked(scaled, v, u, p);
        }
        CHECK(y0.norm() <= 1e-12);
        const Vec2 expected = (eta.array() - 1.0).matrix().asDiagonal() * (p.b_nominal() * u);
        CHECK((y1 - expected).norm() <= 1e-12);
    }
    CHECK(parse_residual_filter_mode("measurement") == ResidualFilterMode::Measurement);
}

TEST_CASE("filtered white noise variance follows alpha / (2 - alpha)") {
    ResidualEstimator est(2.0, 0.05);
    std::mt19937_64 rng(11);
    std::normal_distribution<double> g(0.0, 1.0);
    const vehicle::TrackedParams p;
    const int n = 40000;
    double sum = 0.0, sq = 0.0;
    for (int k = 0; k < n; ++k) {
        const Vec2 y = est.tracked(Vec2(g(rng), g(rng)), Vec2::Zero(), Vec2::Zero(), p);
        if (k < 100) continue;
        sum += y(0);
        sq += y(0) * y(0);
    }
    const double m = n - 100;
    const double var = sq / m - (sum / m) * (sum / m);
    const double expected = est.filter().white_noise_gain();
    INFO("variance " << var << " expected " << expected);
    CHECK(std::abs(var - expected) <= 0.2 * expected);
    LowPassFilter f(2.0, 0.05);
    CHECK(f.alpha() == doctest::Approx(0.05 / (0.05 + 1.0 / (4.0 * std::numbers::pi))));
}

TEST_CASE("scalar law: fixed points and a hand-evaluated step") {
    AdaptConfig c = adapt_config(4);
    c.lambda = 0.0;
    AdaptState st = AdaptState::initial(c, VecX::LinSpaced(4, 0.5, 2.0));
    const VecX theta0 = st.theta_hat;
    REQUIRE(adapt_step_scalar(st, c, Vec2::Zero(), Vec2::Zero(), MatX::Zero(2, 4), 0.05));
    CHECK(st.theta_hat == theta0);
    CHECK((st.gamma - VecX::Constant(4, 0.2 + 0.3 * 0.05)).norm() <= 1e-15);

    c.lambda = 0.02;
    c.Q = MatX::Identity(4, 4) * (2.0 * c.lambda * c.gamma0);
    AdaptState eq = AdaptState::initial(c, VecX::Zero(4));
    REQUIRE(adapt_step_scalar(eq, c, Vec2::Zero(), Vec2::Zero(), MatX::Zero(2, 4), 0.05));
    CHECK((eq.gamma - VecX::Constant(4, c.gamma0)).norm() <= 1e-15);

    c = adapt_config(4);
    std::mt19937_64 rng(2);
    AdaptState hs = AdaptState::initial(c, test::randn(rng, 4, 1));
    hs.gamma = VecX::LinSpaced(4, 0.1, 0.4);
    const MatX H = test::randn(rng, 2, 4);
    const VecX s = test::randn(rng, 2, 1), y = test::randn(rng, 2, 1);
    const double dt = 0.05;
    const MatX Rinv = c.R.inverse();
    VecX th = hs.theta_hat, ga = hs.gamma;
    for (int i = 0; i < 4; ++i) {
        const VecX h = H.col(i);
        th(i) += dt * (-c.lambda * hs.theta_hat(i) - hs.gamma(i) * h.dot(Rinv * (H * hs.theta_hat - y)) +
                       hs.gamma(i) * s.dot(h));
        ga(i) += dt * (-2.0 * c.lambda * hs.gamma(i) + c.Q(i, i) + hs.gamma(i) * h.dot(Rinv * h) * hs.gamma(i));
    }
    REQUIRE(adapt_step_scalar(hs, c, s, y, H, dt));
    CHECK((hs.theta_hat - th).norm() <= 1e-14);
    CHECK((hs.gamma - ga).norm() <= 1e-14);
}

TEST_CASE("gain clamping and rejected updates") {
    AdaptConfig c = adapt_config(4);
    c.gamma_max = 0.21;
    AdaptState st = AdaptState::initial(c, VecX::Zero(4));
    REQUIRE(adapt_step_scalar(st, c, Vec2::Zero(), Vec2::Zero(), MatX::Ones(2, 4), 0.5));
    CHECK(st.gamma.maxCoeff() == doctest::Approx(0.21));
    CHECK(st.clamped_steps == 1);

    const AdaptState before = st;
    CHECK_FALSE(adapt_step_scalar(st, c, Vec2(std::nan(""), 0.0), Vec2::Zero(), MatX::Ones(2, 4), 0.05));
    CHECK(st.theta_hat == before.theta_hat);
    CHECK(st.gamma == before.gamma);
    CHECK(st.rejected_steps == 1);
    CHECK_THROWS_AS((void)adapt_step_scalar(st, c, Vec2::Zero(), Vec2::Zero(), MatX::Ones(2, 3), 0.05),
                    DimensionError);
}

TEST_CASE("matrix law: pure growth and the 1-D sign difference") {
    AdaptConfig c = adapt_config(4);
    c.law = AdaptLaw::Matrix;
    c.lambda = 0.0;
    AdaptState st = AdaptState::initial(c, VecX::Zero(4));
    const MatX G0 = st.Gamma;
    REQUIRE(adapt_step_matrix(st, c, Vec2::Zero(), Vec2::Zero(), MatX::Zero(2, 4), 0.1));
    CHECK((st.Gamma - (G0 + 0.1 * c.Q)).norm() <= 1e-15);

    // One parameter: both laws move theta identically; gains differ by
    // 2 dt gamma^2 h^T R^-1 h from the opposite quadratic signs.
    AdaptConfig c1 = adapt_config(1);
    std::mt19937_64 rng(5);
    const MatX h = test::randn(rng, 2, 1);
    const VecX s = test::randn(rng, 2, 1), y = test::randn(rng, 2, 1);
    AdaptState a = AdaptState::initial(c1, VecX::Constant(1, 0.4));
    AdaptState b = a;
    const double dt = 0.05, g = a.gamma(0);
    REQUIRE(adapt_step_scalar(a, c1, s, y, h, dt));
    REQUIRE(adapt_step_matrix(b, c1, s, y, h, dt));
    CHECK(a.theta_hat(0) == doctest::Approx(b.theta_hat(0)).epsilon(1e-14));
    const double quad = (h.transpose() * c1.R.inverse() * h)(0, 0);
    CHECK(a.gamma(0) - b.Gamma(0, 0) == doctest::Approx(2.0 * dt * g * g * quad).epsilon(1e-12));
}

TEST_CASE("matrix gain stays symmetric positive definite") {
    AdaptConfig c = adapt_config(4);
    c.law = AdaptLaw::Matrix;
    c.gamma0 = 5.0;
    c.Q = MatX::Identity(4, 4) * 1e-3;
    AdaptState st = AdaptState::initial(c, VecX::Zero(4));
    std::mt19937_64 rng(6);
    for (int k = 0; k < 2000; ++k) {
        const MatX H = 3.0 * test::randn(rng, 2, 4);
        REQUIRE(adapt_step(st, c, test::randn(rng, 2, 1), test::randn(rng, 2, 1), H, 0.05));
        REQUIRE((st.Gamma - st.Gamma.transpose()).norm() == 0.0);
        REQUIRE(Eigen::SelfAdjointEigenSolver<MatX>(st.Gamma).eigenvalues().minCoeff() >= c.gamma_min * (1 - 1e-9));
    }
}

TEST_CASE("lyapunov value") {
    AdaptConfig c = adapt_config(4);
    AdaptState st = AdaptState::initial(c, VecX::Ones(4));
    st.gamma << 0.1, 0.2, 0.4, 0.5;
    const VecX truth = VecX::LinSpaced(4, 0.0, 1.5);
    const Vec2 s(0.3, -0.4);
    double expect = s.squaredNorm();
    for (int i = 0; i < 4; ++i) expect += std::pow(1.0 - truth(i), 2) / st.gamma(i);
    CHECK(lyapunov_value(s, st, AdaptLaw::Scalar, truth) == doctest::Approx(expect));
    st.Gamma = st.gamma.asDiagonal();
    CHECK(lyapunov_value(s, st, AdaptLaw::Matrix, truth) == doctest::Approx(expect));
    CHECK(parse_adapt_law("matrix") == AdaptLaw::Matrix);
    CHECK_THROWS_AS((void)parse_adapt_law("kalman"), ConfigError);
}

TEST_CASE("lateral errors") {
    vehicle::AckermannState st;
    st.v_x = 1.5;
    const PathFrame frame;
    const LateralErrorState z = lateral_errors(st, frame, 1.0);
    CHECK(z.e_parallel == 0.0);
    CHECK(z.e_perp == 0.0);
    CHECK(z.psi_e == 0.0);
    CHECK(z.s_perp == 0.0);

    st.p_y = 0.5;
    const LateralErrorState off = lateral_errors(st, frame, 1.0);
    CHECK(off.e_perp == doctest::Approx(0.5));
    CHECK(off.e_parallel == 0.0);
    CHECK(off.s_perp == doctest::Approx(0.5));

    // Rotated frame against an explicit rotation matrix.
    const double a = 2.2;
    PathFrame rot{{1.0, -2.0}, {std::cos(a), std::sin(a)}, 0.3};
    st = {3.0, 0.5, 2.0, 1.2, 0.1, 0.2};
    Mat2 R;
    R << std::cos(a), std::sin(a), -std::sin(a), std::cos(a);
    const Vec2 e = R * (st.position() - rot.origin);
    const LateralErrorState r = lateral_errors(st, rot, 0.7);
    CHECK(r.e_parallel == doctest::Approx(e(0)));
    CHECK(r.e_perp == doctest::Approx(e(1)));
    CHECK(r.psi_e == doctest::Approx(2.0 - a));
    CHECK(r.e_perp_dot == doctest::Approx(0.1 + 1.2 * (2.0 - a)));
    CHECK(r.s_perp == doctest::Approx(r.e_perp_dot + 0.7 * e(1)));

    CHECK_THROWS_AS((void)lateral_errors(st, PathFrame{{0, 0}, {0, 0}, 0}, 1.0), DomainError);
    st.v_x = 0.05;
    CHECK_THROWS_AS((void)lateral_errors(st, frame, 1.0), DomainError);
}

TEST_CASE("ackermann steering law") {
    const vehicle::AckermannParams p;
    const LateralGains g;
    const basis::BasisOutput phi = basis::ConstantBasis(2, 1).evaluate(VecX::Zero(3), VecX::Zero(8));
    vehicle::AckermannState st;
    st.v_x = 1.5;
    const SteeringCommand zero = control_ackermann(LateralErrorState{}, st, 0.0, 0.0, phi, VecX::Zero(2), p, g);
    CHECK(zero.u_delta == 0.0);

    st.v_y = 0.05;
    LateralErrorState err{0.0, 0.1, 0.02, 0.0, 0.0};
    err.e_perp_dot = st.v_y + st.v_x * err.psi_e;
    err.s_perp = err.e_perp_dot + g.k_p * err.e_perp;
    const double nu = g.k_v * err.s_perp - 2.0 * p.C_y / (p.m * st.v_x) * st.v_y + 0.1 * err.psi_e - st.v_x * 0.2 +
                      g.k_p * err.e_perp_dot;
    const SteeringCommand nom = control_ackermann(err, st, 0.1, 0.2, phi, VecX::Zero(2), p, g);
    CHECK(nom.u_delta == doctest::Approx(-nu / (p.C_y / p.m)));
    CHECK(nom.b_hat == doctest::Approx(p.C_y / p.m));

    const SteeringCommand ad = control_ackermann(err, st, 0.1, 0.2, phi, Vec2(-2.0, 5.0), p, g);
    CHECK(ad.b_hat == doctest::Approx(p.C_y / p.m - 2.0));
    CHECK(ad.u_delta == doctest::Approx(-nu / (p.C_y / p.m - 2.0)));

    const SteeringCommand fb = control_ackermann(err, st, 0.1, 0.2, phi, Vec2(-5.8, 0.0), p, g);
    CHECK(fb.fallback);
    CHECK(fb.u_delta == doctest::Approx(nom.u_delta));

    err.s_perp = 50.0;
    const SteeringCommand cl = control_ackermann(err, st, 0.0, 0.0, phi, VecX::Zero(2), p, g);
    CHECK(cl.clamped);
    CHECK(cl.u_delta == doctest::Approx(-g.delta_max));
}
