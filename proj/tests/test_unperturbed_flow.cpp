#include <doctest.h>

#include <numbers>
#include <random>

#include "chenhopf/unperturbed_flow.hpp"

using namespace chenhopf;
using std::numbers::pi;

namespace {

RegimeConfig canonical(double eps = 0.0) { return RegimeConfig(-1, 1, 2, 1, eps); }

State4 random_state(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    return {u(rng), u(rng), u(rng), u(rng)};
}

RegimeConfig random_elliptic(std::mt19937_64& rng) {
    const ChenParams p = draw_admissible_params(rng);
    return RegimeConfig::from_params(p, 0.0);
}

RegimeConfig random_hyperbolic(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> mag(0.5, 2.0);
    std::bernoulli_distribution coin(0.5);
    const double sign = coin(rng) ? 1.0 : -1.0;
    const double a = sign * mag(rng);
    const double s = sign * mag(rng);  // a + d with the same sign as a
    return RegimeConfig(a, 1.0, s - a, 1.0, 0.0);
}

/// centred time derivative of the closed-form flow minus F0
double ode_residual(const RegimeConfig& cfg, const State4& u, double t) {
    const double h = 1e-5;
    const Vec4 dt = (1.0 / (2 * h)) * (flow(cfg, u, t + h).vec() - flow(cfg, u, t - h).vec());
    const Vec4 f0 = split_F0_F1(cfg, flow(cfg, u, t)).f0.vec();
    return norm_inf(dt - f0);
}

}  // namespace

TEST_CASE("branch classification") {
    CHECK(flow_branch(canonical()) == FlowBranch::elliptic);
    CHECK(flow_branch(RegimeConfig(1, 1, 1, 1, 0)) == FlowBranch::hyperbolic);
    CHECK(flow_branch(RegimeConfig(-1, 1, -1, 1, 0)) == FlowBranch::hyperbolic);
    CHECK_THROWS_AS((void)flow_branch(RegimeConfig(0, 1, 1, 1, 0)), RegimeError);
    CHECK_THROWS_AS((void)flow_branch(RegimeConfig(-1, 1, 1, 1, 0)), RegimeError);
}

TEST_CASE("flow: frozen values") {
    const RegimeConfig cfg = canonical();
    const State4 u{0.3, -0.2, 1.5, 0.7};
    CHECK(norm_inf(flow(cfg, u, 0.0).vec() - u.vec()) < 1e-15);
    // x = cos t + sin t, y = 2 sin t
    CHECK(norm_inf(flow(cfg, {1, 0, 0, 0}, pi / 2).vec() - Vec4{1, 2, 0, 0}) < 1e-14);
    CHECK(ode_residual(cfg, {1, 0, 0, 0}, 0.4) < 1e-9);
    CHECK(norm_inf(flow(cfg, u, 2 * pi).vec() - u.vec()) < 1e-10);
    CHECK_THROWS_AS((void)flow(RegimeConfig(-1, 1, 1, 1, 0), u, 1.0), RegimeError);
}

TEST_CASE("flow: z and w are constants of the unperturbed motion") {
    std::mt19937_64 rng(10);
    for (int i = 0; i < 20; ++i) {
        const RegimeConfig cfg = random_elliptic(rng);
        const State4 u = random_state(rng);
        const State4 v = flow(cfg, u, 3.3);
        CHECK(v.z == u.z);
        CHECK(v.w == u.w);
    }
}

TEST_CASE("flow: group, linearity, periodicity and ODE residual") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> time(-5.0, 5.0);
    std::uniform_real_distribution<double> coef(-2.0, 2.0);
    for (int i = 0; i < 50; ++i) {
        const RegimeConfig cfg = random_elliptic(rng);
        const State4 u = random_state(rng);
        const State4 v = random_state(rng);
        const double s = time(rng), t = time(rng);
        CHECK(norm_inf(flow(cfg, flow(cfg, u, s), t).vec() - flow(cfg, u, s + t).vec()) < 1e-10);

        const double alpha = coef(rng), beta = coef(rng);
        const Vec4 lhs = flow(cfg, State4::from(alpha * u.vec() + beta * v.vec()), t).vec();
        const Vec4 rhs = alpha * flow(cfg, u, t).vec() + beta * flow(cfg, v, t).vec();
        CHECK(norm_inf(lhs - rhs) < 1e-10);

        const double period_t = period(cfg).period;
        CHECK(norm_inf(flow(cfg, u, period_t).vec() - u.vec()) <= 1e-10 * (1 + norm_inf(u.vec())));

        CHECK(ode_residual(cfg, u, t) < 1e-6);
    }
}

TEST_CASE("hyperbolic branch solves the unperturbed system") {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> time(-1.5, 1.5);
    for (int i = 0; i < 50; ++i) {
        const RegimeConfig cfg = random_hyperbolic(rng);
        REQUIRE(flow_branch(cfg) == FlowBranch::hyperbolic);
        const State4 u = random_state(rng);
        const double t = time(rng);
        const double scale = 1.0 + norm_inf(flow(cfg, u, t).vec());
        CHECK(ode_residual(cfg, u, t) < 1e-6 * scale * scale);
        CHECK(norm_inf(flow(cfg, u, 0.0).vec() - u.vec()) < 1e-14);
        CHECK(norm_inf(flow(cfg, flow(cfg, u, 0.3), t).vec() - flow(cfg, u, t + 0.3).vec()) < 1e-9 * scale);
    }
}

TEST_CASE("fundamental matrix and its inverse: frozen values") {
    const RegimeConfig cfg = canonical();
    const double big_t = period(cfg).period;
    CHECK(max_abs_diff(fundamental_matrix(cfg, 0.0), Mat4::identity()) < 1e-15);
    CHECK(max_abs_diff(fundamental_matrix(cfg, big_t), Mat4::identity()) < 1e-12);
    CHECK(max_abs_diff(fundamental_matrix_inverse(cfg, 0.0), Mat4::identity()) < 1e-15);
    CHECK(max_abs_diff(fundamental_matrix_inverse(cfg, big_t), Mat4::identity()) < 1e-12);
    CHECK(max_abs_diff(fundamental_matrix(cfg, 0.7) * fundamental_matrix_inverse(cfg, 0.7), Mat4::identity()) < 1e-12);
    CHECK_THROWS_AS((void)fundamental_matrix(RegimeConfig(1, 1, 1, 1, 0), 0.1), RegimeError);
    CHECK_THROWS_AS((void)fundamental_matrix_inverse(RegimeConfig(1, 1, 1, 1, 0), 0.1), RegimeError);
}

TEST_CASE("fundamental matrix: flow agreement and explicit inverse") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> time(0.0, 10.0);
    for (int i = 0; i < 20; ++i) {
        const RegimeConfig cfg = random_elliptic(rng);
        const State4 u = random_state(rng);
        const double t = time(rng);
        const Mat4 phi = fundamental_matrix(cfg, t);
        CHECK(norm_inf(phi * u.vec() - flow(cfg, u, t).vec()) < 1e-12);
        const Mat4 explicit_inv = fundamental_matrix_inverse(cfg, t);
        CHECK(max_abs_diff(explicit_inv, inverse(phi)) < 1e-9);
        CHECK(max_abs_diff(phi * explicit_inv, Mat4::identity()) < 1e-9);
        // derivative of Phi is A Phi with A the linear part F0
        const double h = 1e-5;
        const Mat4 dphi = (1.0 / (2 * h)) * (fundamental_matrix(cfg, t + h) - fundamental_matrix(cfg, t - h));
        const Mat4 a_phi = jacobian_rescaled(cfg.with_epsilon(0.0), {}) * phi;
        CHECK(max_abs_diff(dphi, a_phi) < 1e-6);
    }
}

TEST_CASE("period data") {
    const LinearSpectralData c = period(canonical());
    CHECK(c.omega == 1.0);
    CHECK(c.period == doctest::Approx(2 * pi).epsilon(1e-15));
    const LinearSpectralData q = period(RegimeConfig(-2, 1, 4, 1, 0));
    CHECK(q.omega == 2.0);
    CHECK(q.period == doctest::Approx(pi).epsilon(1e-15));
    CHECK_THROWS_AS((void)period(RegimeConfig(1, 1, 1, 1, 0)), RegimeError);

    // origin spectrum of the eps-scaled model: {eps r, -eps b, +-i Omega}
    const LinearSpectralData e = period(canonical(0.1));
    CHECK(spectrum_distance(e.origin_spectrum,
                            make_spectrum({Complex{0.1, 0}, Complex{-0.1, 0}, Complex{0, 1}, Complex{0, -1}})) < 1e-12);
}
