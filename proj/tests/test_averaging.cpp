#include <doctest.h>

#include <random>

#include "chenhopf/averaging.hpp"

using namespace chenhopf;

namespace {

// b = 1: the nontrivial zeros are complex
RegimeConfig canonical() { return RegimeConfig(-1, 1, 2, 1, 0.0); }
// b = -1: real zeros at the canonical magnitudes
RegimeConfig mirrored() { return RegimeConfig(-1, -1, 2, 1, 0.0); }

State4 random_state(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    return {u(rng), u(rng), u(rng), u(rng)};
}

double vdist(const State4& a, const State4& b) { return norm_inf(a.vec() - b.vec()); }

}  // namespace

TEST_CASE("averaged function: frozen values") {
    CHECK(bifurcation_f_closed(canonical(), {}).vec() == Vec4{});
    CHECK(norm_inf(bifurcation_f_quadrature(canonical(), {}).vec()) < 1e-15);

    // only -b z survives the average in the third direction
    const Vec4 f = bifurcation_f_closed(canonical(), {0, 0, 1, 0}).vec();
    CHECK(norm_inf(f - Vec4{0, 0, -1, 0}) < 1e-15);
    CHECK(norm_inf(bifurcation_f_quadrature(canonical(), {0, 0, 1, 0}).vec() - f) < 1e-14);
    CHECK(norm_inf(bifurcation_f_closed(mirrored(), {0, 0, 1, 0}).vec() - Vec4{0, 0, 1, 0}) < 1e-15);

    // w direction: w0 (r - d z0 / (a (a + d)))
    const Vec4 g = bifurcation_f_closed(canonical(), {0, 0, 0.5, 2}).vec();
    CHECK(g[3] == doctest::Approx(2 * (1 + 2 * 0.5)));
}

TEST_CASE("averaged function: closed form matches quadrature") {
    std::mt19937_64 rng(21);
    std::vector<RegimeConfig> sets{canonical(), mirrored()};
    for (int i = 0; i < 10; ++i) sets.push_back(RegimeConfig::from_params(draw_admissible_params(rng), 0.0));
    for (const auto& cfg : sets) {
        double worst = 0.0;
        for (int k = 0; k < 200; ++k) {
            const State4 u = random_state(rng);
            const double diff =
                norm_inf(bifurcation_f_closed(cfg, u).vec() - bifurcation_f_quadrature(cfg, u).vec());
            worst = std::max(worst, diff / (1 + std::pow(norm_inf(u.vec()), 2)));
        }
        CHECK(worst <= 1e-10);
    }
}

TEST_CASE("quadrature: 8 nodes already exact") {
    std::mt19937_64 rng(22);
    for (int k = 0; k < 20; ++k) {
        const State4 u = random_state(rng);
        CHECK(norm_inf(bifurcation_f_quadrature(canonical(), u, 8).vec() -
                       bifurcation_f_quadrature(canonical(), u, 64).vec()) < 1e-11);
    }
    CHECK_THROWS_AS((void)bifurcation_f_quadrature(canonical(), {}, 7), PreconditionError);
    CHECK_THROWS_AS((void)bifurcation_f_quadrature(RegimeConfig(1, 1, 1, 1, 0), {}, 64), RegimeError);
    CHECK_THROWS_AS((void)bifurcation_f_closed(RegimeConfig(1, 1, 1, 1, 0), {}), RegimeError);
}

TEST_CASE("averaged zeros: frozen values") {
    const auto [p1, p2] = averaged_zeros_closed(mirrored());
    CHECK(vdist(p1.point, {-0.5, -1, -0.5, -0.5}) < 1e-15);
    CHECK(vdist(p2.point, {0.5, 1, -0.5, 0.5}) < 1e-15);
    CHECK(p2.point.x == -p1.point.x);
    CHECK(p2.point.y == -p1.point.y);
    CHECK(p2.point.z == p1.point.z);
    CHECK(p2.point.w == -p1.point.w);
    CHECK(p1.residual < 1e-12);
    CHECK(p1.det_jacobian == doctest::Approx(-0.625).epsilon(1e-14));
    CHECK(p1.simple);
    CHECK_FALSE(p1.all_negative_real_parts);

    CHECK_THROWS_WITH_AS((void)averaged_zeros_closed(canonical()), doctest::Contains("zeros not real"),
                         HypothesisError);
    CHECK_THROWS_AS((void)averaged_zeros_closed(RegimeConfig(1, -1, 1, 1, 0)), RegimeError);
}

TEST_CASE("averaged zeros: quadrature Newton confirms the closed form") {
    const auto [p1, p2] = averaged_zeros_closed(mirrored());
    for (const AveragedZero* z : {&p1, &p2}) {
        const State4 seed = State4::from(z->point.vec() + Vec4{0.1, 0.1, 0.1, 0.1});
        const AveragedZero closed_path = averaged_zeros_newton(mirrored(), seed, false);
        const AveragedZero quad_path = averaged_zeros_newton(mirrored(), seed, true);
        CHECK(closed_path.converged);
        CHECK(quad_path.converged);
        CHECK(closed_path.residual < 1e-12);
        CHECK(vdist(closed_path.point, z->point) < 1e-10);
        CHECK(vdist(quad_path.point, closed_path.point) < 1e-8);
        CHECK(closed_path.simple);
        CHECK(closed_path.det_jacobian == doctest::Approx(-0.625).epsilon(1e-5));
        CHECK(spectrum_distance(closed_path.spectrum, averaged_spectrum_closed(mirrored())) < 1e-5);
    }
}

TEST_CASE("averaged zeros: the origin is reported, not assumed") {
    const AveragedZero z = averaged_zeros_newton(mirrored(), {}, false);
    // f(0) = 0 already
    CHECK(z.converged);
    CHECK(z.iterations == 0);
    CHECK(z.point == State4{});
    // z and w directions are degenerate there (Df has a zero row block)
    CHECK(std::abs(z.det_jacobian) < 1e-10);
    CHECK_FALSE(z.simple);
}

TEST_CASE("no real zero near the canonical point p1") {
    // the b = 1 problem has only the trivial zero set; Newton from the mirrored p1 wanders off
    const AveragedZero z = averaged_zeros_newton(canonical(), {-0.5, -1, -0.5, -0.5}, false);
    if (z.converged) CHECK(vdist(z.point, {-0.5, -1, -0.5, -0.5}) > 0.1);
}

TEST_CASE("determinant: frozen values") {
    CHECK(jacobian_det_closed(mirrored()) == doctest::Approx(-0.625).epsilon(1e-15));
    CHECK(jacobian_det_closed(RegimeConfig(-1, 0, 2, 1, 0)) == 0.0);
    CHECK(jacobian_det_closed(RegimeConfig(-1, -2, 2, 1, 0)) == doctest::Approx(-1.25).epsilon(1e-15));
    // formula is odd in b
    CHECK(jacobian_det_closed(canonical()) == doctest::Approx(0.625).epsilon(1e-15));
}

TEST_CASE("spectrum: frozen values") {
    const QuarticSpectrum s = averaged_spectrum_closed(mirrored());
    const QuarticSpectrum want =
        make_spectrum({Complex{2, 0}, Complex{-1, 0}, Complex{0.5, 0.25}, Complex{0.5, -0.25}});
    CHECK(spectrum_distance(s, want) < 1e-14);
    CHECK(s.product().real() == doctest::Approx(jacobian_det_closed(mirrored())).epsilon(1e-12));
    CHECK(conjugation_closed(s));
}

TEST_CASE("determinant and spectrum agree with the finite-difference Jacobian") {
    std::mt19937_64 rng(23);
    std::vector<RegimeConfig> sets{mirrored()};
    for (int i = 0; i < 20; ++i) sets.push_back(RegimeConfig::from_params(draw_admissible_params(rng), 0.0));
    for (const auto& cfg : sets) {
        const auto [p1, p2] = averaged_zeros_closed(cfg);
        for (const AveragedZero* z : {&p1, &p2}) {
            const double scale = 1 + std::pow(norm_inf(z->point.vec()), 2);
            CHECK(z->residual <= 1e-11 * scale);
            const Mat4 j = averaged_jacobian_fd(cfg, z->point);
            const double det_closed = jacobian_det_closed(cfg);
            CHECK(std::abs(determinant(j) - det_closed) <= 1e-5 * std::abs(det_closed));
            CHECK(spectrum_distance(eig4(j), averaged_spectrum_closed(cfg)) <= 1e-5 * (1 + norm_inf(j)));
            CHECK(std::abs(det_closed) > 1e-10);
            CHECK(z->simple);
        }
        const QuarticSpectrum s = averaged_spectrum_closed(cfg);
        CHECK(std::abs(s.product().real() - jacobian_det_closed(cfg)) <= 1e-8 * std::abs(jacobian_det_closed(cfg)));
        CHECK(std::abs(s.product().imag()) < 1e-12);
        CHECK(conjugation_closed(s));
        const Complex fast = 0.5 * cfg.r() * Complex{1.0, cfg.a() * period(cfg).omega / cfg.d()};
        for (const Complex& target : {fast, std::conj(fast)}) {
            double best = 1e300;
            for (const auto& l : s.values) best = std::min(best, std::abs(l - target));
            CHECK(best < 1e-14);
        }
    }
}

TEST_CASE("determinant and spectrum agree with the Jacobian at the closed-form zeros (FD on quadrature)") {
    const RegimeConfig cfg = mirrored();
    const auto [p1, p2] = averaged_zeros_closed(cfg);
    const std::function<Vec4(const Vec4&)> fq = [&](const Vec4& v) {
        return bifurcation_f_quadrature(cfg, State4::from(v)).vec();
    };
    const Mat4 j = finite_difference_jacobian<4>(fq, p1.point.vec());
    CHECK(determinant(j) == doctest::Approx(-0.625).epsilon(1e-6));
    CHECK(spectrum_distance(eig4(j), averaged_spectrum_closed(cfg)) < 1e-6);
}

TEST_CASE("stability verdict") {
    const StabilityVerdict v = stability_verdict(mirrored());
    CHECK_FALSE(v.theorem_applicable);
    CHECK(v.note.find("eigenvalue 1 = 2") != std::string::npos);
    CHECK_FALSE(stability_verdict(canonical()).theorem_applicable);

    std::mt19937_64 rng(24);
    for (int i = 0; i < 20; ++i) {
        const RegimeConfig cfg = RegimeConfig::from_params(draw_admissible_params(rng), 0.0);
        const QuarticSpectrum s = averaged_spectrum_closed(cfg);
        // fast pair has real part r / 2
        int at_half_r = 0;
        for (const auto& l : s.values)
            if (std::abs(l.real() - cfg.r() / 2) < 1e-14 && l.imag() != 0.0) ++at_half_r;
        CHECK(at_half_r >= 2);
        CHECK_FALSE(stability_verdict(cfg).theorem_applicable);
    }
}

TEST_CASE("simplicity threshold") {
    CHECK(is_simple_zero(1.0, Mat4::identity()));
    CHECK_FALSE(is_simple_zero(1e-11, Mat4::identity()));
    CHECK_FALSE(is_simple_zero(1e-3, 100.0 * Mat4::identity()));
}
