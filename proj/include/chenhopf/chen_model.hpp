#pragma once

// Hyperchaotic Chen vector field
//
//   x' = a (y - x) + w
//   y' = d x + c y - x z
//   z' = x y - b z
//   w' = y z + r w
//
// in three forms: the general model, the regime c = a with (b, r) scaled by a
// small parameter eps, and the split F0 + eps F1 obtained after rescaling the
// state by eps.

#include <random>
#include <string>
#include <utility>

#include "chenhopf/numerics.hpp"

namespace chenhopf {

struct ChenParams {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    double d = 0.0;
    double r = 0.0;

    [[nodiscard]] bool finite() const noexcept {
        return std::isfinite(a) && std::isfinite(b) && std::isfinite(c) && std::isfinite(d) && std::isfinite(r);
    }
    friend bool operator==(const ChenParams&, const ChenParams&) = default;
};

struct State4 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
    double w = 0.0;

    [[nodiscard]] Vec4 vec() const noexcept { return {x, y, z, w}; }
    [[nodiscard]] static State4 from(const Vec4& v) noexcept { return {v[0], v[1], v[2], v[3]}; }
    [[nodiscard]] bool finite() const noexcept { return all_finite(vec()); }
    friend bool operator==(const State4&, const State4&) = default;
};

/// Parameters with c pinned to a, plus the small parameter eps >= 0.
class RegimeConfig {
public:
    /// Throws PreconditionError for non-finite input, eps < 0 or d == 0.
    RegimeConfig(double a, double b, double d, double r, double epsilon);

    /// Throws PreconditionError when params.c != params.a.
    static RegimeConfig from_params(const ChenParams& params, double epsilon);

    [[nodiscard]] const ChenParams& params() const noexcept { return params_; }
    [[nodiscard]] double epsilon() const noexcept { return epsilon_; }
    [[nodiscard]] double a() const noexcept { return params_.a; }
    [[nodiscard]] double b() const noexcept { return params_.b; }
    [[nodiscard]] double d() const noexcept { return params_.d; }
    [[nodiscard]] double r() const noexcept { return params_.r; }

    [[nodiscard]] RegimeConfig with_epsilon(double epsilon) const { return {a(), b(), d(), r(), epsilon}; }

    /// Coefficients of the unscaled model at this eps: (a, eps b, a, d, eps r).
    [[nodiscard]] ChenParams effective_params() const noexcept {
        return {params_.a, epsilon_ * params_.b, params_.a, params_.d, epsilon_ * params_.r};
    }

private:
    ChenParams params_;
    double epsilon_;
};

/// Which of the zero-Hopf hypotheses hold. Values are reported, never enforced.
/// The nontrivial averaged zeros need b (a + d) r < 0 in addition to a (a + d) < 0.
struct ConditionReport {
    bool holds_c_equals_a = false;
    double value_a_times_a_plus_d = 0.0;
    bool holds_negative = false;  // a (a + d) < 0
    double value_b_ad_r = 0.0;
    bool holds_b_ad_r_negative = false;
    bool d_nonzero = false;
    bool overall = false;

    /// Human-readable list of the failed hypotheses; empty when overall holds.
    [[nodiscard]] std::string failures() const;
};

[[nodiscard]] State4 vector_field_full(const ChenParams& p, const State4& s) noexcept;
[[nodiscard]] Mat4 jacobian_full(const ChenParams& p, const State4& s) noexcept;

/// Ascending coefficients of p(lambda) = (r - lambda)(b + lambda)(a (c + d - lambda) + (c - lambda) lambda),
/// which equals det(J0 - lambda I) at the origin.
[[nodiscard]] QuarticCoefficients origin_char_poly(const ChenParams& p) noexcept;

/// {r, -b, (-a + c +- sqrt(a^2 + 2ac + c^2 + 4ad)) / 2}, complex root when the radicand is negative.
[[nodiscard]] QuarticSpectrum origin_eigenvalues(const ChenParams& p);

[[nodiscard]] ConditionReport check_zero_hopf_conditions(const ChenParams& p) noexcept;

/// (a(y-x)+w, dx+ay-xz, xy-eps b z, yz+eps r w)
[[nodiscard]] State4 vector_field_scaled(const RegimeConfig& cfg, const State4& s) noexcept;
[[nodiscard]] Mat4 jacobian_scaled(const RegimeConfig& cfg, const State4& s) noexcept;

struct SplitField {
    State4 f0;  // (a(y-x)+w, dx+ay, 0, 0)
    State4 f1;  // (0, -xz, xy-bz, yz+rw)
};

/// Unperturbed part and perturbation of the rescaled system x' = F0(x) + eps F1(x).
[[nodiscard]] SplitField split_F0_F1(const RegimeConfig& cfg, const State4& s) noexcept;

/// Right-hand side F0 + eps F1 of the rescaled system.
[[nodiscard]] State4 vector_field_rescaled(const RegimeConfig& cfg, const State4& s) noexcept;
[[nodiscard]] Mat4 jacobian_rescaled(const RegimeConfig& cfg, const State4& s) noexcept;

/// sqrt(-a (a + d)); throws RegimeError unless a (a + d) < 0.
[[nodiscard]] double omega(const ChenParams& p);

/// Random parameters with c = a satisfying a(a+d) < 0 and b(a+d)r < 0, each
/// factor of both products at least 0.5 in magnitude.
[[nodiscard]] ChenParams draw_admissible_params(std::mt19937_64& rng);

}  // namespace chenhopf
