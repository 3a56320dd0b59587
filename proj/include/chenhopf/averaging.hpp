#pragma once

// First-order averaging for the rescaled Chen system x' = F0(x) + eps F1(x):
//
//   f(u) = (1/T) * integral_0^T Phi^{-1}(t) F1(x(t, u)) dt
//
// evaluated two independent ways (closed form and quadrature), its nontrivial
// zeros, the Jacobian determinant and spectrum there, and the stability verdict.

#include <optional>
#include <string>
#include <utility>

#include "chenhopf/chen_model.hpp"
#include "chenhopf/unperturbed_flow.hpp"

namespace chenhopf {

struct BifurcationValue {
    double f1 = 0.0;
    double f2 = 0.0;
    double f3 = 0.0;
    double f4 = 0.0;

    [[nodiscard]] Vec4 vec() const noexcept { return {f1, f2, f3, f4}; }
    [[nodiscard]] static BifurcationValue from(const Vec4& v) noexcept { return {v[0], v[1], v[2], v[3]}; }
};

struct AveragedZero {
    State4 point;
    double residual = 0.0;      // ||f(p)||_inf
    double det_jacobian = 0.0;  // det Df(p)
    QuarticSpectrum spectrum;   // eigenvalues of Df(p)
    bool simple = false;
    bool all_negative_real_parts = false;
    // Populated by the Newton path; the closed form sets converged = true, iterations = 0.
    bool converged = true;
    int iterations = 0;
};

struct StabilityVerdict {
    bool theorem_applicable = false;  // every eigenvalue of Df(p) has negative real part
    std::string note;
};

inline constexpr std::size_t kDefaultQuadratureNodes = 64;

/// Relative simplicity cutoff on |det Df| (scaled by max(1, ||Df||_inf^4)).
inline constexpr double kSimplicityThreshold = 1e-10;

[[nodiscard]] bool is_simple_zero(double det, const Mat4& jacobian) noexcept;

/// Closed-form averaged function. Throws RegimeError outside the elliptic branch.
[[nodiscard]] BifurcationValue bifurcation_f_closed(const RegimeConfig& cfg, const State4& u);

/// Averaged function by periodic-trapezoid quadrature of Phi^{-1} F1 along the
/// unperturbed flow. Needs nodes >= 8.
[[nodiscard]] BifurcationValue bifurcation_f_quadrature(const RegimeConfig& cfg, const State4& u,
                                                        std::size_t nodes = kDefaultQuadratureNodes);

/// p_{1,2} = (+-a s/d, -+s, a(a+d)r/d, +-a(a+d)s/d) with s = sqrt(-b(a+d)r).
/// Throws HypothesisError when b(a+d)r >= 0 (zeros not real).
[[nodiscard]] std::pair<AveragedZero, AveragedZero> averaged_zeros_closed(const RegimeConfig& cfg);

/// Newton refinement of a zero of f (closed form or quadrature) with a
/// finite-difference Jacobian. Non-convergence is reported through `converged`.
[[nodiscard]] AveragedZero averaged_zeros_newton(const RegimeConfig& cfg, const State4& seed, bool use_quadrature,
                                                 double tol = 1e-13);

/// -b (a^4 + a^3 d - d^2) r^3 / (2 d^2)
[[nodiscard]] double jacobian_det_closed(const RegimeConfig& cfg);

/// {(-b +- sqrt(b (b - 8 r))) / 2, (r/2)(1 +- i a Omega / d)}
[[nodiscard]] QuarticSpectrum averaged_spectrum_closed(const RegimeConfig& cfg);

[[nodiscard]] StabilityVerdict stability_verdict(const RegimeConfig& cfg);

/// Central-difference Jacobian of the closed-form f.
[[nodiscard]] Mat4 averaged_jacobian_fd(const RegimeConfig& cfg, const State4& u);

}  // namespace chenhopf
