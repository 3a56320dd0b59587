#pragma once

// Closed-form flow of the unperturbed linear system
//
//   x' = a (y - x) + w,  y' = d x + a y,  z' = 0,  w' = 0
//
// For a (a + d) < 0 every solution is periodic with period 2 pi / Omega,
// Omega = sqrt(-a (a + d)).

#include "chenhopf/chen_model.hpp"

namespace chenhopf {

enum class FlowBranch { elliptic, hyperbolic };

struct LinearSpectralData {
    double omega = 0.0;   // rad / unit time
    double period = 0.0;  // 2 pi / omega
    QuarticSpectrum origin_spectrum;  // origin of the eps-scaled model (b, r -> eps b, eps r)
};

/// Throws RegimeError for a = 0, a + d = 0 (hence a (a + d) = 0).
[[nodiscard]] FlowBranch flow_branch(const RegimeConfig& cfg);

/// Trigonometric solution when a (a + d) < 0, hyperbolic one when a (a + d) > 0.
[[nodiscard]] State4 flow(const RegimeConfig& cfg, const State4& u, double t);

/// Phi(t) with Phi(0) = I, columns are flows of the basis states. Elliptic only.
[[nodiscard]] Mat4 fundamental_matrix(const RegimeConfig& cfg, double t);

/// Explicit inverse of Phi(t) written in terms of cos(Omega t), sin(Omega t). Elliptic only.
[[nodiscard]] Mat4 fundamental_matrix_inverse(const RegimeConfig& cfg, double t);

[[nodiscard]] LinearSpectralData period(const RegimeConfig& cfg);

}  // namespace chenhopf
