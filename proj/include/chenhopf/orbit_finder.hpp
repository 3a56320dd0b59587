#pragma once

// Periodic orbits of the rescaled system x' = F0(x) + eps F1(x) by Newton
// shooting on (u, T) with a hyperplane phase condition, Floquet multipliers,
// eps-continuation towards the averaged zeros, and the map back to the
// unscaled model.

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "chenhopf/averaging.hpp"
#include "chenhopf/integrator.hpp"

namespace chenhopf {

enum class Frame { scaled, original };

struct PeriodicOrbit {
    double epsilon = 0.0;
    State4 initial_state;
    double period = 0.0;
    double residual = 0.0;  // ||phi_T(u) - u||_inf
    QuarticSpectrum multipliers;
    Frame frame = Frame::scaled;
    int branch = 1;
};

/// Acceptance gate on ||phi_T(u) - u||_inf.
inline constexpr double kOrbitResidualGate = 1e-9;
/// Required distance of some multiplier from 1.
inline constexpr double kTrivialMultiplierTol = 1e-5;
inline constexpr double kBranchDistinctness = 1e-6;

struct ShootOptions {
    IntegratorConfig integrator = [] {
        IntegratorConfig c;
        c.max_steps = 200'000;
        return c;
    }();
    double newton_tol = 1e-11;
    int max_iter = 25;
    /// Trial periods outside (0, factor * seed_period] count as failed steps.
    double max_period_factor = 4.0;
};

enum class ShootStatus {
    accepted,
    not_converged,     // Newton stalled or ran out of iterations
    no_trivial_multiplier,  // closed up, but no Floquet multiplier near 1 (e.g. an equilibrium)
};

[[nodiscard]] const char* to_string(ShootStatus s) noexcept;
[[nodiscard]] const char* to_string(Frame f) noexcept;

struct ShootReport {
    ShootStatus status = ShootStatus::not_converged;
    std::optional<PeriodicOrbit> orbit;  // set iff accepted
    // Best iterate, whether accepted or not.
    State4 state;
    double period = 0.0;
    double residual = 0.0;        // ||phi_T(u) - u||_inf at the best iterate
    double phase_residual = 0.0;  // phase-condition value at the best iterate
    double field_norm = 0.0;      // ||F(u)||_inf, small when the iterate sits on an equilibrium
    int iterations = 0;
    std::string message;

    [[nodiscard]] bool accepted() const noexcept { return status == ShootStatus::accepted; }
};

/// Newton shooting on phi_T(u) - u = 0, <u - seed, F(seed)> = 0. Integration
/// blow-up starting from the seed propagates as IntegrationError.
[[nodiscard]] ShootReport shoot(const RegimeConfig& cfg, const State4& seed_state, double seed_period,
                                const ShootOptions& opts = {});

/// ||phi_{periods T}(u) - u||_inf under the field matching the orbit's frame.
[[nodiscard]] double recurrence_error(const RegimeConfig& cfg, const PeriodicOrbit& orbit, int periods = 1,
                                      const IntegratorConfig& integ = {});

/// Thrown by find_bifurcating_orbits when a branch cannot be certified.
class ShootFailure : public Error {
public:
    ShootFailure(int branch, ShootReport report, const std::string& what)
        : Error(what), branch_(branch), report_(std::move(report)) {}
    [[nodiscard]] int branch() const noexcept { return branch_; }
    [[nodiscard]] const ShootReport& report() const noexcept { return report_; }

private:
    int branch_;
    ShootReport report_;
};

/// Shoots from the averaged zeros p1, p2 with period 2 pi / Omega. Throws
/// HypothesisError when the zero-Hopf hypotheses fail, ShootFailure when a
/// branch is not certified, Error when both branches land on the same orbit.
[[nodiscard]] std::pair<PeriodicOrbit, PeriodicOrbit> find_bifurcating_orbits(const RegimeConfig& cfg,
                                                                             const ShootOptions& opts = {});

struct SweepRow {
    double epsilon = 0.0;
    int branch = 1;
    bool converged = false;
    // NaN when !converged
    double distance_to_p = 0.0;
    double period_error = 0.0;
    double residual = 0.0;
    double max_multiplier_modulus = 0.0;
    std::string message;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    std::array<std::optional<double>, 2> slopes;  // log(distance_to_p) vs log(eps), per branch
};

/// Least-squares slope of log(y) against log(x); empty with fewer than 2 usable points.
[[nodiscard]] std::optional<double> log_log_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Processes epsilons in ascending order, seeding each branch from the previous
/// converged orbit (initially the averaged zero). Failures are recorded in-row.
[[nodiscard]] SweepResult continuation_sweep(const RegimeConfig& config_template, const std::vector<double>& epsilons,
                                             const ShootOptions& opts = {});

/// Multiplies the initial state by eps and tags the orbit as original-frame.
/// Throws FrameError if the orbit is already in the original frame.
[[nodiscard]] PeriodicOrbit unscale_orbit(const PeriodicOrbit& orbit);

/// Field matching a frame: F0 + eps F1 (scaled) or the unscaled model with (eps b, eps r).
[[nodiscard]] Field frame_field(const RegimeConfig& cfg, Frame frame);
[[nodiscard]] FieldJacobian frame_jacobian(const RegimeConfig& cfg, Frame frame);

}  // namespace chenhopf
