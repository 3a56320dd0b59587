#pragma once

// Explicit Runge-Kutta integration of 4-dimensional autonomous fields, with
// optional first variational equations for monodromy matrices.

#include <cstddef>
#include <functional>
#include <vector>

#include "chenhopf/chen_model.hpp"

namespace chenhopf {

using Field = std::function<State4(const State4&)>;
using FieldJacobian = std::function<Mat4(const State4&)>;

enum class IntegrationMethod { fixed_rk4, adaptive_rk45 };

struct IntegratorConfig {
    IntegrationMethod method = IntegrationMethod::adaptive_rk45;
    double step = 1e-3;  // fixed_rk4 only
    double abs_tol = 1e-12;
    double rel_tol = 1e-10;
    std::size_t max_steps = 10'000'000;

    [[nodiscard]] static IntegratorConfig rk4(double step) {
        IntegratorConfig c;
        c.method = IntegrationMethod::fixed_rk4;
        c.step = step;
        return c;
    }
};

/// Blow-up threshold on ||state||_inf.
inline constexpr double kBlowUpNorm = 1e12;

/// Thrown on divergence (step budget) or blow-up; carries the last good point.
class IntegrationError : public Error {
public:
    enum class Kind { max_steps, blow_up };
    IntegrationError(Kind kind, double t, const State4& last, const std::string& what)
        : Error(what), kind_(kind), t_(t), last_(last) {}
    [[nodiscard]] Kind kind() const noexcept { return kind_; }
    [[nodiscard]] double time() const noexcept { return t_; }
    [[nodiscard]] const State4& last_state() const noexcept { return last_; }

private:
    Kind kind_;
    double t_;
    State4 last_;
};

struct Trajectory {
    std::vector<double> t;
    std::vector<State4> states;

    [[nodiscard]] std::size_t size() const noexcept { return t.size(); }
    [[nodiscard]] const State4& final_state() const { return states.back(); }
};

/// Samples t_k = k t_end / (n - 1), k = 0..n-1 (n = sample_count >= 2).
[[nodiscard]] Trajectory integrate(const Field& field, const State4& u0, double t_end, const IntegratorConfig& config,
                                   std::size_t sample_count = 2);

[[nodiscard]] State4 integrate_to(const Field& field, const State4& u0, double t_end, const IntegratorConfig& config);

struct VariationalResult {
    State4 final_state;
    Mat4 monodromy;  // d phi_{t_end} / d u0
};

/// Integrates the state together with Y' = J(x) Y, Y(0) = I (20 unknowns).
[[nodiscard]] VariationalResult integrate_with_variational(const Field& field, const FieldJacobian& field_jacobian,
                                                           const State4& u0, double t_end,
                                                           const IntegratorConfig& config);

}  // namespace chenhopf
