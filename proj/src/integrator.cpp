#include "chenhopf/integrator.hpp"

#include <sstream>

namespace chenhopf {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// b - b_hat
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200, e6 = 22.0 / 525,
                 e7 = -1.0 / 40;

// Continuous extension: y(t + th h) = y + h sum_i k_i (P_i1 th + P_i2 th^2 + P_i3 th^3 + P_i4 th^4)
constexpr double P[7][4] = {
    {1.0, -8048581381.0 / 2820520608, 8663915743.0 / 2820520608, -12715105075.0 / 11282082432},
    {0.0, 0.0, 0.0, 0.0},
    {0.0, 131558114200.0 / 32700410799, -68118460800.0 / 10900136933, 87487479700.0 / 32700410799},
    {0.0, -1754552775.0 / 470086768, 14199869525.0 / 1410260304, -10690763975.0 / 1880347072},
    {0.0, 127303824393.0 / 49829197408, -318862633887.0 / 49829197408, 701980252875.0 / 199316789632},
    {0.0, -282668133.0 / 205662961, 2019193451.0 / 616988883, -1453857185.0 / 822651844},
    {0.0, 40617522.0 / 29380423, -110615467.0 / 29380423, 69997945.0 / 29380423},
};

constexpr double kSafety = 0.9;
constexpr double kMinFactor = 0.2;
constexpr double kMaxFactor = 5.0;
constexpr double kBeta = 0.04;           // PI controller
constexpr double kAlpha = 0.2 - 0.75 * kBeta;

template <std::size_t N>
using Rhs = std::function<Vec<N>(const Vec<N>&)>;

template <std::size_t N>
State4 head(const Vec<N>& y) noexcept {
    return {y[0], y[1], y[2], y[3]};
}

template <std::size_t N>
void guard(const Vec<N>& y, double t, const Vec<N>& last_good, double t_good) {
    bool ok = true;
    for (std::size_t i = 0; i < 4; ++i)
        if (!std::isfinite(y[i]) || std::abs(y[i]) > kBlowUpNorm) ok = false;
    for (std::size_t i = 4; i < N && ok; ++i)
        if (!std::isfinite(y[i])) ok = false;
    if (!ok) {
        std::ostringstream os;
        os << "integration blow-up near t = " << t << " (last good t = " << t_good << ")";
        throw IntegrationError(IntegrationError::Kind::blow_up, t_good, head(last_good), os.str());
    }
}

template <std::size_t N>
void check_budget(std::size_t steps, std::size_t max_steps, double t, const Vec<N>& y) {
    if (steps >= max_steps) {
        std::ostringstream os;
        os << "integration exceeded " << max_steps << " steps at t = " << t;
        throw IntegrationError(IntegrationError::Kind::max_steps, t, head(y), os.str());
    }
}

/// Calls `emit(k, y)` for sample k at time k * t_end / (n - 1).
template <std::size_t N, typename Emit>
Vec<N> run_rk4(const Rhs<N>& f, Vec<N> y, double t_end, const IntegratorConfig& cfg, std::size_t n, Emit&& emit) {
    if (!(cfg.step > 0.0)) throw PreconditionError("integrate: fixed step must be positive");
    const std::size_t intervals = n - 1;
    const double chunk = t_end / static_cast<double>(intervals);
    const auto per_chunk = static_cast<std::size_t>(std::max(1.0, std::ceil(chunk / cfg.step - 1e-12)));
    if (per_chunk * intervals > cfg.max_steps)
        throw IntegrationError(IntegrationError::Kind::max_steps, 0.0, head(y), "integrate: fixed-step budget exceeded");
    const double h = chunk / static_cast<double>(per_chunk);

    emit(0, y);
    double t = 0.0;
    for (std::size_t k = 1; k <= intervals; ++k) {
        for (std::size_t s = 0; s < per_chunk; ++s) {
            const Vec<N> k1 = f(y);
            const Vec<N> k2 = f(y + (0.5 * h) * k1);
            const Vec<N> k3 = f(y + (0.5 * h) * k2);
            const Vec<N> k4 = f(y + h * k3);
            const Vec<N> next = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            guard(next, t + h, y, t);
            y = next;
            t += h;
        }
        emit(k, y);
    }
    return y;
}

template <std::size_t N>
double error_norm(const Vec<N>& err, const Vec<N>& y0, const Vec<N>& y1, const IntegratorConfig& cfg) {
    double e = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        const double sc = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(y0[i]), std::abs(y1[i]));
        e = std::max(e, std::abs(err[i]) / sc);
    }
    return e;
}

template <std::size_t N>
double initial_step(const Rhs<N>& f, const Vec<N>& y0, const Vec<N>& f0, double t_end, const IntegratorConfig& cfg) {
    // Hairer, Norsett & Wanner, starting step heuristic for order 5
    double d0 = 0.0, d1 = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        const double sc = cfg.abs_tol + cfg.rel_tol * std::abs(y0[i]);
        d0 = std::max(d0, std::abs(y0[i]) / sc);
        d1 = std::max(d1, std::abs(f0[i]) / sc);
    }
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, t_end);
    const Vec<N> y1 = y0 + h0 * f0;
    const Vec<N> f1 = f(y1);
    double d2 = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        const double sc = cfg.abs_tol + cfg.rel_tol * std::abs(y0[i]);
        d2 = std::max(d2, std::abs(f1[i] - f0[i]) / sc);
    }
    d2 /= h0;
    const double h1 = (std::max(d1, d2) <= 1e-15) ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / std::max(d1, d2), 0.2);
    return std::min({100.0 * h0, h1, t_end});
}

template <std::size_t N, typename Emit>
Vec<N> run_dopri(const Rhs<N>& f, Vec<N> y, double t_end, const IntegratorConfig& cfg, std::size_t n, Emit&& emit) {
    if (!(cfg.abs_tol > 0.0) || !(cfg.rel_tol > 0.0))
        throw PreconditionError("integrate: tolerances must be positive");

    const std::size_t intervals = n - 1;
    const auto sample_time = [&](std::size_t k) {
        return k == intervals ? t_end : t_end * static_cast<double>(k) / static_cast<double>(intervals);
    };

    emit(0, y);
    std::size_t next_sample = 1;

    Vec<N> k1 = f(y);
    double h = initial_step<N>(f, y, k1, t_end, cfg);
    double t = 0.0;
    double prev_err = 1e-4;
    std::size_t steps = 0;

    while (t < t_end) {
        check_budget(steps, cfg.max_steps, t, y);
        bool last = false;
        if (t + h >= t_end || t + 1.01 * h >= t_end) {
            h = t_end - t;
            last = true;
        }

        const Vec<N> k2 = f(y + (h * a21) * k1);
        const Vec<N> k3 = f(y + h * (a31 * k1 + a32 * k2));
        const Vec<N> k4 = f(y + h * (a41 * k1 + a42 * k2 + a43 * k3));
        const Vec<N> k5 = f(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        const Vec<N> k6 = f(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        const Vec<N> y_new = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        ++steps;

        bool finite = all_finite(y_new);
        Vec<N> k7{};
        double err = std::numeric_limits<double>::infinity();
        if (finite) {
            k7 = f(y_new);
            finite = all_finite(k7);
            if (finite) {
                const Vec<N> e = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
                err = error_norm(e, y, y_new, cfg);
            }
        }

        if (!(err <= 1.0)) {
            const double factor = std::isfinite(err) ? std::max(kMinFactor, kSafety * std::pow(err, -kAlpha)) : kMinFactor;
            h *= std::min(1.0, factor);
            if (h < 1e-14 * std::max(1.0, t_end)) {
                guard(y_new, t, y, t);
                std::ostringstream os;
                os << "integration step size underflow at t = " << t;
                throw IntegrationError(IntegrationError::Kind::blow_up, t, head(y), os.str());
            }
            continue;
        }

        guard(y_new, t + h, y, t);

        const double t_new = last ? t_end : t + h;
        while (next_sample <= intervals && sample_time(next_sample) <= t_new) {
            const double ts = sample_time(next_sample);
            if (next_sample == intervals && last) {
                emit(next_sample, y_new);
            } else {
                const double th = (ts - t) / h;
                const std::array<const Vec<N>*, 7> ks{&k1, nullptr, &k3, &k4, &k5, &k6, &k7};
                Vec<N> acc{};
                for (std::size_t i = 0; i < 7; ++i) {
                    if (i == 1) continue;
                    const double weight = th * (P[i][0] + th * (P[i][1] + th * (P[i][2] + th * P[i][3])));
                    acc = acc + weight * *ks[i];
                }
                emit(next_sample, y + h * acc);
            }
            ++next_sample;
        }

        y = y_new;
        k1 = k7;
        t = t_new;

        const double safe_err = std::max(err, 1e-10);
        double factor = kSafety * std::pow(safe_err, -kAlpha) * std::pow(prev_err, kBeta);
        factor = std::clamp(factor, kMinFactor, kMaxFactor);
        h *= factor;
        prev_err = safe_err;
    }
    return y;
}

template <std::size_t N, typename Emit>
Vec<N> run(const Rhs<N>& f, const Vec<N>& y0, double t_end, const IntegratorConfig& cfg, std::size_t n, Emit&& emit) {
    if (!(t_end > 0.0) || !std::isfinite(t_end)) throw PreconditionError("integrate: t_end must be positive");
    if (cfg.max_steps < 1) throw PreconditionError("integrate: max_steps must be at least 1");
    if (n < 2) throw PreconditionError("integrate: need at least 2 samples");
    if (!all_finite(y0)) throw PreconditionError("integrate: initial state must be finite");
    if (cfg.method == IntegrationMethod::fixed_rk4) return run_rk4<N>(f, y0, t_end, cfg, n, emit);
    return run_dopri<N>(f, y0, t_end, cfg, n, emit);
}

}  // namespace

Trajectory integrate(const Field& field, const State4& u0, double t_end, const IntegratorConfig& config,
                     std::size_t sample_count) {
    Trajectory traj;
    if (sample_count >= 2) {
        traj.t.resize(sample_count);
        traj.states.resize(sample_count);
    }
    const Rhs<4> rhs = [&](const Vec4& y) { return field(State4::from(y)).vec(); };
    run<4>(rhs, u0.vec(), t_end, config, sample_count, [&](std::size_t k, const Vec4& y) {
        traj.t[k] = k + 1 == sample_count ? t_end : t_end * static_cast<double>(k) / static_cast<double>(sample_count - 1);
        traj.states[k] = State4::from(y);
    });
    return traj;
}

State4 integrate_to(const Field& field, const State4& u0, double t_end, const IntegratorConfig& config) {
    const Rhs<4> rhs = [&](const Vec4& y) { return field(State4::from(y)).vec(); };
    return State4::from(run<4>(rhs, u0.vec(), t_end, config, 2, [](std::size_t, const Vec4&) {}));
}

VariationalResult integrate_with_variational(const Field& field, const FieldJacobian& field_jacobian,
                                             const State4& u0, double t_end, const IntegratorConfig& config) {
    const Rhs<20> rhs = [&](const Vec<20>& y) {
        const State4 s = head(y);
        const Vec4 fs = field(s).vec();
        const Mat4 j = field_jacobian(s);
        Vec<20> out{};
        for (std::size_t i = 0; i < 4; ++i) out[i] = fs[i];
        // Y stored row-major in y[4..19]; (J Y)_{ik} = sum_m J_im Y_mk
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t k = 0; k < 4; ++k) {
                double acc = 0.0;
                for (std::size_t m = 0; m < 4; ++m) acc += j(i, m) * y[4 + m * 4 + k];
                out[4 + i * 4 + k] = acc;
            }
        return out;
    };
    Vec<20> y0{};
    const Vec4 u = u0.vec();
    for (std::size_t i = 0; i < 4; ++i) {
        y0[i] = u[i];
        y0[4 + i * 4 + i] = 1.0;
    }
    const Vec<20> y = run<20>(rhs, y0, t_end, config, 2, [](std::size_t, const Vec<20>&) {});
    VariationalResult res;
    res.final_state = head(y);
    for (std::size_t k = 0; k < 16; ++k) res.monodromy.data[k] = y[4 + k];
    return res;
}

}  // namespace chenhopf
