#include "chenhopf/orbit_finder.hpp"

#include <future>
#include <sstream>

namespace chenhopf {

const char* to_string(ShootStatus s) noexcept {
    switch (s) {
        case ShootStatus::accepted: return "accepted";
        case ShootStatus::not_converged: return "not_converged";
        case ShootStatus::no_trivial_multiplier: return "no_trivial_multiplier";
    }
    return "unknown";
}

const char* to_string(Frame f) noexcept { return f == Frame::scaled ? "scaled" : "original"; }

Field frame_field(const RegimeConfig& cfg, Frame frame) {
    if (frame == Frame::scaled) return [cfg](const State4& s) { return vector_field_rescaled(cfg, s); };
    const ChenParams p = cfg.effective_params();
    return [p](const State4& s) { return vector_field_full(p, s); };
}

FieldJacobian frame_jacobian(const RegimeConfig& cfg, Frame frame) {
    if (frame == Frame::scaled) return [cfg](const State4& s) { return jacobian_rescaled(cfg, s); };
    const ChenParams p = cfg.effective_params();
    return [p](const State4& s) { return jacobian_full(p, s); };
}

namespace {

/// Integrates the augmented system once per distinct (u, T).
class ShootingMap {
public:
    ShootingMap(const RegimeConfig& cfg, const State4& anchor, const IntegratorConfig& integ, double max_period)
        : max_period_(max_period),
          field_(frame_field(cfg, Frame::scaled)),
          jac_(frame_jacobian(cfg, Frame::scaled)),
          anchor_(anchor.vec()),
          normal_(field_(anchor).vec()),
          integ_(integ) {}

    /// Throws IntegrationError on blow-up.
    void evaluate(const Vec5& v) {
        if (valid_ && v == last_) return;
        valid_ = false;
        const State4 u{v[0], v[1], v[2], v[3]};
        const VariationalResult res = integrate_with_variational(field_, jac_, u, v[4], integ_);
        last_ = v;
        final_ = res.final_state.vec();
        monodromy_ = res.monodromy;
        valid_ = true;
    }

    [[nodiscard]] Vec5 residual(const Vec5& v) {
        if (!(v[4] > 0.0) || !(v[4] <= max_period_)) return nan_vector();
        try {
            evaluate(v);
        } catch (const IntegrationError&) {
            return nan_vector();
        }
        Vec5 r{};
        Vec4 u{v[0], v[1], v[2], v[3]};
        for (std::size_t i = 0; i < 4; ++i) r[i] = final_[i] - u[i];
        r[4] = dot(u - anchor_, normal_);
        return r;
    }

    [[nodiscard]] Mat5 jacobian(const Vec5& v) {
        evaluate(v);
        const Vec4 f_end = field_(State4::from(final_)).vec();
        Mat5 j;
        for (std::size_t i = 0; i < 4; ++i) {
            for (std::size_t k = 0; k < 4; ++k) j(i, k) = monodromy_(i, k) - (i == k ? 1.0 : 0.0);
            j(i, 4) = f_end[i];
            j(4, i) = normal_[i];
        }
        return j;
    }

    [[nodiscard]] const Vec4& final_state() const noexcept { return final_; }
    [[nodiscard]] const Mat4& monodromy() const noexcept { return monodromy_; }
    [[nodiscard]] const Field& field() const noexcept { return field_; }

private:
    static Vec5 nan_vector() {
        Vec5 r;
        r.fill(std::numeric_limits<double>::quiet_NaN());
        return r;
    }

    double max_period_;
    Field field_;
    FieldJacobian jac_;
    Vec4 anchor_;
    Vec4 normal_;
    IntegratorConfig integ_;
    bool valid_ = false;
    Vec5 last_{};
    Vec4 final_{};
    Mat4 monodromy_;
};

double closest_to_one(const QuarticSpectrum& s) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& m : s.values) best = std::min(best, std::abs(m - Complex{1.0, 0.0}));
    return best;
}

}  // namespace

ShootReport shoot(const RegimeConfig& cfg, const State4& seed_state, double seed_period, const ShootOptions& opts) {
    if (!(seed_period > 0.0) || !std::isfinite(seed_period))
        throw PreconditionError("shoot: seed period must be positive");
    if (!seed_state.finite()) throw PreconditionError("shoot: seed state must be finite");
    (void)period(cfg);  // elliptic branch required

    if (!(opts.max_period_factor > 1.0)) throw PreconditionError("shoot: max_period_factor must exceed 1");
    ShootingMap map(cfg, seed_state, opts.integrator, opts.max_period_factor * seed_period);
    Vec5 seed{seed_state.x, seed_state.y, seed_state.z, seed_state.w, seed_period};
    map.evaluate(seed);  // blow-up from the seed itself propagates

    const std::function<Vec5(const Vec5&)> residual = [&](const Vec5& v) { return map.residual(v); };
    const std::function<Mat5(const Vec5&)> jacobian = [&](const Vec5& v) { return map.jacobian(v); };

    NewtonOptions nopts;
    nopts.tol = opts.newton_tol;
    nopts.max_iter = opts.max_iter;

    ShootReport report;
    NewtonReport<5> newton;
    try {
        newton = newton_solve<5>(residual, jacobian, seed, nopts);
    } catch (const SingularMatrixError& e) {
        newton.root = seed;
        newton.converged = false;
        newton.message = e.what();
    }

    const Vec5& best = newton.root;
    const Vec5 r = map.residual(best);
    report.state = {best[0], best[1], best[2], best[3]};
    report.period = best[4];
    report.residual = norm_inf(Vec4{r[0], r[1], r[2], r[3]});
    report.phase_residual = r[4];
    report.field_norm = norm_inf(map.field()(report.state).vec());
    report.iterations = newton.iterations;
    report.message = newton.message;

    if (!newton.converged || !(report.residual <= kOrbitResidualGate) || !(report.period > 0.0)) {
        report.status = ShootStatus::not_converged;
        std::ostringstream os;
        os.precision(6);
        os << newton.message << "; best residual " << report.residual << ", phase residual " << report.phase_residual
           << ", |F(u)| " << report.field_norm;
        report.message = os.str();
        return report;
    }

    PeriodicOrbit orbit;
    orbit.epsilon = cfg.epsilon();
    orbit.initial_state = report.state;
    orbit.period = report.period;
    orbit.residual = report.residual;
    orbit.multipliers = eig4(map.monodromy());
    orbit.frame = Frame::scaled;

    if (closest_to_one(orbit.multipliers) > kTrivialMultiplierTol) {
        report.status = ShootStatus::no_trivial_multiplier;
        std::ostringstream os;
        os.precision(6);
        os << "closed up but no Floquet multiplier within " << kTrivialMultiplierTol << " of 1 (closest "
           << closest_to_one(orbit.multipliers) << ", |F(u)| " << report.field_norm << ")";
        report.message = os.str();
        return report;
    }
    report.status = ShootStatus::accepted;
    report.orbit = orbit;
    return report;
}

double recurrence_error(const RegimeConfig& cfg, const PeriodicOrbit& orbit, int periods,
                        const IntegratorConfig& integ) {
    if (periods < 1) throw PreconditionError("recurrence_error: periods must be at least 1");
    const State4 end =
        integrate_to(frame_field(cfg, orbit.frame), orbit.initial_state, orbit.period * periods, integ);
    return norm_inf(end.vec() - orbit.initial_state.vec());
}

std::pair<PeriodicOrbit, PeriodicOrbit> find_bifurcating_orbits(const RegimeConfig& cfg, const ShootOptions& opts) {
    const ConditionReport cond = check_zero_hopf_conditions(cfg.params());
    if (!cond.overall) throw HypothesisError("zero-Hopf hypotheses violated: " + cond.failures());

    const auto [z1, z2] = averaged_zeros_closed(cfg);
    const double t0 = period(cfg).period;

    std::array<PeriodicOrbit, 2> orbits;
    const std::array<State4, 2> seeds{z1.point, z2.point};
    for (int branch = 1; branch <= 2; ++branch) {
        ShootReport rep = shoot(cfg, seeds[branch - 1], t0, opts);
        if (!rep.accepted()) {
            std::ostringstream os;
            os << "branch " << branch << " not certified (" << to_string(rep.status) << "): " << rep.message;
            throw ShootFailure(branch, std::move(rep), os.str());
        }
        orbits[branch - 1] = *rep.orbit;
        orbits[branch - 1].branch = branch;
    }
    if (norm_inf(orbits[0].initial_state.vec() - orbits[1].initial_state.vec()) <= kBranchDistinctness)
        throw Error("find_bifurcating_orbits: both branches converged to the same orbit");
    return {orbits[0], orbits[1]};
}

std::optional<double> log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < x.size() && i < y.size(); ++i)
        if (x[i] > 0.0 && y[i] > 0.0 && std::isfinite(x[i]) && std::isfinite(y[i]))
            pts.emplace_back(std::log(x[i]), std::log(y[i]));
    if (pts.size() < 2) return std::nullopt;
    double mx = 0.0, my = 0.0;
    for (const auto& [lx, ly] : pts) {
        mx += lx;
        my += ly;
    }
    mx /= static_cast<double>(pts.size());
    my /= static_cast<double>(pts.size());
    double sxy = 0.0, sxx = 0.0;
    for (const auto& [lx, ly] : pts) {
        sxy += (lx - mx) * (ly - my);
        sxx += (lx - mx) * (lx - mx);
    }
    if (sxx == 0.0) return std::nullopt;
    return sxy / sxx;
}

namespace {

std::vector<SweepRow> sweep_branch(const RegimeConfig& tmpl, const std::vector<double>& epsilons, int branch,
                                   const State4& p, double t0, const ShootOptions& opts) {
    std::vector<SweepRow> rows;
    State4 seed = p;
    double seed_period = t0;
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    for (double eps : epsilons) {
        SweepRow row;
        row.epsilon = eps;
        row.branch = branch;
        row.distance_to_p = row.period_error = row.residual = row.max_multiplier_modulus = nan;
        try {
            const ShootReport rep = shoot(tmpl.with_epsilon(eps), seed, seed_period, opts);
            if (rep.accepted()) {
                const PeriodicOrbit& o = *rep.orbit;
                row.converged = true;
                row.distance_to_p = norm2(o.initial_state.vec() - p.vec());
                row.period_error = std::abs(o.period - t0);
                row.residual = o.residual;
                double m = 0.0;
                for (const auto& mu : o.multipliers.values) m = std::max(m, std::abs(mu));
                row.max_multiplier_modulus = m;
                seed = o.initial_state;
                seed_period = o.period;
            }
            row.message = rep.accepted() ? "accepted" : std::string(to_string(rep.status)) + ": " + rep.message;
        } catch (const Error& e) {
            row.message = e.what();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

SweepResult continuation_sweep(const RegimeConfig& config_template, const std::vector<double>& epsilons,
                               const ShootOptions& opts) {
    if (epsilons.empty()) throw PreconditionError("continuation_sweep: epsilon list is empty");
    for (std::size_t i = 0; i < epsilons.size(); ++i) {
        if (!(epsilons[i] > 0.0) || !std::isfinite(epsilons[i]))
            throw PreconditionError("continuation_sweep: epsilons must be positive");
        if (i > 0 && !(epsilons[i] > epsilons[i - 1]))
            throw PreconditionError("continuation_sweep: epsilons must be strictly ascending");
    }
    const ConditionReport cond = check_zero_hopf_conditions(config_template.params());
    if (!cond.overall) throw HypothesisError("zero-Hopf hypotheses violated: " + cond.failures());

    const auto [z1, z2] = averaged_zeros_closed(config_template);
    const double t0 = period(config_template).period;

    // branches share nothing, so they run side by side
    auto second = std::async(std::launch::async, sweep_branch, std::cref(config_template), std::cref(epsilons), 2,
                             z2.point, t0, std::cref(opts));
    std::vector<SweepRow> first = sweep_branch(config_template, epsilons, 1, z1.point, t0, opts);
    std::vector<SweepRow> other = second.get();

    SweepResult result;
    for (std::size_t i = 0; i < epsilons.size(); ++i) {
        result.rows.push_back(first[i]);
        result.rows.push_back(other[i]);
    }
    for (int branch = 1; branch <= 2; ++branch) {
        std::vector<double> xs, ys;
        for (const auto& row : result.rows)
            if (row.branch == branch && row.converged) {
                xs.push_back(row.epsilon);
                ys.push_back(row.distance_to_p);
            }
        result.slopes[branch - 1] = log_log_slope(xs, ys);
    }
    return result;
}

PeriodicOrbit unscale_orbit(const PeriodicOrbit& orbit) {
    if (orbit.frame == Frame::original) throw FrameError("unscale_orbit: orbit is already in the original frame");
    PeriodicOrbit out = orbit;
    out.initial_state = State4::from(orbit.epsilon * orbit.initial_state.vec());
    out.frame = Frame::original;
    return out;
}

}  // namespace chenhopf
