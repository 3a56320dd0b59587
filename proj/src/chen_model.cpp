#include "chenhopf/chen_model.hpp"

#include <sstream>

namespace chenhopf {

RegimeConfig::RegimeConfig(double a, double b, double d, double r, double epsilon)
    : params_{a, b, a, d, r}, epsilon_(epsilon) {
    if (!params_.finite() || !std::isfinite(epsilon))
        throw PreconditionError("RegimeConfig: parameters must be finite");
    if (epsilon < 0.0) throw PreconditionError("RegimeConfig: epsilon must be non-negative");
    if (d == 0.0) throw PreconditionError("RegimeConfig: d must be nonzero");
}

RegimeConfig RegimeConfig::from_params(const ChenParams& params, double epsilon) {
    if (params.c != params.a) throw PreconditionError("RegimeConfig: the regime requires c == a");
    return {params.a, params.b, params.d, params.r, epsilon};
}

std::string ConditionReport::failures() const {
    std::ostringstream os;
    const char* sep = "";
    if (!holds_c_equals_a) {
        os << sep << "c == a";
        sep = "; ";
    }
    if (!holds_negative) {
        os << sep << "a(a+d) < 0 (value " << value_a_times_a_plus_d << ")";
        sep = "; ";
    }
    if (!holds_b_ad_r_negative) {
        os << sep << "b(a+d)r < 0 (value " << value_b_ad_r << ")";
        sep = "; ";
    }
    if (!d_nonzero) os << sep << "d != 0";
    return os.str();
}

State4 vector_field_full(const ChenParams& p, const State4& s) noexcept {
    return {p.a * (s.y - s.x) + s.w, p.d * s.x + p.c * s.y - s.x * s.z, s.x * s.y - p.b * s.z,
            s.y * s.z + p.r * s.w};
}

Mat4 jacobian_full(const ChenParams& p, const State4& s) noexcept {
    return Mat4::from_rows({{
        {-p.a, p.a, 0.0, 1.0},
        {p.d - s.z, p.c, -s.x, 0.0},
        {s.y, s.x, -p.b, 0.0},
        {0.0, s.z, s.y, p.r},
    }});
}

QuarticCoefficients origin_char_poly(const ChenParams& p) noexcept {
    // (r - l)(b + l) = rb + (r - b) l - l^2
    const std::array<double, 3> lin{p.r * p.b, p.r - p.b, -1.0};
    // a(c + d - l) + (c - l) l = a(c + d) + (c - a) l - l^2
    const std::array<double, 3> quad{p.a * (p.c + p.d), p.c - p.a, -1.0};
    QuarticCoefficients out{};
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) out[i + j] += lin[i] * quad[j];
    return out;
}

QuarticSpectrum origin_eigenvalues(const ChenParams& p) {
    const double radicand = p.a * p.a + 2.0 * p.a * p.c + p.c * p.c + 4.0 * p.a * p.d;
    const Complex root = std::sqrt(Complex{radicand, 0.0});
    const Complex half_trace{0.5 * (p.c - p.a), 0.0};
    return make_spectrum({Complex{p.r, 0.0}, Complex{-p.b, 0.0}, half_trace + 0.5 * root, half_trace - 0.5 * root});
}

ConditionReport check_zero_hopf_conditions(const ChenParams& p) noexcept {
    ConditionReport rep;
    rep.holds_c_equals_a = p.c == p.a;
    rep.value_a_times_a_plus_d = p.a * (p.a + p.d);
    rep.holds_negative = rep.value_a_times_a_plus_d < 0.0;
    rep.value_b_ad_r = p.b * (p.a + p.d) * p.r;
    rep.holds_b_ad_r_negative = rep.value_b_ad_r < 0.0;
    rep.d_nonzero = p.d != 0.0;
    rep.overall = rep.holds_c_equals_a && rep.holds_negative && rep.holds_b_ad_r_negative && rep.d_nonzero;
    return rep;
}

State4 vector_field_scaled(const RegimeConfig& cfg, const State4& s) noexcept {
    return vector_field_full(cfg.effective_params(), s);
}

Mat4 jacobian_scaled(const RegimeConfig& cfg, const State4& s) noexcept {
    return jacobian_full(cfg.effective_params(), s);
}

SplitField split_F0_F1(const RegimeConfig& cfg, const State4& s) noexcept {
    const double a = cfg.a();
    const double d = cfg.d();
    return {
        {a * (s.y - s.x) + s.w, d * s.x + a * s.y, 0.0, 0.0},
        {0.0, -s.x * s.z, s.x * s.y - cfg.b() * s.z, s.y * s.z + cfg.r() * s.w},
    };
}

State4 vector_field_rescaled(const RegimeConfig& cfg, const State4& s) noexcept {
    const auto [f0, f1] = split_F0_F1(cfg, s);
    return State4::from(f0.vec() + cfg.epsilon() * f1.vec());
}

Mat4 jacobian_rescaled(const RegimeConfig& cfg, const State4& s) noexcept {
    const double a = cfg.a();
    const double e = cfg.epsilon();
    return Mat4::from_rows({{
        {-a, a, 0.0, 1.0},
        {cfg.d() - e * s.z, a, -e * s.x, 0.0},
        {e * s.y, e * s.x, -e * cfg.b(), 0.0},
        {0.0, e * s.z, e * s.y, e * cfg.r()},
    }});
}

double omega(const ChenParams& p) {
    const double prod = p.a * (p.a + p.d);
    if (!(prod < 0.0)) {
        std::ostringstream os;
        os << "elliptic case required: a(a+d) = " << prod << " is not negative";
        throw RegimeError(os.str());
    }
    return std::sqrt(-prod);
}

ChenParams draw_admissible_params(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> magnitude(0.5, 2.0);
    std::uniform_real_distribution<double> slow(0.5, 1.5);
    std::bernoulli_distribution coin(0.5);

    // one draw per statement keeps the sequence independent of evaluation order
    const bool a_positive = coin(rng);
    const double a = (a_positive ? 1.0 : -1.0) * magnitude(rng);
    const double a_plus_d = (a_positive ? -1.0 : 1.0) * magnitude(rng);
    const double b_sign = coin(rng) ? 1.0 : -1.0;
    const double b = b_sign * slow(rng);
    // sign(r) = -sign(b) sign(a + d)
    const double r = -b_sign * (a_plus_d > 0.0 ? 1.0 : -1.0) * slow(rng);
    return {a, b, a, a_plus_d - a, r};
}

}  // namespace chenhopf
