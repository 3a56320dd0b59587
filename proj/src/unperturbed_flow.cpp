#include "chenhopf/unperturbed_flow.hpp"

#include <numbers>
#include <sstream>

namespace chenhopf {

namespace {

void require_elliptic(const RegimeConfig& cfg, const char* what) {
    if (flow_branch(cfg) != FlowBranch::elliptic) {
        std::ostringstream os;
        os << what << ": elliptic case required, a(a+d) = " << cfg.a() * (cfg.a() + cfg.d());
        throw RegimeError(os.str());
    }
}

}  // namespace

FlowBranch flow_branch(const RegimeConfig& cfg) {
    const double a = cfg.a();
    const double sum = a + cfg.d();
    if (a == 0.0 || sum == 0.0) {
        std::ostringstream os;
        os << "degenerate regime: a = " << a << ", a + d = " << sum;
        throw RegimeError(os.str());
    }
    return a * sum < 0.0 ? FlowBranch::elliptic : FlowBranch::hyperbolic;
}

State4 flow(const RegimeConfig& cfg, const State4& u, double t) {
    const double a = cfg.a();
    const double d = cfg.d();
    const double sum = a + d;
    const double drive = u.w + a * (u.y - u.x);  // x'(0)
    const double ydot0 = d * u.x + a * u.y;      // y'(0)

    if (flow_branch(cfg) == FlowBranch::elliptic) {
        const double om = std::sqrt(-a * sum);
        const double c = std::cos(om * t);
        const double s = std::sin(om * t);
        const double x = (u.w + (sum * u.x - u.w) * c - (om / a) * drive * s) / sum;
        const double y = ((d * u.w + a * sum * u.y) * c - d * u.w - om * ydot0 * s) / (a * sum);
        return {x, y, u.z, u.w};
    }

    // k = sqrt(a (a + d)); the sinh coefficients (a+d)/k and k keep the real
    // solution valid when a and a + d are both negative.
    const double k = std::sqrt(a * sum);
    const double ch = std::cosh(k * t);
    const double sh = std::sinh(k * t);
    const double x = (u.w + (sum * u.x - u.w) * ch + (sum / k) * drive * sh) / sum;
    const double y = ((d * u.w + a * sum * u.y) * ch - d * u.w + k * ydot0 * sh) / (a * sum);
    return {x, y, u.z, u.w};
}

Mat4 fundamental_matrix(const RegimeConfig& cfg, double t) {
    require_elliptic(cfg, "fundamental_matrix");
    Mat4 phi;
    for (std::size_t j = 0; j < 4; ++j) {
        Vec4 e{};
        e[j] = 1.0;
        phi.set_column(j, flow(cfg, State4::from(e), t).vec());
    }
    return phi;
}

Mat4 fundamental_matrix_inverse(const RegimeConfig& cfg, double t) {
    require_elliptic(cfg, "fundamental_matrix_inverse");
    const double a = cfg.a();
    const double d = cfg.d();
    const double sum = a + d;
    const double om = std::sqrt(-a * sum);
    const double c = std::cos(om * t);
    const double s = std::sin(om * t);
    return Mat4::from_rows({{
        {c + (a / om) * s, -(a / om) * s, 0.0, (1.0 - c + (om / a) * s) / sum},
        {-(d / om) * s, c - (a / om) * s, 0.0, d / (a * sum) * (c - 1.0)},
        {0.0, 0.0, 1.0, 0.0},
        {0.0, 0.0, 0.0, 1.0},
    }});
}

LinearSpectralData period(const RegimeConfig& cfg) {
    require_elliptic(cfg, "period");
    LinearSpectralData data;
    data.omega = omega(cfg.params());
    data.period = 2.0 * std::numbers::pi / data.omega;
    data.origin_spectrum = origin_eigenvalues(cfg.effective_params());
    return data;
}

}  // namespace chenhopf
