#include "chenhopf/averaging.hpp"

#include <sstream>
#include <string_view>

namespace chenhopf {

namespace {

void require_d_nonzero(const RegimeConfig& cfg) {
    if (cfg.d() == 0.0) throw RegimeError("degenerate regime: d = 0");
}

void require_elliptic(const RegimeConfig& cfg) {
    if (flow_branch(cfg) != FlowBranch::elliptic) {
        std::ostringstream os;
        os << "elliptic case required: a(a+d) = " << cfg.a() * (cfg.a() + cfg.d());
        throw RegimeError(os.str());
    }
}

}  // namespace

bool is_simple_zero(double det, const Mat4& jacobian) noexcept {
    const double scale = std::max(1.0, std::pow(norm_inf(jacobian), 4));
    return std::abs(det) > kSimplicityThreshold * scale;
}

BifurcationValue bifurcation_f_closed(const RegimeConfig& cfg, const State4& u) {
    require_elliptic(cfg);
    const double a = cfg.a();
    const double b = cfg.b();
    const double d = cfg.d();
    const double r = cfg.r();
    const double s = a + d;
    const double s2 = s * s;
    const auto [x0, y0, z0, w0] = u;

    const double f1 = r * w0 / s + d * z0 * (s * x0 - 3.0 * w0) / (2.0 * a * s2) - (a * (y0 - x0) + w0) * z0 / (2.0 * s);

    const double f2 = d * (3.0 * d * w0 + a * s * y0) * z0 / (2.0 * a * a * s2) - d * r * w0 / (a * s) -
                      (d * x0 + a * y0) * z0 / (2.0 * s);

    // The b z0 terms sum to -b z0, the mean of the -b z part of F1.
    const double f3 = d * d * (x0 * x0 - 2.0 * b * z0) / (2.0 * s2) +
                      a * (-2.0 * a * b * z0 - y0 * (2.0 * w0 + a * (y0 - 2.0 * x0))) / (2.0 * s2) -
                      (3.0 * w0 * w0 + 2.0 * a * w0 * y0) * d / (2.0 * a * s2) +
                      a * d * (x0 * x0 + 2.0 * x0 * y0 - y0 * y0 - 4.0 * b * z0) / (2.0 * s2);

    const double f4 = w0 * (r - d * z0 / (a * s));

    return {f1, f2, f3, f4};
}

BifurcationValue bifurcation_f_quadrature(const RegimeConfig& cfg, const State4& u, std::size_t nodes) {
    if (nodes < 8) throw PreconditionError("bifurcation_f_quadrature: need at least 8 nodes");
    const LinearSpectralData spec = period(cfg);
    const auto integrand = [&](double t) {
        const State4 xt = flow(cfg, u, t);
        const State4 f1 = split_F0_F1(cfg, xt).f1;
        return fundamental_matrix_inverse(cfg, t) * f1.vec();
    };
    return BifurcationValue::from(periodic_trapezoid_integrate(integrand, spec.period, nodes));
}

Mat4 averaged_jacobian_fd(const RegimeConfig& cfg, const State4& u) {
    const auto f = [&](const Vec4& v) { return bifurcation_f_closed(cfg, State4::from(v)).vec(); };
    return finite_difference_jacobian<4>(f, u.vec());
}

double jacobian_det_closed(const RegimeConfig& cfg) {
    require_d_nonzero(cfg);
    const double a = cfg.a();
    const double b = cfg.b();
    const double d = cfg.d();
    const double r = cfg.r();
    const double a3 = a * a * a;
    return -b * (a3 * a + a3 * d - d * d) * r * r * r / (2.0 * d * d);
}

QuarticSpectrum averaged_spectrum_closed(const RegimeConfig& cfg) {
    require_d_nonzero(cfg);
    require_elliptic(cfg);
    const double b = cfg.b();
    const double r = cfg.r();
    const double om = omega(cfg.params());
    const Complex root = std::sqrt(Complex{b * (b - 8.0 * r), 0.0});
    const Complex slow_plus = 0.5 * (Complex{-b, 0.0} + root);
    const Complex slow_minus = 0.5 * (Complex{-b, 0.0} - root);
    const double rotation = cfg.a() * om / cfg.d();
    const Complex fast_plus = 0.5 * r * Complex{1.0, rotation};
    return make_spectrum({slow_plus, slow_minus, fast_plus, std::conj(fast_plus)});
}

namespace {

AveragedZero populate_closed(const RegimeConfig& cfg, const State4& p, double det, const QuarticSpectrum& spectrum) {
    AveragedZero z;
    z.point = p;
    z.residual = norm_inf(bifurcation_f_closed(cfg, p).vec());
    z.det_jacobian = det;
    z.spectrum = spectrum;
    z.simple = is_simple_zero(det, averaged_jacobian_fd(cfg, p));
    z.all_negative_real_parts =
        std::all_of(spectrum.values.begin(), spectrum.values.end(), [](const Complex& l) { return l.real() < 0.0; });
    return z;
}

}  // namespace

std::pair<AveragedZero, AveragedZero> averaged_zeros_closed(const RegimeConfig& cfg) {
    require_d_nonzero(cfg);
    require_elliptic(cfg);
    const double a = cfg.a();
    const double d = cfg.d();
    const double r = cfg.r();
    const double s = a + d;
    const double product = cfg.b() * s * r;
    if (!(product < 0.0)) {
        std::ostringstream os;
        os << "zeros not real: b(a+d)r = " << product << " must be negative";
        throw HypothesisError(os.str());
    }
    const double root = std::sqrt(-product);
    const State4 p1{a * root / d, -root, a * s * r / d, a * root * s / d};
    const State4 p2{-p1.x, -p1.y, p1.z, -p1.w};

    const double det = jacobian_det_closed(cfg);
    const QuarticSpectrum spectrum = averaged_spectrum_closed(cfg);
    return {populate_closed(cfg, p1, det, spectrum), populate_closed(cfg, p2, det, spectrum)};
}

AveragedZero averaged_zeros_newton(const RegimeConfig& cfg, const State4& seed, bool use_quadrature, double tol) {
    require_elliptic(cfg);
    const auto f = [&](const Vec4& v) {
        const State4 u = State4::from(v);
        return (use_quadrature ? bifurcation_f_quadrature(cfg, u) : bifurcation_f_closed(cfg, u)).vec();
    };
    NewtonOptions opts;
    opts.tol = tol;
    opts.max_iter = 50;
    NewtonReport<4> rep;
    try {
        rep = newton_solve<4>(f, {}, seed.vec(), opts);
    } catch (const SingularMatrixError&) {
        // reported as a stalled run from the seed
        rep.root = seed.vec();
        rep.residual = norm_inf(f(seed.vec()));
        rep.converged = false;
    }

    AveragedZero z;
    z.point = State4::from(rep.root);
    z.residual = rep.residual;
    z.converged = rep.converged;
    z.iterations = rep.iterations;

    const Mat4 jac = finite_difference_jacobian<4>(f, rep.root);
    z.det_jacobian = determinant(jac);
    z.simple = is_simple_zero(z.det_jacobian, jac);
    try {
        z.spectrum = eig4(jac);
        z.all_negative_real_parts = std::all_of(z.spectrum.values.begin(), z.spectrum.values.end(),
                                                [](const Complex& l) { return l.real() < 0.0; });
    } catch (const ConvergenceError&) {
        z.all_negative_real_parts = false;
    }
    return z;
}

StabilityVerdict stability_verdict(const RegimeConfig& cfg) {
    const QuarticSpectrum spectrum = averaged_spectrum_closed(cfg);
    StabilityVerdict v;
    std::ostringstream os;
    os.precision(6);
    const char* sep = "";
    for (std::size_t i = 0; i < 4; ++i) {
        if (spectrum[i].real() >= 0.0) {
            os << sep << "eigenvalue " << i + 1 << " = " << spectrum[i].real();
            if (spectrum[i].imag() != 0.0) os << (spectrum[i].imag() > 0 ? " + " : " - ") << std::abs(spectrum[i].imag()) << "i";
            os << " has non-negative real part";
            sep = "; ";
        }
    }
    v.theorem_applicable = std::string_view(sep).empty();
    v.note = v.theorem_applicable ? "all eigenvalues of Df(p) have negative real part" : os.str();
    return v;
}

}  // namespace chenhopf
