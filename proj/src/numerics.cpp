#include "chenhopf/numerics.hpp"

#include <numeric>

namespace chenhopf {

Vec4 periodic_trapezoid_integrate(const std::function<Vec4(double)>& integrand, double period, std::size_t nodes) {
    if (!(period > 0.0) || !std::isfinite(period))
        throw PreconditionError("periodic_trapezoid_integrate: period must be positive and finite");
    if (nodes < 4) throw PreconditionError("periodic_trapezoid_integrate: need at least 4 nodes");

    const double h = period / static_cast<double>(nodes);
    Vec4 sum{};
    for (std::size_t k = 0; k < nodes; ++k) {
        const double t = h * static_cast<double>(k);
        const Vec4 v = integrand(t);
        if (!all_finite(v)) {
            std::ostringstream os;
            os << "periodic_trapezoid_integrate: non-finite integrand at node " << k << " (t = " << t << ")";
            throw NonFiniteError(os.str());
        }
        sum = sum + v;
    }
    return (1.0 / static_cast<double>(nodes)) * sum;
}

// ---------------------------------------------------------------------------

namespace {

bool canonical_less(const Complex& a, const Complex& b) {
    if (a.real() != b.real()) return a.real() > b.real();
    return a.imag() > b.imag();
}

}  // namespace

QuarticSpectrum make_spectrum(std::array<Complex, 4> values) {
    std::sort(values.begin(), values.end(), canonical_less);
    return QuarticSpectrum{values};
}

double spectrum_distance(const QuarticSpectrum& a, const QuarticSpectrum& b) {
    std::array<std::size_t, 4> perm{0, 1, 2, 3};
    double best = std::numeric_limits<double>::infinity();
    do {
        double worst = 0.0;
        for (std::size_t i = 0; i < 4; ++i) worst = std::max(worst, std::abs(a[i] - b[perm[i]]));
        best = std::min(best, worst);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

bool conjugation_closed(const QuarticSpectrum& s, double tol) {
    for (std::size_t i = 0; i < 4; ++i) {
        if (std::abs(s[i].imag()) <= tol) continue;
        bool found = false;
        for (std::size_t j = 0; j < 4 && !found; ++j)
            if (j != i && std::abs(s[j] - std::conj(s[i])) <= tol) found = true;
        if (!found) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------

QuarticCoefficients characteristic_polynomial(const Mat4& m) {
    // M_k = A M_{k-1} + c_{n-k+1} I,  c_{n-k} = -tr(A M_k) / k
    QuarticCoefficients c{};
    c[4] = 1.0;
    Mat4 mk;  // M_0 = 0
    for (std::size_t k = 1; k <= 4; ++k) {
        Mat4 next = m * mk;
        for (std::size_t i = 0; i < 4; ++i) next(i, i) += c[4 - k + 1];
        mk = next;
        c[4 - k] = -trace(m * mk) / static_cast<double>(k);
    }
    return c;
}

Complex evaluate_polynomial(const QuarticCoefficients& c, Complex z) noexcept {
    Complex acc = c[4];
    for (std::size_t k = 4; k-- > 0;) acc = acc * z + c[k];
    return acc;
}

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

/// Coefficients of p^(j)(z) / j!.
QuarticCoefficients derivative_coefficients(const QuarticCoefficients& c, std::size_t j) {
    static constexpr double binom[5][5] = {
        {1, 0, 0, 0, 0}, {1, 1, 0, 0, 0}, {1, 2, 1, 0, 0}, {1, 3, 3, 1, 0}, {1, 4, 6, 4, 1}};
    QuarticCoefficients d{};
    for (std::size_t i = j; i <= 4; ++i) d[i - j] = binom[i][j] * c[i];
    return d;
}

/// Rounding-level bound for evaluating the polynomial at z.
double evaluation_noise(const QuarticCoefficients& c, Complex z) noexcept {
    const double r = std::abs(z);
    double acc = 0.0;
    double pw = 1.0;
    for (double ck : c) {
        acc += std::abs(ck) * pw;
        pw *= r;
    }
    return acc;
}

/// Replaces clusters of Durand-Kerner estimates by their mean when the mean is a
/// numerically multiple root (p and its first k-1 derivatives vanish to rounding).
/// Size of p^(j)(z)/j! attributable to relative-eps errors in coefficients
/// that were formed from a matrix whose eigenvalues have magnitude ~R.
double coefficient_noise(const QuarticCoefficients& c, std::size_t j, double r) noexcept {
    static constexpr double binom[5][5] = {
        {1, 0, 0, 0, 0}, {1, 1, 0, 0, 0}, {1, 2, 1, 0, 0}, {1, 3, 3, 1, 0}, {1, 4, 6, 4, 1}};
    double scale = 0.0;
    for (std::size_t k = 0; k < 4; ++k)
        scale = std::max(scale, std::pow(std::abs(c[k]), 1.0 / static_cast<double>(4 - k)));
    double acc = 0.0;
    for (std::size_t k = j; k <= 4; ++k)
        acc += binom[k][j] * std::pow(scale, static_cast<double>(4 - k)) * std::pow(r, static_cast<double>(k - j));
    return acc;
}

void merge_multiple_roots(const QuarticCoefficients& c, std::array<Complex, 4>& z) {
    std::array<std::size_t, 4> group{0, 1, 2, 3};
    auto find = [&](std::size_t i) {
        while (group[i] != i) i = group[i];
        return i;
    };
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = i + 1; j < 4; ++j) {
            const double radius = 1e-2 * (1.0 + std::max(std::abs(z[i]), std::abs(z[j])));
            if (std::abs(z[i] - z[j]) < radius) group[find(j)] = find(i);
        }

    for (std::size_t root = 0; root < 4; ++root) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < 4; ++i)
            if (find(i) == root) members.push_back(i);
        if (members.size() < 2) continue;

        Complex mean{0.0, 0.0};
        for (std::size_t i : members) mean += z[i];
        mean /= static_cast<double>(members.size());

        // the (k-1)-th derivative has a simple root at a k-fold root
        const QuarticCoefficients q = derivative_coefficients(c, members.size() - 1);
        const QuarticCoefficients dq = derivative_coefficients(c, members.size());
        Complex refined = mean;
        for (int it = 0; it < 8; ++it) {
            const Complex slope = evaluate_polynomial(dq, refined);
            if (slope == Complex{0.0, 0.0}) break;
            const Complex step = evaluate_polynomial(q, refined) / (static_cast<double>(members.size()) * slope);
            refined -= step;
            if (std::abs(step) <= 4.0 * kEps * (1.0 + std::abs(refined))) break;
        }
        const double radius = 1e-2 * (1.0 + std::abs(mean));
        if (!(std::abs(refined - mean) < radius)) continue;
        bool multiple = true;
        for (std::size_t j = 0; j + 1 < members.size() && multiple; ++j) {
            const QuarticCoefficients d = derivative_coefficients(c, j);
            if (std::abs(evaluate_polynomial(d, refined)) > 64.0 * kEps * coefficient_noise(c, j, std::abs(refined)))
                multiple = false;
        }
        if (multiple)
            for (std::size_t i : members) z[i] = refined;
    }
}

/// Pairs each value having a positive imaginary part with its closest conjugate
/// partner and makes the pair exactly conjugate; unpaired values become real.
void symmetrize_conjugates(std::array<Complex, 4>& z) {
    std::array<bool, 4> done{};
    std::array<std::size_t, 4> order{0, 1, 2, 3};
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::abs(z[a].imag()) > std::abs(z[b].imag());
    });
    for (std::size_t oi = 0; oi < 4; ++oi) {
        const std::size_t i = order[oi];
        if (done[i]) continue;
        const double tiny = 1e-14 * (1.0 + std::abs(z[i]));
        if (std::abs(z[i].imag()) <= tiny) {
            z[i] = Complex{z[i].real(), 0.0};
            done[i] = true;
            continue;
        }
        std::size_t partner = 4;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < 4; ++j) {
            if (j == i || done[j]) continue;
            const double dist = std::abs(z[j] - std::conj(z[i]));
            if (dist < best) {
                best = dist;
                partner = j;
            }
        }
        if (partner == 4 || best > 1e-6 * (1.0 + std::abs(z[i]))) {
            if (std::abs(z[i].imag()) <= 1e-8 * (1.0 + std::abs(z[i]))) z[i] = Complex{z[i].real(), 0.0};
            done[i] = true;
            continue;
        }
        const Complex avg = 0.5 * (z[i] + std::conj(z[partner]));
        const Complex upper{avg.real(), std::abs(avg.imag())};
        z[i] = upper;
        z[partner] = std::conj(upper);
        done[i] = done[partner] = true;
    }
}

}  // namespace

std::array<Complex, 4> quartic_roots(const QuarticCoefficients& c) {
    constexpr int kMaxSweeps = 500;
    constexpr double kTol = 1e-13;

    double radius = 0.0;
    for (std::size_t k = 0; k < 4; ++k) radius = std::max(radius, std::abs(c[k]));
    radius += 1.0;

    std::array<Complex, 4> z{};
    for (std::size_t k = 0; k < 4; ++k) z[k] = std::polar(radius, 0.4 + 2.0 * M_PI * static_cast<double>(k) / 4.0);

    bool converged = false;
    for (int sweep = 0; sweep < kMaxSweeps && !converged; ++sweep) {
        converged = true;
        for (std::size_t i = 0; i < 4; ++i) {
            const Complex pz = evaluate_polynomial(c, z[i]);
            if (std::abs(pz) <= 16.0 * kEps * evaluation_noise(c, z[i])) continue;
            Complex denom{1.0, 0.0};
            for (std::size_t j = 0; j < 4; ++j)
                if (j != i) denom *= (z[i] - z[j]);
            if (denom == Complex{0.0, 0.0}) denom = Complex{kEps, kEps};
            const Complex delta = pz / denom;
            z[i] -= delta;
            if (std::abs(delta) > kTol * (1.0 + std::abs(z[i]))) converged = false;
        }
    }
    if (!converged) {
        std::ostringstream os;
        os.precision(17);
        os << "Durand-Kerner did not converge in " << kMaxSweeps << " sweeps; estimates:";
        for (const auto& v : z) os << ' ' << v;
        throw ConvergenceError(os.str());
    }
    merge_multiple_roots(c, z);
    symmetrize_conjugates(z);
    return z;
}

QuarticSpectrum eig4(const Mat4& m) {
    if (!all_finite(m)) throw NonFiniteError("eig4: matrix has non-finite entries");
    const QuarticCoefficients c = characteristic_polynomial(m);
    std::array<Complex, 4> roots = quartic_roots(c);

    // rounding-level real or imaginary parts are zeroed so the ordering is stable
    double scale = 0.0;
    for (const auto& v : roots) scale = std::max(scale, std::abs(v));
    const double floor = 1e-14 * std::max(1.0, scale);
    for (auto& v : roots) {
        if (std::abs(v.real()) <= floor) v = Complex{0.0, v.imag()};
        if (std::abs(v.imag()) <= floor) v = Complex{v.real(), 0.0};
    }

    const double bound = 1e-8 * std::pow(1.0 + norm_inf(m), 4);
    for (const auto& lambda : roots) {
        const double res = std::abs(evaluate_polynomial(c, lambda));
        if (!(res <= bound)) {
            std::ostringstream os;
            os.precision(17);
            os << "eig4: eigenvalue " << lambda << " has characteristic residual " << res;
            throw ConvergenceError(os.str());
        }
    }
    return make_spectrum(roots);
}

}  // namespace chenhopf
