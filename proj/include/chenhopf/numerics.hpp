#pragma once

// Small fixed-dimension linear algebra, periodic quadrature, damped Newton,
// finite-difference Jacobians and a 4x4 eigenvalue routine.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "chenhopf/errors.hpp"

namespace chenhopf {

using Complex = std::complex<double>;

template <std::size_t N>
using Vec = std::array<double, N>;

using Vec4 = Vec<4>;
using Vec5 = Vec<5>;

/// Dense N x N matrix, row-major.
template <std::size_t N>
struct Mat {
    std::array<double, N * N> data{};

    [[nodiscard]] double& operator()(std::size_t i, std::size_t j) noexcept { return data[i * N + j]; }
    [[nodiscard]] double operator()(std::size_t i, std::size_t j) const noexcept { return data[i * N + j]; }

    [[nodiscard]] static Mat identity() noexcept {
        Mat m;
        for (std::size_t i = 0; i < N; ++i) m(i, i) = 1.0;
        return m;
    }

    [[nodiscard]] static Mat from_rows(const std::array<Vec<N>, N>& rows) noexcept {
        Mat m;
        for (std::size_t i = 0; i < N; ++i)
            for (std::size_t j = 0; j < N; ++j) m(i, j) = rows[i][j];
        return m;
    }

    [[nodiscard]] Vec<N> column(std::size_t j) const noexcept {
        Vec<N> c{};
        for (std::size_t i = 0; i < N; ++i) c[i] = (*this)(i, j);
        return c;
    }

    void set_column(std::size_t j, const Vec<N>& c) noexcept {
        for (std::size_t i = 0; i < N; ++i) (*this)(i, j) = c[i];
    }

    friend bool operator==(const Mat&, const Mat&) = default;
};

using Mat4 = Mat<4>;
using Mat5 = Mat<5>;

// ---------------------------------------------------------------------------
// Vector / matrix helpers
// ---------------------------------------------------------------------------

template <std::size_t N>
[[nodiscard]] bool all_finite(const Vec<N>& v) noexcept {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

template <std::size_t N>
[[nodiscard]] bool all_finite(const Mat<N>& m) noexcept {
    return std::all_of(m.data.begin(), m.data.end(), [](double x) { return std::isfinite(x); });
}

template <std::size_t N>
[[nodiscard]] double norm_inf(const Vec<N>& v) noexcept {
    double n = 0.0;
    for (double x : v) n = std::max(n, std::abs(x));
    return n;
}

template <std::size_t N>
[[nodiscard]] double norm2(const Vec<N>& v) noexcept {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

/// Maximum absolute row sum.
template <std::size_t N>
[[nodiscard]] double norm_inf(const Mat<N>& m) noexcept {
    double n = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < N; ++j) row += std::abs(m(i, j));
        n = std::max(n, row);
    }
    return n;
}

template <std::size_t N>
[[nodiscard]] double max_abs_diff(const Mat<N>& a, const Mat<N>& b) noexcept {
    double n = 0.0;
    for (std::size_t k = 0; k < N * N; ++k) n = std::max(n, std::abs(a.data[k] - b.data[k]));
    return n;
}

template <std::size_t N>
[[nodiscard]] Vec<N> operator+(const Vec<N>& a, const Vec<N>& b) noexcept {
    Vec<N> r{};
    for (std::size_t i = 0; i < N; ++i) r[i] = a[i] + b[i];
    return r;
}

template <std::size_t N>
[[nodiscard]] Vec<N> operator-(const Vec<N>& a, const Vec<N>& b) noexcept {
    Vec<N> r{};
    for (std::size_t i = 0; i < N; ++i) r[i] = a[i] - b[i];
    return r;
}

template <std::size_t N>
[[nodiscard]] Vec<N> operator*(double s, const Vec<N>& a) noexcept {
    Vec<N> r{};
    for (std::size_t i = 0; i < N; ++i) r[i] = s * a[i];
    return r;
}

template <std::size_t N>
[[nodiscard]] double dot(const Vec<N>& a, const Vec<N>& b) noexcept {
    double s = 0.0;
    for (std::size_t i = 0; i < N; ++i) s += a[i] * b[i];
    return s;
}

template <std::size_t N>
[[nodiscard]] Vec<N> operator*(const Mat<N>& m, const Vec<N>& v) noexcept {
    Vec<N> r{};
    for (std::size_t i = 0; i < N; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < N; ++j) s += m(i, j) * v[j];
        r[i] = s;
    }
    return r;
}

template <std::size_t N>
[[nodiscard]] Mat<N> operator*(const Mat<N>& a, const Mat<N>& b) noexcept {
    Mat<N> r;
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t k = 0; k < N; ++k) {
            const double aik = a(i, k);
            for (std::size_t j = 0; j < N; ++j) r(i, j) += aik * b(k, j);
        }
    return r;
}

template <std::size_t N>
[[nodiscard]] Mat<N> operator-(const Mat<N>& a, const Mat<N>& b) noexcept {
    Mat<N> r;
    for (std::size_t k = 0; k < N * N; ++k) r.data[k] = a.data[k] - b.data[k];
    return r;
}

template <std::size_t N>
[[nodiscard]] Mat<N> operator+(const Mat<N>& a, const Mat<N>& b) noexcept {
    Mat<N> r;
    for (std::size_t k = 0; k < N * N; ++k) r.data[k] = a.data[k] + b.data[k];
    return r;
}

template <std::size_t N>
[[nodiscard]] Mat<N> operator*(double s, const Mat<N>& a) noexcept {
    Mat<N> r;
    for (std::size_t k = 0; k < N * N; ++k) r.data[k] = s * a.data[k];
    return r;
}

template <std::size_t N>
[[nodiscard]] double trace(const Mat<N>& m) noexcept {
    double t = 0.0;
    for (std::size_t i = 0; i < N; ++i) t += m(i, i);
    return t;
}

// ---------------------------------------------------------------------------
// LU with partial pivoting
// ---------------------------------------------------------------------------

/// LU factors of a square matrix; pivot magnitudes below
/// 1e-14 * ||A||_inf are treated as singular.
template <std::size_t N>
class LuDecomposition {
public:
    static constexpr double kPivotRelTol = 1e-14;

    explicit LuDecomposition(const Mat<N>& a) : lu_(a) {
        const double scale = norm_inf(a);
        const double threshold = kPivotRelTol * scale;
        for (std::size_t k = 0; k < N; ++k) {
            std::size_t p = k;
            double best = std::abs(lu_(k, k));
            for (std::size_t i = k + 1; i < N; ++i) {
                if (std::abs(lu_(i, k)) > best) {
                    best = std::abs(lu_(i, k));
                    p = i;
                }
            }
            if (!(best > threshold) || best == 0.0) {
                singular_ = true;
                min_pivot_ = 0.0;
                return;
            }
            min_pivot_ = std::min(min_pivot_, best);
            perm_[k] = p;
            if (p != k) {
                sign_ = -sign_;
                for (std::size_t j = 0; j < N; ++j) std::swap(lu_(k, j), lu_(p, j));
            }
            for (std::size_t i = k + 1; i < N; ++i) {
                const double f = lu_(i, k) / lu_(k, k);
                lu_(i, k) = f;
                for (std::size_t j = k + 1; j < N; ++j) lu_(i, j) -= f * lu_(k, j);
            }
        }
    }

    [[nodiscard]] bool singular() const noexcept { return singular_; }

    [[nodiscard]] Vec<N> solve(Vec<N> b) const {
        if (singular_) throw SingularMatrixError("LU solve: matrix is singular to working precision");
        for (std::size_t k = 0; k < N; ++k) std::swap(b[k], b[perm_[k]]);
        for (std::size_t i = 1; i < N; ++i)
            for (std::size_t j = 0; j < i; ++j) b[i] -= lu_(i, j) * b[j];
        for (std::size_t ii = N; ii-- > 0;) {
            for (std::size_t j = ii + 1; j < N; ++j) b[ii] -= lu_(ii, j) * b[j];
            b[ii] /= lu_(ii, ii);
        }
        return b;
    }

    [[nodiscard]] double determinant() const noexcept {
        if (singular_) return 0.0;
        double d = sign_;
        for (std::size_t i = 0; i < N; ++i) d *= lu_(i, i);
        return d;
    }

private:
    Mat<N> lu_;
    std::array<std::size_t, N> perm_{};
    double sign_ = 1.0;
    double min_pivot_ = std::numeric_limits<double>::infinity();
    bool singular_ = false;
};

template <std::size_t N>
[[nodiscard]] Vec<N> solve_linear(const Mat<N>& a, const Vec<N>& b) {
    return LuDecomposition<N>(a).solve(b);
}

/// Determinant via Gaussian elimination without the singularity cutoff.
template <std::size_t N>
[[nodiscard]] double determinant(Mat<N> a) noexcept {
    double det = 1.0;
    for (std::size_t k = 0; k < N; ++k) {
        std::size_t p = k;
        for (std::size_t i = k + 1; i < N; ++i)
            if (std::abs(a(i, k)) > std::abs(a(p, k))) p = i;
        if (a(p, k) == 0.0) return 0.0;
        if (p != k) {
            det = -det;
            for (std::size_t j = 0; j < N; ++j) std::swap(a(k, j), a(p, j));
        }
        det *= a(k, k);
        for (std::size_t i = k + 1; i < N; ++i) {
            const double f = a(i, k) / a(k, k);
            for (std::size_t j = k; j < N; ++j) a(i, j) -= f * a(k, j);
        }
    }
    return det;
}

template <std::size_t N>
[[nodiscard]] Mat<N> inverse(const Mat<N>& a) {
    const LuDecomposition<N> lu(a);
    Mat<N> inv;
    for (std::size_t j = 0; j < N; ++j) {
        Vec<N> e{};
        e[j] = 1.0;
        inv.set_column(j, lu.solve(e));
    }
    return inv;
}

// ---------------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------------

/// Mean value of a periodic integrand over one period using the equispaced
/// (periodic trapezoid) rule on [0, period). Exact up to roundoff for
/// trigonometric polynomials whose harmonic count is below `nodes`.
[[nodiscard]] Vec4 periodic_trapezoid_integrate(const std::function<Vec4(double)>& integrand, double period,
                                                std::size_t nodes);

// ---------------------------------------------------------------------------
// Finite differences
// ---------------------------------------------------------------------------

/// sqrt(machine epsilon)
inline const double kDefaultFdStep = std::sqrt(std::numeric_limits<double>::epsilon());

/// Central-difference Jacobian; column j uses h = step * max(1, |x_j|).
template <std::size_t N>
[[nodiscard]] Mat<N> finite_difference_jacobian(const std::function<Vec<N>(const Vec<N>&)>& residual,
                                                const Vec<N>& point, double step = kDefaultFdStep) {
    if (!(step > 0.0) || !std::isfinite(step))
        throw PreconditionError("finite_difference_jacobian: step must be positive and finite");
    Mat<N> jac;
    for (std::size_t j = 0; j < N; ++j) {
        const double h = step * std::max(1.0, std::abs(point[j]));
        Vec<N> plus = point;
        Vec<N> minus = point;
        plus[j] += h;
        minus[j] -= h;
        const Vec<N> fp = residual(plus);
        const Vec<N> fm = residual(minus);
        const double width = plus[j] - minus[j];
        for (std::size_t i = 0; i < N; ++i) jac(i, j) = (fp[i] - fm[i]) / width;
    }
    if (!all_finite(jac)) throw NonFiniteError("finite_difference_jacobian: non-finite entry");
    return jac;
}

// ---------------------------------------------------------------------------
// Damped Newton
// ---------------------------------------------------------------------------

template <std::size_t N>
struct NewtonReport {
    Vec<N> root{};
    int iterations = 0;
    double residual = std::numeric_limits<double>::infinity();  // inf-norm at root
    bool converged = false;
    std::string message;
};

struct NewtonOptions {
    double tol = 1e-12;
    int max_iter = 50;
    int max_halvings = 30;
};

/// Newton's method with residual-monotone step halving. An empty `jacobian`
/// falls back to central finite differences. Throws SingularMatrixError when a
/// Newton matrix has a pivot below 1e-14 * ||J||_inf; exhausting the iteration
/// budget or failing to decrease the residual yields converged = false.
template <std::size_t N>
[[nodiscard]] NewtonReport<N> newton_solve(const std::function<Vec<N>(const Vec<N>&)>& residual,
                                           const std::function<Mat<N>(const Vec<N>&)>& jacobian,
                                           const Vec<N>& seed, const NewtonOptions& opts = {}) {
    if (!(opts.tol > 0.0)) throw PreconditionError("newton_solve: tol must be positive");
    if (opts.max_iter < 1) throw PreconditionError("newton_solve: max_iter must be at least 1");

    NewtonReport<N> rep;
    Vec<N> x = seed;
    Vec<N> fx = residual(x);
    double norm = all_finite(fx) ? norm_inf(fx) : std::numeric_limits<double>::infinity();
    rep.root = x;
    rep.residual = norm;
    if (!std::isfinite(norm)) {
        rep.message = "non-finite residual at seed";
        return rep;
    }

    for (int it = 0; it < opts.max_iter; ++it) {
        if (norm <= opts.tol) {
            rep.converged = true;
            rep.message = "converged";
            return rep;
        }
        const Mat<N> jac = jacobian ? jacobian(x) : finite_difference_jacobian<N>(residual, x);
        const LuDecomposition<N> lu(jac);
        if (lu.singular()) {
            std::ostringstream os;
            os << "newton_solve: singular Jacobian at iteration " << it;
            throw SingularMatrixError(os.str());
        }
        const Vec<N> step = lu.solve(-1.0 * fx);

        double lambda = 1.0;
        bool accepted = false;
        Vec<N> trial{};
        Vec<N> ftrial{};
        double trial_norm = 0.0;
        for (int h = 0; h <= opts.max_halvings; ++h) {
            trial = x + lambda * step;
            ftrial = residual(trial);
            trial_norm = all_finite(ftrial) ? norm_inf(ftrial) : std::numeric_limits<double>::infinity();
            if (trial_norm < norm) {
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        rep.iterations = it + 1;
        if (!accepted) {
            rep.message = "residual did not decrease after step halving";
            return rep;
        }
        x = trial;
        fx = ftrial;
        norm = trial_norm;
        rep.root = x;
        rep.residual = norm;
    }
    rep.converged = norm <= opts.tol;
    rep.message = rep.converged ? "converged" : "iteration budget exhausted";
    return rep;
}

// ---------------------------------------------------------------------------
// Eigenvalues of 4x4 matrices
// ---------------------------------------------------------------------------

/// Four eigenvalues sorted by descending real part, then descending imaginary part.
struct QuarticSpectrum {
    std::array<Complex, 4> values{};

    [[nodiscard]] const Complex& operator[](std::size_t i) const noexcept { return values[i]; }
    [[nodiscard]] Complex sum() const noexcept { return values[0] + values[1] + values[2] + values[3]; }
    [[nodiscard]] Complex product() const noexcept { return values[0] * values[1] * values[2] * values[3]; }
};

/// Sorts into canonical order. Does not alter the values.
[[nodiscard]] QuarticSpectrum make_spectrum(std::array<Complex, 4> values);

/// Smallest, over all pairings, of the largest |a_i - b_pi(i)|.
[[nodiscard]] double spectrum_distance(const QuarticSpectrum& a, const QuarticSpectrum& b);

/// True when every non-real value has its conjugate present within `tol`.
[[nodiscard]] bool conjugation_closed(const QuarticSpectrum& s, double tol = 1e-10);

/// Monic quartic lambda^4 + c[3] lambda^3 + c[2] lambda^2 + c[1] lambda + c[0]
/// stored as ascending coefficients c[0..4] with c[4] == 1.
using QuarticCoefficients = std::array<double, 5>;

/// det(lambda I - M) via the Faddeev-LeVerrier recurrence.
[[nodiscard]] QuarticCoefficients characteristic_polynomial(const Mat4& m);

[[nodiscard]] Complex evaluate_polynomial(const QuarticCoefficients& c, Complex z) noexcept;

/// Durand-Kerner roots of a real monic quartic. Throws ConvergenceError with
/// the last estimates in the message when 500 sweeps do not reach 1e-13.
[[nodiscard]] std::array<Complex, 4> quartic_roots(const QuarticCoefficients& c);

/// Spectrum of a real 4x4 matrix: characteristic polynomial + Durand-Kerner.
[[nodiscard]] QuarticSpectrum eig4(const Mat4& m);

}  // namespace chenhopf
