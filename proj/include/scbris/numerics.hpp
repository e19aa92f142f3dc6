#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>
#include <queue>
#include <vector>

#include <Eigen/Dense>

#include "scbris/errors.hpp"

namespace scbris {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

/// A (possibly non-square) complex linear system a * x = b.
struct ComplexLinearSystem {
    CMatrix a;
    CVector b;
};

struct MinNormSolution {
    CVector x;
    double residual_norm = 0.0;
    Eigen::Index rank = 0;
};

namespace detail {

inline bool all_finite(const CMatrix& m) {
    return m.allFinite();
}

}  // namespace detail

/// Minimum-norm least-squares solution of a*x = b.
///
/// Uses a complete orthogonal decomposition; pivots below
/// rank_tol * (largest pivot) are treated as zero. For a consistent
/// underdetermined system the residual is zero to rounding and x is the
/// unique solution of smallest Euclidean norm.
inline MinNormSolution min_norm_solve(const ComplexLinearSystem& sys, double rank_tol = 1e-10) {
    if (!(rank_tol > 0.0 && rank_tol < 1.0)) {
        throw DomainError("min_norm_solve: rank_tol must lie in (0, 1)");
    }
    if (sys.a.rows() < 1 || sys.a.cols() < 1 || sys.a.rows() != sys.b.size()) {
        throw NumericError("min_norm_solve: dimension mismatch");
    }
    if (!detail::all_finite(sys.a) || !sys.b.allFinite()) {
        throw NumericError("min_norm_solve: non-finite input");
    }
    Eigen::CompleteOrthogonalDecomposition<CMatrix> cod;
    cod.setThreshold(rank_tol);
    cod.compute(sys.a);
    MinNormSolution out;
    out.rank = cod.rank();
    if (out.rank == 0) {
        out.x = CVector::Zero(sys.a.cols());
    } else {
        out.x = cod.solve(sys.b);
    }
    out.residual_norm = (sys.a * out.x - sys.b).norm();
    return out;
}

// ---------------------------------------------------------------------------
// Special functions

/// Regularized lower incomplete gamma P(s, x) = gamma(s, x) / Gamma(s).
///
/// Power series for x < s + 1, Lentz continued fraction for Q otherwise.
inline double gamma_p(double s, double x) {
    if (!(s > 0.0) || !(x >= 0.0) || std::isnan(x)) {
        throw DomainError("gamma_p: requires s > 0 and x >= 0");
    }
    if (x == 0.0) return 0.0;
    if (std::isinf(x)) return 1.0;

    constexpr double eps = 1e-17;
    constexpr int max_iter = 100000;
    const double log_prefactor = -x + s * std::log(x) - std::lgamma(s);

    if (x < s + 1.0) {
        double term = 1.0 / s;
        double sum = term;
        double ap = s;
        for (int n = 0; n < max_iter; ++n) {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if (std::abs(term) < std::abs(sum) * eps) {
                return std::min(1.0, sum * std::exp(log_prefactor));
            }
        }
        throw NumericError("gamma_p: series did not converge");
    }

    // Q(s, x) via the continued fraction 1/(x+1-s- 1(1-s)/(x+3-s- ...)).
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - s;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < max_iter; ++i) {
        const double an = -i * (i - s);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < eps) {
            return std::max(0.0, 1.0 - std::exp(log_prefactor) * h);
        }
    }
    throw NumericError("gamma_p: continued fraction did not converge");
}

namespace detail {

// E1(z) = -gamma - ln z - sum_{n>=1} (-z)^n / (n n!), for small z.
inline double e1_series(double z) {
    constexpr double eps = 1e-17;
    double sum = 0.0;
    double fact = 1.0;
    for (int n = 1; n < 100000; ++n) {
        fact *= -z / n;
        const double del = -fact / n;
        sum += del;
        if (std::abs(del) < std::abs(sum) * eps) return -std::numbers::egamma - std::log(z) + sum;
    }
    throw NumericError("exponential integral: series did not converge");
}

// e^z E1(z) by Lentz's continued fraction, for z > 1.
inline double e1_scaled_cf(double z) {
    constexpr double eps = 1e-17;
    constexpr double tiny = 1e-300;
    double b = z + 1.0;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 100000; ++i) {
        const double an = -static_cast<double>(i) * i;
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        const double delta = c * d;
        h *= delta;
        if (std::abs(delta - 1.0) < eps) return h;
    }
    throw NumericError("exponential integral: continued fraction did not converge");
}

}  // namespace detail

/// e^z E1(z) for z > 0, without overflow for large z.
inline double exp_scaled_e1(double z) {
    if (!(z > 0.0)) throw DomainError("exp_scaled_e1: z must be positive");
    if (std::isinf(z)) return 0.0;
    return z <= 1.0 ? std::exp(z) * detail::e1_series(z) : detail::e1_scaled_cf(z);
}

/// Exponential integral Ei(x) on the negative axis, Ei(-z) = -E1(z).
inline double exponential_integral_ei(double x) {
    if (!(x < 0.0)) {
        throw DomainError("exponential_integral_ei: only x < 0 is supported");
    }
    const double z = -x;
    if (std::isinf(z)) return -0.0;
    return z <= 1.0 ? -detail::e1_series(z) : -detail::e1_scaled_cf(z) * std::exp(-z);
}

// ---------------------------------------------------------------------------
// Adaptive Gauss-Kronrod quadrature (verification oracle, not a hot path)

namespace detail {

struct GkEstimate {
    double a, b;
    double value;
    double error;
    bool operator<(const GkEstimate& other) const { return error < other.error; }
};

template <typename F>
GkEstimate gauss_kronrod15(const F& f, double a, double b) {
    static constexpr std::array<double, 8> xk = {
        0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
        0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
        0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
        0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
    static constexpr std::array<double, 8> wk = {
        0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
        0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
        0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
        0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
    static constexpr std::array<double, 4> wg = {
        0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
        0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(center);
    double kronrod = fc * wk[7];
    double gauss = fc * wg[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = half * xk[j];
        const double f1 = f(center - dx);
        const double f2 = f(center + dx);
        kronrod += wk[j] * (f1 + f2);
        if (j % 2 == 1) gauss += wg[j / 2] * (f1 + f2);
    }
    kronrod *= half;
    gauss *= half;
    return {a, b, kronrod, std::abs(kronrod - gauss)};
}

}  // namespace detail

/// Adaptive G7-K15 integration over the finite interval [a, b].
template <typename F>
double quadrature_finite(const F& f, double a, double b, double tol = 1e-12,
                         int max_intervals = 20000) {
    if (a == b) return 0.0;
    std::priority_queue<detail::GkEstimate> work;
    work.push(detail::gauss_kronrod15(f, a, b));
    double total = work.top().value;
    double total_err = work.top().error;
    for (int it = 0; it < max_intervals; ++it) {
        if (!std::isfinite(total)) break;
        if (total_err <= std::max(tol * std::abs(total), 1e-300)) return total;
        const auto worst = work.top();
        work.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        const auto left = detail::gauss_kronrod15(f, worst.a, mid);
        const auto right = detail::gauss_kronrod15(f, mid, worst.b);
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        work.push(left);
        work.push(right);
    }
    // Recompute the sum to shed accumulated cancellation before the final check.
    double sum = 0.0, err = 0.0;
    while (!work.empty()) {
        sum += work.top().value;
        err += work.top().error;
        work.pop();
    }
    if (std::isfinite(sum) && err <= std::max(tol * std::abs(sum), 1e-300)) return sum;
    throw NumericError("quadrature: refinement budget exhausted without convergence");
}

/// Adaptive estimate of the integral of f over [0, inf).
///
/// Substitutes x = scale * t / (1 - t); pick scale near the integrand's
/// decay length.
template <typename F>
double quadrature_semi_infinite(const F& f, double tol = 1e-12, double scale = 1.0) {
    if (!(scale > 0.0)) throw DomainError("quadrature_semi_infinite: scale must be positive");
    auto mapped = [&](double t) {
        const double one_minus = 1.0 - t;
        if (one_minus <= 0.0) return 0.0;
        const double x = scale * t / one_minus;
        const double v = f(x) * scale / (one_minus * one_minus);
        return std::isfinite(v) ? v : 0.0;
    };
    return quadrature_finite(mapped, 0.0, 1.0, tol);
}

}  // namespace scbris
