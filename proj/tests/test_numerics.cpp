#include <cmath>
#include <numbers>

#include <Eigen/SVD>
#include <boost/math/special_functions/expint.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <gtest/gtest.h>

#include "scbris/numerics.hpp"
#include "scbris/random.hpp"

using namespace scbris;

namespace {

CMatrix random_matrix(int r, int c, std::uint64_t seed) {
    RandomStream rng(seed);
    CMatrix a(r, c);
    for (int j = 0; j < c; ++j)
        for (int i = 0; i < r; ++i) a(i, j) = rng.complex_normal();
    return a;
}

CVector random_vector(int n, std::uint64_t seed) {
    RandomStream rng(seed);
    CVector v(n);
    for (int i = 0; i < n; ++i) v(i) = rng.complex_normal();
    return v;
}

// Erlang CDF: 1 - e^-x sum_{j<s} x^j / j!
double erlang_cdf(int s, double x) {
    double term = 1.0, sum = 1.0;
    for (int j = 1; j < s; ++j) {
        term *= x / j;
        sum += term;
    }
    return 1.0 - std::exp(-x) * sum;
}

}  // namespace

TEST(MinNormSolve, UnderdeterminedSolutionIsOrthogonalToNullSpace) {
    const CMatrix a = random_matrix(8, 40, 11);
    const CVector b = random_vector(8, 12);
    const auto sol = min_norm_solve({a, b});
    EXPECT_EQ(sol.rank, 8);
    EXPECT_LT((a * sol.x - b).norm(), 1e-12 * b.norm());
    EXPECT_LT(sol.residual_norm, 1e-12 * b.norm());

    Eigen::JacobiSVD<CMatrix> svd(a, Eigen::ComputeFullV);
    const CMatrix null_basis = svd.matrixV().rightCols(40 - 8);
    EXPECT_LT((null_basis.adjoint() * sol.x).norm(), 1e-12 * sol.x.norm());
}

TEST(MinNormSolve, MatchesPseudoInverseOnRankDeficientSystem) {
    CMatrix a = random_matrix(6, 10, 21);
    a.row(5) = a.row(0) + a.row(1);
    const CVector b = random_vector(6, 22);
    const auto sol = min_norm_solve({a, b});
    EXPECT_EQ(sol.rank, 5);
    Eigen::JacobiSVD<CMatrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(1e-10);
    const CVector ref = svd.solve(b);
    EXPECT_LT((sol.x - ref).norm(), 1e-10 * ref.norm());
}

TEST(MinNormSolve, SquareFullRankIsExact) {
    const CMatrix a = random_matrix(5, 5, 31);
    const CVector x = random_vector(5, 32);
    const auto sol = min_norm_solve({a, a * x});
    EXPECT_LT((sol.x - x).norm(), 1e-10 * x.norm());
}

TEST(MinNormSolve, RejectsBadInput) {
    const CMatrix a = random_matrix(3, 4, 1);
    EXPECT_THROW(min_norm_solve({a, random_vector(2, 2)}), NumericError);
    CMatrix bad = a;
    bad(0, 0) = cplx(std::nan(""), 0.0);
    EXPECT_THROW(min_norm_solve({bad, random_vector(3, 2)}), NumericError);
    EXPECT_THROW(min_norm_solve({a, random_vector(3, 2)}, -1.0), DomainError);
}

TEST(GammaP, MatchesErlangClosedForm) {
    for (int s = 1; s <= 8; ++s)
        for (double x : {1e-3, 0.1, 0.5, 1.0, 3.0, 10.0, 30.0}) EXPECT_NEAR(gamma_p(s, x), erlang_cdf(s, x), 1e-13);
}

TEST(GammaP, ReferenceValues) {
    EXPECT_NEAR(gamma_p(2, 1.0), 0.2642411176571153, 1e-15);
    EXPECT_NEAR(gamma_p(8, 10.0), 0.779779353398301, 1e-14);
    EXPECT_EQ(gamma_p(3, 0.0), 0.0);
    EXPECT_NEAR(gamma_p(1, 800.0), 1.0, 1e-15);
}

TEST(GammaP, AgreesWithBoost) {
    for (double s : {0.5, 1.0, 2.5, 4.0, 7.0})
        for (double x : {0.01, 0.7, 2.0, 9.0, 50.0})
            EXPECT_NEAR(gamma_p(s, x), boost::math::gamma_p(s, x), 1e-13) << s << " " << x;
}

TEST(GammaP, RejectsInvalidArguments) {
    EXPECT_THROW(gamma_p(0.0, 1.0), DomainError);
    EXPECT_THROW(gamma_p(2.0, -1.0), DomainError);
    EXPECT_THROW(gamma_p(2.0, std::nan("")), DomainError);
}

TEST(ExponentialIntegral, ReferenceValues) {
    EXPECT_NEAR(exponential_integral_ei(-1.0), -0.2193839343955205, 1e-15);
    EXPECT_NEAR(-std::exp(0.5) * exponential_integral_ei(-0.5), 0.922911, 1e-6);
    for (double x : {-1e-4, -0.3, -1.0, -1.5, -4.0, -20.0, -200.0})
        EXPECT_NEAR(exponential_integral_ei(x), boost::math::expint(x), 1e-14 * std::abs(boost::math::expint(x)) + 1e-300);
}

TEST(ExponentialIntegral, ScaledFormStaysFinite) {
    EXPECT_NEAR(exp_scaled_e1(0.5), 0.922911, 1e-6);
    EXPECT_NEAR(exp_scaled_e1(2.0), -std::exp(2.0) * boost::math::expint(-2.0), 1e-15);
    // e^z E1(z) ~ 1/z (1 - 1/z + 2/z^2) for large z.
    const double z = 1e4;
    EXPECT_NEAR(exp_scaled_e1(z), (1.0 - 1.0 / z + 2.0 / (z * z)) / z, 1e-15);
    EXPECT_THROW(exp_scaled_e1(0.0), DomainError);
}

TEST(ExponentialIntegral, RejectsNonNegative) {
    EXPECT_THROW(exponential_integral_ei(0.0), DomainError);
    EXPECT_THROW(exponential_integral_ei(1.0), DomainError);
}

TEST(Quadrature, FiniteIntervals) {
    EXPECT_NEAR(quadrature_finite([](double x) { return std::sin(x); }, 0.0, std::numbers::pi), 2.0, 1e-13);
    EXPECT_NEAR(quadrature_finite([](double x) { return std::sqrt(x); }, 0.0, 1.0), 2.0 / 3.0, 1e-11);
    EXPECT_NEAR(quadrature_finite([](double x) { return x * x; }, 1.0, 1.0), 0.0, 0.0);
}

TEST(Quadrature, SemiInfinite) {
    EXPECT_NEAR(quadrature_semi_infinite([](double x) { return std::exp(-x); }), 1.0, 1e-12);
    EXPECT_NEAR(quadrature_semi_infinite([](double x) { return 1.0 / (1.0 + x * x); }), std::numbers::pi / 2, 1e-10);
    EXPECT_NEAR(quadrature_semi_infinite([](double u) { return std::exp(-(1.0 + u)) / (1.0 + u); }),
                0.2193839343955205, 1e-12);
}

TEST(Quadrature, ThrowsWhenBudgetExhausted) {
    EXPECT_THROW(quadrature_finite([](double x) { return std::sin(1.0 / x); }, 1e-9, 1.0, 1e-15, 8), NumericError);
}
