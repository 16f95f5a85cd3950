#ifndef SPAR_STATFUN_HPP
#define SPAR_STATFUN_HPP

// Special functions behind the eigenvector selection rule and the noise
// variance estimator.

#include <cmath>
#include <limits>
#include <numbers>

#include "spar/errors.hpp"
#include "spar/matrixio.hpp"

namespace spar {

/// Rejection confidence in [0, 1).
class Alpha {
public:
    static constexpr double kDefault = 0.999;

    explicit Alpha(double value = kDefault) : value_(value) {
        if (!(value >= 0.0 && value < 1.0))
            throw DomainError("alpha must lie in [0, 1), got " + std::to_string(value));
    }

    double value() const noexcept { return value_; }

private:
    double value_;
};

/// P(G^2 <= x) for standard normal G.
inline double chi2_df1_cdf(double x) {
    if (x <= 0.0) return 0.0;
    return std::erf(std::sqrt(0.5 * x));
}

/// Upper tail 1 - chi2_df1_cdf(x), evaluated without cancellation.
inline double chi2_df1_sf(double x) {
    if (x <= 0.0) return 1.0;
    return std::erfc(std::sqrt(0.5 * x));
}

/// Quantile t of the chi-squared law with one degree of freedom: erf(sqrt(t/2)) = alpha.
///
/// Solves for x = sqrt(t/2) with safeguarded Newton steps. Below the median the
/// residual is taken on erf, above it on erfc so that alpha near 1 keeps its
/// relative accuracy.
inline double chi2_df1_inv_cdf(const Alpha& alpha) {
    const double a = alpha.value();
    if (a == 0.0) return 0.0;

    const bool upper = a > 0.5;
    const double q = 1.0 - a;
    auto residual = [&](double x) { return upper ? q - std::erfc(x) : std::erf(x) - a; };

    double lo = 0.0;
    double hi = 1.0;
    while (residual(hi) < 0.0) {
        lo = hi;
        hi *= 2.0;
    }
    double x = 0.5 * (lo + hi);
    const double slope = 2.0 / std::sqrt(std::numbers::pi);
    for (int it = 0; it < 200; ++it) {
        const double f = residual(x);
        if (f == 0.0) break;
        (f < 0.0 ? lo : hi) = x;
        double next = x - f / (slope * std::exp(-x * x));
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - x) <= 4.0 * std::numeric_limits<double>::epsilon() * x) {
            x = next;
            break;
        }
        x = next;
    }
    return 2.0 * x * x;
}

/// Standard normal upper tail P(G > x).
inline double gaussian_tail(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

/// Marcum Q function of order 1/2: P(|G| > b) for G ~ Normal(a, 1).
///
/// Order 1/2 reduces exactly to two Gaussian tails, tail(b - a) + tail(b + a).
inline double marcum_q_half(double a, double b) {
    if (!(a >= 0.0) || !(b >= 0.0)) throw DomainError("marcum_q_half requires a >= 0 and b >= 0");
    const double q = gaussian_tail(b - a) + gaussian_tail(b + a);
    return q > 1.0 ? 1.0 : q;
}

/// Probability that an eigenvector with the given true bias and variance is
/// kept in the selection set at confidence alpha.
inline double inclusion_probability(double bias, double var, const Alpha& alpha) {
    if (!(bias >= 0.0)) throw DomainError("bias must be >= 0");
    if (!(var > 0.0)) throw DomainError("variance must be > 0");
    const double p = 1.0 - marcum_q_half(std::sqrt(bias / var), std::sqrt(chi2_df1_inv_cdf(alpha)));
    return p < 0.0 ? 0.0 : p;
}

/// Maximum-likelihood noise variance ||y - Xw||^2 / N.
inline double mle_sigma2(const DataMatrix& x, const TargetVector& y, const Regressor& w_hat) {
    if (x.rows() != y.size() || x.cols() != w_hat.size())
        throw ContractError("mle_sigma2: inconsistent dimensions");
    return squared_error(x, y, w_hat) / static_cast<double>(x.rows());
}

}  // namespace spar

#endif  // SPAR_STATFUN_HPP
