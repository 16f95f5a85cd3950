#ifndef SPAR_RISKMODEL_HPP
#define SPAR_RISKMODEL_HPP

// Closed-form out-of-distribution risk of the pseudoinverse regressor and of
// its projections, split per target eigenvector into a variance loss (paid when
// the direction is kept) and a bias loss (paid when it is projected out).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "spar/errors.hpp"
#include "spar/matrixio.hpp"
#include "spar/spectral.hpp"

namespace spar {

struct NoiseModel {
    double sigma2 = 1.0;

    explicit NoiseModel(double s2 = 1.0) : sigma2(s2) {
        if (!(s2 >= 0.0) || !std::isfinite(s2)) throw DomainError("noise variance must be finite and >= 0");
    }
};

/// Per target eigenvector record. Index j is 0-based and follows descending singular value.
struct LedgerEntry {
    std::size_t j = 0;
    double lambda_z_sq = 0.0;
    double var_zj = 0.0;
    std::optional<double> bias_zj;  ///< only when the true regressor is known
    double bias_hat_zj = 0.0;
    bool selected = false;
};

struct EigenLedger {
    std::vector<LedgerEntry> entries;

    std::size_t size() const noexcept { return entries.size(); }
    const LedgerEntry& operator[](std::size_t j) const { return entries.at(j); }
};

namespace detail {

inline void require_same_dim(const Spectrum& a, const Spectrum& b) {
    if (a.dim() != b.dim()) throw ContractError("source and target spectra have different feature dimensions");
}

inline void require_dim(const Spectrum& s, const Eigen::VectorXd& v) {
    if (static_cast<std::size_t>(v.size()) != s.dim())
        throw ContractError("vector length does not match feature dimension");
}

}  // namespace detail

/// sigma^2 * sum_i (lambda_zj^2 / lambda_xi^2) <e_xi, e_zj>^2 over positive lambda_xi.
inline double variance_term(const Spectrum& spec_x, const Eigen::Ref<const Eigen::VectorXd>& e_zj, double lambda_zj,
                            const NoiseModel& noise) {
    if (static_cast<std::size_t>(e_zj.size()) != spec_x.dim())
        throw ContractError("eigenvector length does not match source feature dimension");
    const auto r = static_cast<Eigen::Index>(spec_x.numerical_rank);
    const Eigen::VectorXd cos = spec_x.right_vectors.topRows(r) * e_zj;
    const Eigen::VectorXd inv_sq = spec_x.singular_values.head(r).array().square().inverse();
    const double lz2 = lambda_zj * lambda_zj;
    return noise.sigma2 * lz2 * (cos.array().square() * inv_sq.array()).sum();
}

/// <w*, e_zj>^2 lambda_zj^2: the loss incurred by projecting e_zj out.
inline double bias_term(const Regressor& w_star, const Eigen::Ref<const Eigen::VectorXd>& e_zj, double lambda_zj) {
    if (w_star.size() != static_cast<std::size_t>(e_zj.size()))
        throw ContractError("regressor length does not match eigenvector length");
    const double c = w_star.weights().dot(e_zj) * lambda_zj;
    return c * c;
}

/// Plug-in estimate of bias_term using the fitted regressor.
inline double bias_hat(const Regressor& w_hat, const Eigen::Ref<const Eigen::VectorXd>& e_zj, double lambda_zj) {
    return bias_term(w_hat, e_zj, lambda_zj);
}

/// Ledger with lambda^2 and variance filled for every target direction. Directions
/// whose singular value is not positive keep var = 0.
inline EigenLedger variance_ledger(const Spectrum& spec_x, const Spectrum& spec_z, const NoiseModel& noise) {
    detail::require_same_dim(spec_x, spec_z);
    EigenLedger ledger;
    ledger.entries.resize(spec_z.size());
    for (std::size_t j = 0; j < spec_z.size(); ++j) {
        auto& e = ledger.entries[j];
        e.j = j;
        e.lambda_z_sq = spec_z.value(j) * spec_z.value(j);
        if (spec_z.is_positive(j))
            e.var_zj = variance_term(spec_x, spec_z.right_vectors.row(static_cast<Eigen::Index>(j)).transpose(),
                                     spec_z.value(j), noise);
    }
    return ledger;
}

/// Expected ||Y_Z - Z w_hat||^2 as the double sum over source and target eigenpairs.
inline double ols_ood_risk(const Spectrum& spec_x, const Spectrum& spec_z, const NoiseModel& noise) {
    detail::require_same_dim(spec_x, spec_z);
    const auto rx = static_cast<Eigen::Index>(spec_x.numerical_rank);
    double total = 0.0;
    for (Eigen::Index i = 0; i < rx; ++i) {
        const double lx2 = spec_x.singular_values(i) * spec_x.singular_values(i);
        for (Eigen::Index j = 0; j < spec_z.singular_values.size(); ++j) {
            if (!spec_z.is_positive(static_cast<std::size_t>(j))) continue;
            const double lz2 = spec_z.singular_values(j) * spec_z.singular_values(j);
            const double c = spec_x.right_vectors.row(i).dot(spec_z.right_vectors.row(j));
            total += lz2 / lx2 * c * c;
        }
    }
    return noise.sigma2 * total;
}

struct ProjectedRisk {
    double total = 0.0;
    EigenLedger ledger;
};

/// Expected loss of w_hat with the target directions in `selected` projected out:
/// variance over kept directions plus bias over removed ones.
inline ProjectedRisk projected_risk(const Spectrum& spec_x, const Spectrum& spec_z, const NoiseModel& noise,
                                    const Regressor& w_star, const std::vector<std::size_t>& selected) {
    detail::require_dim(spec_z, w_star.weights());
    ProjectedRisk out{0.0, variance_ledger(spec_x, spec_z, noise)};
    for (const auto j : selected) {
        if (j >= spec_z.size()) throw ContractError("selected index " + std::to_string(j) + " is out of range");
        out.ledger.entries[j].selected = true;
    }
    for (std::size_t j = 0; j < spec_z.size(); ++j) {
        auto& e = out.ledger.entries[j];
        const double bias = spec_z.is_positive(j)
                                ? bias_term(w_star, spec_z.right(j), spec_z.value(j))
                                : 0.0;
        e.bias_zj = bias;
        out.total += e.selected ? bias : e.var_zj;
    }
    return out;
}

struct InflationPoint {
    std::size_t j = 0;
    double lambda_z_sq = 0.0;
    double normalized_var = 0.0;  ///< Var_{z,j} / M
};

/// Per-direction variance loss divided by the number of target rows, so that
/// target sets of different sizes are comparable.
inline std::vector<InflationPoint> inflation_profile(const Spectrum& spec_x, const Spectrum& spec_z,
                                                     const NoiseModel& noise) {
    const auto ledger = variance_ledger(spec_x, spec_z, noise);
    const double m = static_cast<double>(spec_z.sample_count);
    std::vector<InflationPoint> out;
    out.reserve(ledger.size());
    for (const auto& e : ledger.entries) out.push_back({e.j, e.lambda_z_sq, e.var_zj / m});
    return out;
}

}  // namespace spar

#endif  // SPAR_RISKMODEL_HPP
