#ifndef SPAR_ADAPT_HPP
#define SPAR_ADAPT_HPP

// Spectrally adapted regression: fit the pseudoinverse regressor on source
// data, then project out the target eigendirections whose estimated bias loss
// does not clear a chi-squared multiple of their variance loss.

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "spar/errors.hpp"
#include "spar/matrixio.hpp"
#include "spar/riskmodel.hpp"
#include "spar/spectral.hpp"
#include "spar/statfun.hpp"

namespace spar {

/// Target right singular vectors chosen for removal, in ascending index order.
struct SelectionSet {
    std::vector<std::size_t> indices;
    Eigen::MatrixXd vectors;  ///< one row per index

    std::size_t size() const noexcept { return indices.size(); }
    bool empty() const noexcept { return indices.empty(); }
    bool contains(std::size_t j) const {
        for (const auto i : indices)
            if (i == j) return true;
        return false;
    }
};

struct AdaptationReport {
    Alpha alpha;
    double sigma2_hat = 0.0;
    Regressor weights_ols{Eigen::VectorXd()};
    Regressor weights_spar{Eigen::VectorXd()};
    SelectionSet selection;
    EigenLedger ledger;
    std::size_t source_rank = 0;  ///< numerical rank of X; below D means the fit is min-norm
};

/// Gathers the rows of spec_z named by `indices` (assumed ascending and in range).
inline SelectionSet make_selection(const Spectrum& spec_z, std::vector<std::size_t> indices) {
    SelectionSet s;
    s.vectors.resize(static_cast<Eigen::Index>(indices.size()), static_cast<Eigen::Index>(spec_z.dim()));
    for (std::size_t k = 0; k < indices.size(); ++k) {
        if (indices[k] >= spec_z.size()) throw ContractError("selection index out of range");
        s.vectors.row(static_cast<Eigen::Index>(k)) = spec_z.right_vectors.row(static_cast<Eigen::Index>(indices[k]));
    }
    s.indices = std::move(indices);
    return s;
}

/// Keeps e_zj in S iff chi2_inv(alpha) * Var_zj >= BiasHat_zj.
inline std::pair<SelectionSet, EigenLedger> select_spar(const Spectrum& spec_x, const Spectrum& spec_z,
                                                        const Regressor& w_hat, double sigma2, const Alpha& alpha) {
    if (w_hat.size() != spec_z.dim()) throw ContractError("regressor length does not match feature dimension");
    auto ledger = variance_ledger(spec_x, spec_z, NoiseModel(sigma2));
    const double threshold = chi2_df1_inv_cdf(alpha);
    std::vector<std::size_t> chosen;
    for (std::size_t j = 0; j < ledger.size(); ++j) {
        auto& e = ledger.entries[j];
        if (spec_z.is_positive(j)) e.bias_hat_zj = bias_hat(w_hat, spec_z.right(j), spec_z.value(j));
        e.selected = threshold * e.var_zj >= e.bias_hat_zj;
        if (e.selected) chosen.push_back(j);
    }
    return {make_selection(spec_z, std::move(chosen)), std::move(ledger)};
}

/// Risk-optimal set: every direction whose variance loss is at least its true bias loss.
inline SelectionSet select_oracle(const Spectrum& spec_x, const Spectrum& spec_z, const Regressor& w_star,
                                  double sigma2) {
    const auto risk = projected_risk(spec_x, spec_z, NoiseModel(sigma2), w_star, {});
    std::vector<std::size_t> chosen;
    for (const auto& e : risk.ledger.entries)
        if (e.var_zj >= *e.bias_zj) chosen.push_back(e.j);
    return make_selection(spec_z, std::move(chosen));
}

struct AdaptOptions {
    Alpha alpha{};
    RankTolerance tol{};
    std::optional<double> sigma2;  ///< replaces the maximum-likelihood estimate when set
};

inline AdaptationReport spar_adapt(const DataMatrix& x, const TargetVector& y, const DataMatrix& z,
                                   const AdaptOptions& opts = {}) {
    if (x.rows() != y.size()) throw ContractError("training targets do not match training rows");
    if (x.cols() != z.cols()) throw ContractError("training and test matrices have different feature counts");

    const Spectrum spec_x = decompose(x, opts.tol);
    const Spectrum spec_z = decompose(z, opts.tol);
    Regressor w_hat = pinv_solve(spec_x, y);
    const double sigma2 = opts.sigma2 ? NoiseModel(*opts.sigma2).sigma2 : mle_sigma2(x, y, w_hat);

    auto [selection, ledger] = select_spar(spec_x, spec_z, w_hat, sigma2, opts.alpha);
    Regressor w_proj = project_out(w_hat, selection.vectors);
    return AdaptationReport{opts.alpha,          sigma2,           std::move(w_hat),     std::move(w_proj),
                            std::move(selection), std::move(ledger), spec_x.numerical_rank};
}

inline AdaptationReport spar_adapt(const DataMatrix& x, const TargetVector& y, const DataMatrix& z, const Alpha& alpha,
                                   const RankTolerance& tol = RankTolerance{}) {
    return spar_adapt(x, y, z, AdaptOptions{alpha, tol, std::nullopt});
}

/// Principal component regression on the top-k uncentered right singular
/// vectors of X, mapped back to the original feature space.
inline Regressor pcr_fit(const DataMatrix& x, const TargetVector& y, std::size_t k,
                         const RankTolerance& tol = RankTolerance{}) {
    if (k < 1 || k > x.cols()) throw ContractError("pcr_fit: k must lie in [1, D]");
    if (x.rows() != y.size()) throw ContractError("training targets do not match training rows");
    const Spectrum spec_x = decompose(x, tol);
    // only min(N, D) directions exist; extra components carry no data
    const auto kk = static_cast<Eigen::Index>(std::min<std::size_t>(k, spec_x.size()));
    const Eigen::MatrixXd basis = spec_x.right_vectors.topRows(kk).transpose();  // D x k
    const DataMatrix scores(x.values() * basis);
    const Regressor beta = pinv_solve(scores, y, tol);
    return Regressor(basis * beta.weights());
}

}  // namespace spar

#endif  // SPAR_ADAPT_HPP
