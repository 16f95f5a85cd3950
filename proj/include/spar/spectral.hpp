#ifndef SPAR_SPECTRAL_HPP
#define SPAR_SPECTRAL_HPP

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "spar/errors.hpp"
#include "spar/matrixio.hpp"

namespace spar {

/// A singular value counts as positive iff it exceeds
/// relative_threshold * max_singular_value * max(N, D).
struct RankTolerance {
    double relative_threshold = 1e-12;

    explicit RankTolerance(double rel = 1e-12) : relative_threshold(rel) {
        if (!(rel >= 0.0) || !std::isfinite(rel)) throw DomainError("rank tolerance must be a finite value >= 0");
    }
};

/// Thin SVD M = sum_i s_i u_i e_i^T with min(N, D) triplets.
///
/// Singular values are descending. Each right vector is sign-normalized so its
/// largest-magnitude entry is positive (first such entry on ties), and the
/// matching left vector is flipped with it.
struct Spectrum {
    Eigen::VectorXd singular_values;  ///< length k = min(N, D)
    Eigen::MatrixXd right_vectors;    ///< k x D, row i is e_i
    Eigen::MatrixXd left_vectors;     ///< N x k, column i is u_i
    std::size_t numerical_rank = 0;
    double rank_cutoff = 0.0;         ///< singular values strictly above this are positive
    std::size_t sample_count = 0;     ///< N

    std::size_t size() const noexcept { return static_cast<std::size_t>(singular_values.size()); }
    std::size_t dim() const noexcept { return static_cast<std::size_t>(right_vectors.cols()); }

    Eigen::VectorXd right(std::size_t i) const {
        return right_vectors.row(static_cast<Eigen::Index>(i)).transpose();
    }
    double value(std::size_t i) const { return singular_values(static_cast<Eigen::Index>(i)); }
    bool is_positive(std::size_t i) const { return value(i) > rank_cutoff; }
};

inline Spectrum decompose(const Eigen::Ref<const Eigen::MatrixXd>& m, const RankTolerance& tol = RankTolerance{}) {
    if (m.rows() < 1 || m.cols() < 1) throw EmptyInputError("cannot decompose an empty matrix");
    if (!m.array().isFinite().all()) throw DomainError("cannot decompose a matrix with non-finite entries");

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success) throw NumericError("singular value decomposition did not converge");

    Spectrum s;
    s.singular_values = svd.singularValues();
    s.right_vectors = svd.matrixV().transpose();
    s.left_vectors = svd.matrixU();
    s.sample_count = static_cast<std::size_t>(m.rows());

    for (Eigen::Index i = 0; i < s.right_vectors.rows(); ++i) {
        Eigen::Index arg = 0;
        s.right_vectors.row(i).cwiseAbs().maxCoeff(&arg);
        if (s.right_vectors(i, arg) < 0.0) {
            s.right_vectors.row(i) *= -1.0;
            s.left_vectors.col(i) *= -1.0;
        }
    }

    const double largest = s.singular_values.size() ? s.singular_values(0) : 0.0;
    s.rank_cutoff = tol.relative_threshold * largest * static_cast<double>(std::max(m.rows(), m.cols()));
    s.numerical_rank = 0;
    for (Eigen::Index i = 0; i < s.singular_values.size(); ++i)
        if (s.singular_values(i) > s.rank_cutoff) ++s.numerical_rank;
    return s;
}

inline Spectrum decompose(const DataMatrix& m, const RankTolerance& tol = RankTolerance{}) {
    return decompose(m.values(), tol);
}

/// D x N Moore-Penrose pseudoinverse V D^+ U^T assembled from a spectrum.
inline Eigen::MatrixXd pseudoinverse(const Spectrum& s) {
    const auto r = static_cast<Eigen::Index>(s.numerical_rank);
    const Eigen::VectorXd inv = s.singular_values.head(r).cwiseInverse();
    return s.right_vectors.topRows(r).transpose() * inv.asDiagonal() * s.left_vectors.leftCols(r).transpose();
}

/// Minimum-norm least-squares solution from a precomputed spectrum of X.
inline Regressor pinv_solve(const Spectrum& spec_x, const TargetVector& y) {
    if (static_cast<std::size_t>(spec_x.left_vectors.rows()) != y.size())
        throw ContractError("target length does not match the number of training rows");
    const auto r = static_cast<Eigen::Index>(spec_x.numerical_rank);
    const Eigen::VectorXd coeffs =
        (spec_x.left_vectors.leftCols(r).transpose() * y.values()).cwiseQuotient(spec_x.singular_values.head(r));
    return Regressor(spec_x.right_vectors.topRows(r).transpose() * coeffs);
}

/// w_hat = X^+ y.
inline Regressor pinv_solve(const DataMatrix& x, const TargetVector& y, const RankTolerance& tol = RankTolerance{}) {
    if (x.rows() != y.size()) throw ContractError("target length does not match the number of training rows");
    return pinv_solve(decompose(x, tol), y);
}

/// Throws unless the rows of `basis` are orthonormal within 1e-8.
inline void require_orthonormal_rows(const Eigen::Ref<const Eigen::MatrixXd>& basis) {
    if (basis.rows() == 0) return;
    const Eigen::MatrixXd gram = basis * basis.transpose();
    const double err = (gram - Eigen::MatrixXd::Identity(basis.rows(), basis.rows())).cwiseAbs().maxCoeff();
    if (!(err <= 1e-8)) throw ContractError("projection basis is not orthonormal");
}

/// w - sum_{e in basis} <w, e> e, with the basis given as rows.
inline Regressor project_out(const Regressor& w, const Eigen::Ref<const Eigen::MatrixXd>& basis) {
    if (basis.rows() == 0) return w;
    if (static_cast<std::size_t>(basis.cols()) != w.size())
        throw ContractError("projection basis dimension does not match regressor length");
    require_orthonormal_rows(basis);
    Eigen::VectorXd out = w.weights();
    // second sweep removes what rounding left behind in the first
    for (int sweep = 0; sweep < 2; ++sweep) out -= basis.transpose() * (basis * out);
    return Regressor(std::move(out));
}

}  // namespace spar

#endif  // SPAR_SPECTRAL_HPP
