#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <algorithm>
#include <numeric>
#include <random>

#include "spar/rng.hpp"
#include "spar/spectral.hpp"

using spar::DataMatrix;
using spar::Regressor;
using spar::TargetVector;

namespace {

Eigen::MatrixXd reconstruct(const spar::Spectrum& s) {
    return s.left_vectors * s.singular_values.asDiagonal() * s.right_vectors;
}

}  // namespace

TEST(Decompose, Identity) {
    const auto s = spar::decompose(DataMatrix(Eigen::MatrixXd::Identity(2, 2)));
    EXPECT_EQ(s.singular_values, Eigen::Vector2d(1.0, 1.0));
    EXPECT_EQ(s.numerical_rank, 2u);
}

TEST(Decompose, RankOne) {
    Eigen::Matrix2d m;
    m << 3, 0, 0, 0;
    const auto s = spar::decompose(DataMatrix(m));
    EXPECT_DOUBLE_EQ(s.singular_values(0), 3.0);
    EXPECT_DOUBLE_EQ(s.singular_values(1), 0.0);
    EXPECT_EQ(s.numerical_rank, 1u);
    EXPECT_FALSE(s.is_positive(1));
}

TEST(Decompose, ZeroMatrixHasRankZero) {
    const auto s = spar::decompose(DataMatrix(Eigen::MatrixXd::Zero(3, 2)));
    EXPECT_EQ(s.numerical_rank, 0u);
}

TEST(Decompose, TypeInvariantsOnRandomShapes) {
    spar::GaussianStream rng(11);
    for (const auto [n, d] : {std::pair{5, 3}, std::pair{3, 5}, std::pair{20, 6}, std::pair{1, 4}, std::pair{6, 1}}) {
        const Eigen::MatrixXd m = rng.matrix(n, d) * 3.0;
        const auto s = spar::decompose(m);
        const auto k = std::min(n, d);
        ASSERT_EQ(s.size(), static_cast<std::size_t>(k));
        EXPECT_EQ(s.sample_count, static_cast<std::size_t>(n));
        for (Eigen::Index i = 0; i + 1 < k; ++i) EXPECT_GE(s.singular_values(i), s.singular_values(i + 1));
        EXPECT_GE(s.singular_values.minCoeff(), 0.0);
        const Eigen::MatrixXd gram = s.right_vectors * s.right_vectors.transpose();
        EXPECT_LE((gram - Eigen::MatrixXd::Identity(k, k)).cwiseAbs().maxCoeff(), 1e-10);
        EXPECT_LE((m - reconstruct(s)).norm(), 1e-8 * std::max(1.0, m.norm()));
        // sign convention: largest-magnitude entry of each right vector is positive
        for (Eigen::Index i = 0; i < k; ++i) {
            Eigen::Index arg = 0;
            s.right_vectors.row(i).cwiseAbs().maxCoeff(&arg);
            EXPECT_GT(s.right_vectors(i, arg), 0.0);
        }
    }
}

TEST(Decompose, RowPermutationInvariance) {
    spar::GaussianStream rng(3);
    const Eigen::MatrixXd m = rng.matrix(9, 4);
    std::vector<int> order(9);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937 shuffle_gen(5);
    std::shuffle(order.begin(), order.end(), shuffle_gen);
    Eigen::MatrixXd permuted(9, 4);
    for (int i = 0; i < 9; ++i) permuted.row(i) = m.row(order[static_cast<std::size_t>(i)]);
    const auto a = spar::decompose(m);
    const auto b = spar::decompose(permuted);
    EXPECT_LE((a.singular_values - b.singular_values).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Decompose, RejectsNonFinite) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Ones(2, 2);
    m(0, 1) = INFINITY;
    EXPECT_THROW(spar::decompose(m), spar::DomainError);
}

TEST(PinvSolve, IdentitySystem) {
    const auto w = spar::pinv_solve(DataMatrix(Eigen::MatrixXd::Identity(2, 2)), TargetVector(Eigen::Vector2d(3, 5)));
    EXPECT_NEAR(w.weights()(0), 3.0, 1e-15);
    EXPECT_NEAR(w.weights()(1), 5.0, 1e-15);
}

TEST(PinvSolve, DegenerateGivesMinimumNorm) {
    Eigen::Matrix2d x;
    x << 1, 0, 0, 0;
    const auto w = spar::pinv_solve(DataMatrix(x), TargetVector(Eigen::Vector2d(2, 7)));
    EXPECT_NEAR(w.weights()(0), 2.0, 1e-15);
    EXPECT_EQ(w.weights()(1), 0.0);
}

TEST(PinvSolve, MatchesNormalEquationsOnFullRank) {
    spar::GaussianStream rng(21);
    const Eigen::MatrixXd x = rng.matrix(20, 4);
    const Eigen::VectorXd y = rng.vector(20);
    const auto w = spar::pinv_solve(DataMatrix(x), TargetVector(y));
    // oracle: Cholesky on the normal equations
    const Eigen::VectorXd expected = (x.transpose() * x).ldlt().solve(x.transpose() * y);
    EXPECT_LE((w.weights() - expected).norm(), 1e-8 * expected.norm());
    EXPECT_LE((x.transpose() * (x * w.weights() - y)).norm(), 1e-8 * x.norm() * y.norm());
}

TEST(PinvSolve, NoiselessRecoveryInRowSpan) {
    spar::GaussianStream rng(8);
    // rank-2 X in R^5; w* built from its rows
    const Eigen::MatrixXd x = rng.matrix(12, 2) * rng.matrix(2, 5);
    const Eigen::VectorXd w_star = x.transpose() * rng.vector(12);
    const auto w = spar::pinv_solve(DataMatrix(x), TargetVector(x * w_star));
    EXPECT_LE((w.weights() - w_star).norm(), 1e-8 * w_star.norm());
}

TEST(PinvSolve, DimensionMismatch) {
    EXPECT_THROW(spar::pinv_solve(DataMatrix(Eigen::MatrixXd::Identity(3, 2)), TargetVector(Eigen::Vector2d(1, 2))),
                 spar::ContractError);
}

TEST(ProjectOut, EmptyBasisIsIdentity) {
    const Regressor w(Eigen::Vector3d(1, 2, 3));
    EXPECT_TRUE(spar::project_out(w, Eigen::MatrixXd(0, 3)) == w);
}

TEST(ProjectOut, FullBasisGivesZero) {
    spar::GaussianStream rng(4);
    const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(rng.matrix(4, 4)).householderQ();
    const auto out = spar::project_out(Regressor(rng.vector(4)), q.transpose());
    EXPECT_LE(out.weights().norm(), 1e-14);
}

TEST(ProjectOut, SimpleCase) {
    const auto out = spar::project_out(Regressor(Eigen::Vector2d(1, 1)), Eigen::RowVector2d(0, 1));
    EXPECT_EQ(out.weights(), Eigen::Vector2d(1, 0));
}

TEST(ProjectOut, OrthogonalityAndIdempotenceProperty) {
    spar::GaussianStream rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        const Eigen::Index d = 2 + trial % 7;
        const Eigen::Index k = trial % (d + 1);
        const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(rng.matrix(d, d)).householderQ();
        const Eigen::MatrixXd basis = q.leftCols(k).transpose();
        const Regressor w(rng.vector(d) * 10.0);
        const auto once = spar::project_out(w, basis);
        const auto twice = spar::project_out(once, basis);
        if (k > 0) EXPECT_LE((basis * once.weights()).cwiseAbs().maxCoeff(), 1e-10);
        EXPECT_LE((once.weights() - twice.weights()).cwiseAbs().maxCoeff(), 1e-12);
        // the removed part lies in span(basis)
        const Eigen::VectorXd removed = w.weights() - once.weights();
        const Eigen::VectorXd in_span = basis.transpose() * (basis * removed);
        EXPECT_LE((removed - in_span).norm(), 1e-10 * std::max(1.0, w.weights().norm()));
    }
}

TEST(ProjectOut, ContractViolations) {
    Eigen::MatrixXd not_unit(1, 2);
    not_unit << 1, 1;
    EXPECT_THROW(spar::project_out(Regressor(Eigen::Vector2d(1, 1)), not_unit), spar::ContractError);
    Eigen::MatrixXd not_orth(2, 2);
    not_orth << 1, 0, 1, 0;
    EXPECT_THROW(spar::project_out(Regressor(Eigen::Vector2d(1, 1)), not_orth), spar::ContractError);
    EXPECT_THROW(spar::project_out(Regressor(Eigen::Vector2d(1, 1)), Eigen::RowVector3d(1, 0, 0)),
                 spar::ContractError);
}

TEST(RankTolerance, Threshold) {
    Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
    m(0, 0) = 1.0;
    m(1, 1) = 1e-11;
    m(2, 2) = 1e-13;
    // cutoff = 1e-12 * 1 * 3
    const auto s = spar::decompose(DataMatrix(m));
    EXPECT_EQ(s.numerical_rank, 2u);
    EXPECT_EQ(spar::decompose(DataMatrix(m), spar::RankTolerance(0.0)).numerical_rank, 3u);
    EXPECT_THROW(spar::RankTolerance(-1.0), spar::DomainError);
}
