#ifndef SPAR_VERIFY_HPP
#define SPAR_VERIFY_HPP

// Monte Carlo checks of the closed-form risk decomposition and of the
// selection-rule probabilities. The simulated side refits the regressor with a
// complete orthogonal decomposition, independent of the SVD path under test.

#include <Eigen/Dense>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "spar/adapt.hpp"
#include "spar/errors.hpp"
#include "spar/matrixio.hpp"
#include "spar/riskmodel.hpp"
#include "spar/rng.hpp"
#include "spar/spectral.hpp"
#include "spar/statfun.hpp"

namespace spar::verify {

/// A random problem with known truth: source X, target Z, labeling vector w*, noise sigma^2.
struct Instance {
    Eigen::MatrixXd x;
    Eigen::MatrixXd z;
    Eigen::VectorXd w_star;
    double sigma2 = 0.0;
    Spectrum spec_x;
    Spectrum spec_z;

    std::size_t dim() const noexcept { return static_cast<std::size_t>(x.cols()); }
};

inline Instance make_instance(Eigen::MatrixXd x, Eigen::MatrixXd z, Eigen::VectorXd w_star, double sigma2) {
    Instance inst{std::move(x), std::move(z), std::move(w_star), sigma2, {}, {}};
    inst.spec_x = decompose(inst.x);
    inst.spec_z = decompose(inst.z);
    return inst;
}

/// Anisotropic Gaussian X, and a Z whose axes are scaled differently and then
/// mixed, so that source and target eigenvectors are not aligned.
inline Instance random_instance(GaussianStream& rng, std::size_t d, std::size_t n, std::size_t m, double sigma2) {
    const auto dd = static_cast<Eigen::Index>(d);
    Eigen::MatrixXd x = rng.matrix(static_cast<Eigen::Index>(n), dd);
    Eigen::MatrixXd z = rng.matrix(static_cast<Eigen::Index>(m), dd);
    for (Eigen::Index c = 0; c < dd; ++c) {
        x.col(c) *= std::exp(2.0 * rng.uniform() - 1.0);
        z.col(c) *= std::exp(3.0 * rng.uniform() - 1.5);
    }
    const Eigen::MatrixXd mix = Eigen::MatrixXd::Identity(dd, dd) + 0.5 * rng.matrix(dd, dd);
    z = z * mix;
    Eigen::VectorXd w = rng.vector(dd);
    return make_instance(std::move(x), std::move(z), std::move(w), sigma2);
}

struct Estimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t draws = 0;
};

/// Empirical E||Y_Z - Z w||^2 for w = w_hat with the rows of `basis` projected out,
/// over fresh label noise.
inline Estimate simulate_projected_loss(const Instance& inst, const Eigen::MatrixXd& basis, std::size_t draws,
                                        GaussianStream& rng) {
    const Eigen::MatrixXd pinv = inst.x.completeOrthogonalDecomposition().pseudoInverse();
    const Eigen::VectorXd clean = inst.x * inst.w_star;
    const Eigen::VectorXd target = inst.z * inst.w_star;
    const double sigma = std::sqrt(inst.sigma2);
    Eigen::VectorXd y(clean.size());
    Eigen::VectorXd w(inst.w_star.size());
    Eigen::VectorXd resid(target.size());
    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::size_t t = 0; t < draws; ++t) {
        for (Eigen::Index i = 0; i < y.size(); ++i) y(i) = clean(i) + sigma * rng.next();
        w.noalias() = pinv * y;
        if (basis.rows() > 0) w -= basis.transpose() * (basis * w);
        resid = target;
        resid.noalias() -= inst.z * w;
        const double loss = resid.squaredNorm();
        sum += loss;
        sum_sq += loss * loss;
    }
    const double n = static_cast<double>(draws);
    const double mean = sum / n;
    const double var = draws > 1 ? std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0)) : 0.0;
    return {mean, std::sqrt(var / n), draws};
}

inline double relative_gap(double theory, double empirical) {
    if (theory == 0.0) return empirical == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return std::abs(empirical - theory) / std::abs(theory);
}

struct RiskComparison {
    std::size_t dim = 0;
    std::vector<std::size_t> subset;
    double theory = 0.0;
    Estimate empirical;
    double gap = 0.0;  ///< |empirical - theory| / theory
};

struct RiskStudy {
    std::vector<RiskComparison> cases;

    double max_gap() const {
        double g = 0.0;
        for (const auto& c : cases) g = std::max(g, c.gap);
        return g;
    }
    /// Largest standard error relative to the closed form, over all cases.
    double max_relative_se() const {
        double s = 0.0;
        for (const auto& c : cases)
            if (c.theory > 0.0) s = std::max(s, c.empirical.std_error / c.theory);
        return s;
    }
};

struct StudyParams {
    std::size_t instances = 20;
    std::size_t n = 50;
    std::size_t m = 40;
    double sigma2 = 0.25;
    std::size_t draws = 100000;
    std::uint64_t seed = 1;
};

/// Dimension of the i-th study instance: cycles through 2..6.
inline std::size_t study_dim(std::size_t i) { return 2 + i % 5; }

/// Closed-form OOD risk of w_hat against simulation.
inline RiskStudy study_ols_risk(const StudyParams& p) {
    GaussianStream rng(p.seed);
    RiskStudy study;
    for (std::size_t i = 0; i < p.instances; ++i) {
        const auto inst = random_instance(rng, study_dim(i), p.n, p.m, p.sigma2);
        RiskComparison c;
        c.dim = inst.dim();
        c.theory = ols_ood_risk(inst.spec_x, inst.spec_z, NoiseModel(inst.sigma2));
        c.empirical = simulate_projected_loss(inst, Eigen::MatrixXd(0, inst.dim()), p.draws, rng);
        c.gap = relative_gap(c.theory, c.empirical.mean);
        study.cases.push_back(std::move(c));
    }
    return study;
}

/// Closed-form risk of w_hat with a random subset of target eigenvectors
/// projected out, against simulation.
inline RiskStudy study_projected_risk(const StudyParams& p) {
    GaussianStream rng(p.seed);
    RiskStudy study;
    for (std::size_t i = 0; i < p.instances; ++i) {
        const auto inst = random_instance(rng, study_dim(i), p.n, p.m, p.sigma2);
        std::vector<std::size_t> subset;
        for (std::size_t j = 0; j < inst.spec_z.size(); ++j)
            if (rng.uniform() < 0.5) subset.push_back(j);
        const auto sel = make_selection(inst.spec_z, subset);
        RiskComparison c;
        c.dim = inst.dim();
        c.subset = subset;
        c.theory = projected_risk(inst.spec_x, inst.spec_z, NoiseModel(inst.sigma2), Regressor(inst.w_star), subset).total;
        c.empirical = simulate_projected_loss(inst, sel.vectors, p.draws, rng);
        c.gap = relative_gap(c.theory, c.empirical.mean);
        study.cases.push_back(std::move(c));
    }
    return study;
}

struct DominanceStudy {
    std::size_t instances = 0;
    std::size_t subsets_checked = 0;
    std::size_t nontrivial_oracles = 0;  ///< instances whose S* is neither empty nor everything
    double min_margin = std::numeric_limits<double>::infinity();  ///< min over S of risk(S) - risk(S*)
};

/// Exhaustive comparison of risk(S*) with every subset S at dimension d.
/// Noise is set per instance so that variance and bias losses are comparable.
inline DominanceStudy study_oracle_dominance(std::size_t instances, std::size_t d, std::uint64_t seed,
                                             std::size_t n = 50, std::size_t m = 40) {
    if (d > 20) throw ContractError("exhaustive subset enumeration is limited to d <= 20");
    GaussianStream rng(seed);
    DominanceStudy out;
    out.instances = instances;
    for (std::size_t i = 0; i < instances; ++i) {
        auto inst = random_instance(rng, d, n, m, 1.0);
        const Regressor w_star(inst.w_star);
        const auto unit = projected_risk(inst.spec_x, inst.spec_z, NoiseModel(1.0), w_star, {});
        std::vector<double> ratios;
        for (const auto& e : unit.ledger.entries)
            if (e.var_zj > 0.0) ratios.push_back(*e.bias_zj / e.var_zj);
        std::nth_element(ratios.begin(), ratios.begin() + static_cast<std::ptrdiff_t>(ratios.size() / 2), ratios.end());
        inst.sigma2 = ratios.empty() ? 1.0 : ratios[ratios.size() / 2] * std::exp(rng.uniform() - 0.5);
        const NoiseModel noise(inst.sigma2);

        const auto star = select_oracle(inst.spec_x, inst.spec_z, w_star, inst.sigma2);
        const double best = projected_risk(inst.spec_x, inst.spec_z, noise, w_star, star.indices).total;
        if (!star.empty() && star.size() < inst.spec_z.size()) ++out.nontrivial_oracles;

        const std::size_t k = inst.spec_z.size();
        for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << k); ++mask) {
            std::vector<std::size_t> subset;
            for (std::size_t j = 0; j < k; ++j)
                if (mask >> j & 1U) subset.push_back(j);
            const double r = projected_risk(inst.spec_x, inst.spec_z, noise, w_star, subset).total;
            out.min_margin = std::min(out.min_margin, r - best);
            ++out.subsets_checked;
        }
    }
    return out;
}

/// Instance with Bias_{z,j} / Var_{z,j} equal to `ratio` for direction j.
inline Instance instance_with_ratio(GaussianStream& rng, double ratio, std::size_t j = 0, std::size_t d = 3,
                                    std::size_t n = 50, std::size_t m = 40, double sigma2 = 0.25) {
    auto inst = random_instance(rng, d, n, m, sigma2);
    const Eigen::VectorXd e = inst.spec_z.right(j);
    const double lambda = inst.spec_z.value(j);
    const double var = variance_term(inst.spec_x, e, lambda, NoiseModel(sigma2));
    Eigen::VectorXd w = inst.w_star - inst.w_star.dot(e) * e;
    w += std::sqrt(ratio * var) / lambda * e;
    inst.w_star = w;
    return inst;
}

struct InclusionCase {
    double ratio = 0.0;
    double alpha = 0.0;
    double predicted = 0.0;  ///< inclusion_probability
    double frequency = 0.0;
    double std_error = 0.0;  ///< binomial SE at the predicted probability
    std::size_t draws = 0;

    double z_score() const {
        const double diff = std::abs(frequency - predicted);
        if (std::isnan(diff)) return std::numeric_limits<double>::infinity();
        if (std_error == 0.0) return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
        return diff / std_error;
    }
};

/// Empirical frequency with which select_spar keeps direction j, for each alpha,
/// over fresh label noise at the true sigma^2.
inline std::vector<InclusionCase> simulate_inclusion(const Instance& inst, std::size_t j, double ratio,
                                                     const std::vector<double>& alphas, std::size_t draws,
                                                     GaussianStream& rng) {
    const Eigen::MatrixXd pinv = inst.x.completeOrthogonalDecomposition().pseudoInverse();
    const Eigen::VectorXd clean = inst.x * inst.w_star;
    const double sigma = std::sqrt(inst.sigma2);
    const double var = variance_term(inst.spec_x, inst.spec_z.right(j), inst.spec_z.value(j), NoiseModel(inst.sigma2));
    const double bias = bias_term(Regressor(inst.w_star), inst.spec_z.right(j), inst.spec_z.value(j));

    std::vector<std::size_t> hits(alphas.size(), 0);
    std::vector<Alpha> alpha_values;
    for (const double a : alphas) alpha_values.emplace_back(a);
    Eigen::VectorXd y(clean.size());
    for (std::size_t t = 0; t < draws; ++t) {
        for (Eigen::Index i = 0; i < y.size(); ++i) y(i) = clean(i) + sigma * rng.next();
        const Regressor w_hat(pinv * y);
        for (std::size_t a = 0; a < alphas.size(); ++a) {
            const auto [sel, ledger] = select_spar(inst.spec_x, inst.spec_z, w_hat, inst.sigma2, alpha_values[a]);
            if (ledger[j].selected) ++hits[a];
        }
    }
    std::vector<InclusionCase> out;
    for (std::size_t a = 0; a < alphas.size(); ++a) {
        InclusionCase c;
        c.ratio = ratio;
        c.alpha = alphas[a];
        c.predicted = inclusion_probability(bias, var, alpha_values[a]);
        c.draws = draws;
        c.frequency = static_cast<double>(hits[a]) / static_cast<double>(draws);
        c.std_error = std::sqrt(c.predicted * (1.0 - c.predicted) / static_cast<double>(draws));
        out.push_back(c);
    }
    return out;
}

inline std::vector<InclusionCase> study_inclusion(const std::vector<double>& ratios, const std::vector<double>& alphas,
                                                  std::size_t draws, std::uint64_t seed) {
    GaussianStream rng(seed);
    std::vector<InclusionCase> out;
    for (const double ratio : ratios) {
        const auto inst = instance_with_ratio(rng, ratio);
        auto cases = simulate_inclusion(inst, 0, ratio, alphas, draws, rng);
        out.insert(out.end(), cases.begin(), cases.end());
    }
    return out;
}

struct BiasHatLaw {
    double bias = 0.0;
    double var = 0.0;
    Estimate mean;             ///< sample mean of BiasHat at the nonzero-bias instance
    double ks_statistic = 0.0; ///< KS distance of BiasHat / Var from chi2(1) at zero bias
    std::size_t draws = 0;
};

namespace detail {

inline std::vector<double> sample_bias_hat(const Instance& inst, std::size_t j, std::size_t draws, GaussianStream& rng) {
    const Eigen::MatrixXd pinv = inst.x.completeOrthogonalDecomposition().pseudoInverse();
    const Eigen::VectorXd clean = inst.x * inst.w_star;
    const double sigma = std::sqrt(inst.sigma2);
    const Eigen::VectorXd e = inst.spec_z.right(j);
    const double lambda = inst.spec_z.value(j);
    Eigen::VectorXd y(clean.size());
    std::vector<double> out(draws);
    for (std::size_t t = 0; t < draws; ++t) {
        for (Eigen::Index i = 0; i < y.size(); ++i) y(i) = clean(i) + sigma * rng.next();
        out[t] = bias_hat(Regressor(pinv * y), e, lambda);
    }
    return out;
}

}  // namespace detail

/// Kolmogorov-Smirnov distance between a sample and the chi-squared(1) law.
inline double ks_chi2_df1(std::vector<double> sample) {
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = chi2_df1_cdf(sample[i]);
        d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
    }
    return d;
}

inline BiasHatLaw study_bias_hat_law(std::size_t draws, std::uint64_t seed) {
    GaussianStream rng(seed);
    BiasHatLaw out;
    out.draws = draws;

    const auto inst = instance_with_ratio(rng, 2.0);
    out.var = variance_term(inst.spec_x, inst.spec_z.right(0), inst.spec_z.value(0), NoiseModel(inst.sigma2));
    out.bias = bias_term(Regressor(inst.w_star), inst.spec_z.right(0), inst.spec_z.value(0));
    const auto sample = detail::sample_bias_hat(inst, 0, draws, rng);
    double sum = 0.0;
    double sum_sq = 0.0;
    for (const double v : sample) {
        sum += v;
        sum_sq += v * v;
    }
    const double n = static_cast<double>(draws);
    out.mean.mean = sum / n;
    out.mean.std_error = std::sqrt(std::max(0.0, (sum_sq - n * out.mean.mean * out.mean.mean) / (n - 1.0)) / n);
    out.mean.draws = draws;

    const auto centered = instance_with_ratio(rng, 0.0);
    const double var0 =
        variance_term(centered.spec_x, centered.spec_z.right(0), centered.spec_z.value(0), NoiseModel(centered.sigma2));
    auto null_sample = detail::sample_bias_hat(centered, 0, draws, rng);
    for (auto& v : null_sample) v /= var0;
    out.ks_statistic = ks_chi2_df1(std::move(null_sample));
    return out;
}

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct VerificationReport {
    std::vector<CheckResult> checks;

    bool all_passed() const {
        return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
    }
};

inline constexpr std::size_t kMinTrials = 1000;

/// Runs every check with `trials` noise draws per Monte Carlo estimate.
///
/// Risk checks accept a relative gap up to max(2%, 4 relative standard
/// errors); at 1e5 draws the 2% bound is the binding one.
inline VerificationReport verify_theorems(std::size_t trials, std::uint64_t seed) {
    if (trials < kMinTrials) throw ContractError("verification needs at least 1000 trials");
    VerificationReport report;
    const auto fmt = [](auto&&... parts) {
        std::ostringstream os;
        os.precision(6);
        (os << ... << parts);
        return os.str();
    };

    StudyParams p;
    p.draws = trials;
    p.seed = seed;
    {
        const auto s = study_ols_risk(p);
        const double tol = std::max(0.02, 4.0 * s.max_relative_se());
        report.checks.push_back({"T1 ols risk", s.max_gap() <= tol, fmt("max relative gap ", s.max_gap(), " (tol ", tol, ")")});
    }
    {
        p.seed = seed + 1;
        const auto s = study_projected_risk(p);
        const double tol = std::max(0.02, 4.0 * s.max_relative_se());
        report.checks.push_back(
            {"T2 projected risk", s.max_gap() <= tol, fmt("max relative gap ", s.max_gap(), " (tol ", tol, ")")});
    }
    {
        const auto s = study_oracle_dominance(20, 6, seed + 2);
        report.checks.push_back({"T3 oracle dominance", s.min_margin >= -1e-10,
                                 fmt(s.subsets_checked, " subsets, min margin ", s.min_margin)});
    }
    {
        const auto s = study_bias_hat_law(trials, seed + 3);
        const double gap = std::abs(s.mean.mean - (s.bias + s.var));
        const double ks_tol = std::max(0.01, 1.63 / std::sqrt(static_cast<double>(trials)));
        const bool ok = gap <= 3.0 * s.mean.std_error && s.ks_statistic <= ks_tol;
        report.checks.push_back({"E bias-hat law", ok,
                                 fmt("mean ", s.mean.mean, " vs ", s.bias + s.var, " (", gap / s.mean.std_error,
                                     " SE), KS ", s.ks_statistic, " (tol ", ks_tol, ")")});
    }
    {
        const auto cases = study_inclusion({0.0, 0.25, 1.0, 4.0, 16.0}, {0.5, 0.999}, trials, seed + 4);
        double worst = 0.0;
        for (const auto& c : cases) worst = std::max(worst, c.z_score());
        report.checks.push_back({"P1 inclusion probability", worst <= 3.0, fmt("worst deviation ", worst, " SE")});
    }
    {
        const auto low = study_inclusion({1e-8}, {0.5, 0.999}, trials, seed + 5);
        const auto high = study_inclusion({1e6}, {0.5, 0.999}, trials, seed + 6);
        double worst_low = 0.0;
        double worst_high = 0.0;
        for (const auto& c : low)
            worst_low = std::max(worst_low, std::abs(c.frequency - c.alpha) /
                                                std::sqrt(c.alpha * (1.0 - c.alpha) / static_cast<double>(c.draws)));
        for (const auto& c : high) worst_high = std::max(worst_high, c.frequency);
        report.checks.push_back({"L1 tail limits", worst_low <= 3.0 && worst_high <= 1e-3,
                                 fmt("low-ratio deviation ", worst_low, " SE, high-ratio frequency ", worst_high)});
    }
    return report;
}

}  // namespace spar::verify

#endif  // SPAR_VERIFY_HPP
