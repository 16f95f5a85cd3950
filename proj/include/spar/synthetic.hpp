#ifndef SPAR_SYNTHETIC_HPP
#define SPAR_SYNTHETIC_HPP

// Two-dimensional Gaussian covariate-shift experiments and their summary table.

#include <Eigen/Dense>
#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "spar/adapt.hpp"
#include "spar/errors.hpp"
#include "spar/matrixio.hpp"
#include "spar/riskmodel.hpp"
#include "spar/rng.hpp"
#include "spar/spectral.hpp"

namespace spar::synth {

/// Diagonal Gaussian source/target laws with a shared labeling vector.
struct SyntheticConfig {
    std::size_t n_train = 0;
    std::size_t n_test = 0;
    std::vector<double> var_x;
    std::vector<double> var_z;
    Eigen::VectorXd w_star;
    double sigma2 = 1.0;
    std::uint64_t seed = 0;

    void validate() const {
        if (n_train < 1 || n_test < 1) throw ContractError("synthetic config needs n_train >= 1 and n_test >= 1");
        const auto d = static_cast<std::size_t>(w_star.size());
        if (d < 1 || var_x.size() != d || var_z.size() != d)
            throw ContractError("synthetic config: var_x, var_z and w_star must share one dimension");
        for (const double v : var_x)
            if (!(v >= 0.0)) throw ContractError("synthetic config: variances must be >= 0");
        for (const double v : var_z)
            if (!(v >= 0.0)) throw ContractError("synthetic config: variances must be >= 0");
        if (!(sigma2 >= 0.0)) throw ContractError("synthetic config: sigma2 must be >= 0");
    }
};

struct SyntheticData {
    DataMatrix x;
    TargetVector y;
    DataMatrix z;
    TargetVector y_z;
};

/// Draws X, then Z, then the label noise from one stream seeded by cfg.seed.
/// Configs that share (seed, n_train, n_test, D) therefore share the same
/// underlying standard normals and differ only by scaling.
inline SyntheticData generate(const SyntheticConfig& cfg) {
    cfg.validate();
    GaussianStream rng(cfg.seed);
    const auto d = static_cast<Eigen::Index>(cfg.w_star.size());
    const auto n = static_cast<Eigen::Index>(cfg.n_train);
    const auto m = static_cast<Eigen::Index>(cfg.n_test);

    Eigen::MatrixXd x = rng.matrix(n, d);
    Eigen::MatrixXd z = rng.matrix(m, d);
    const Eigen::VectorXd eps = rng.vector(n);
    for (Eigen::Index c = 0; c < d; ++c) {
        x.col(c) *= std::sqrt(cfg.var_x[static_cast<std::size_t>(c)]);
        z.col(c) *= std::sqrt(cfg.var_z[static_cast<std::size_t>(c)]);
    }
    Eigen::VectorXd y = x * cfg.w_star;
    if (cfg.sigma2 > 0.0) y += std::sqrt(cfg.sigma2) * eps;
    Eigen::VectorXd y_z = z * cfg.w_star;
    return {DataMatrix(std::move(x)), TargetVector(std::move(y)), DataMatrix(std::move(z)), TargetVector(std::move(y_z))};
}

// Sample sizes and noise level for the preset experiments.
inline constexpr std::size_t kPresetRows = 4000;
inline constexpr double kPresetSigma2 = 1.0;
inline constexpr double kPresetAlpha = 0.999;

/// Labeling vector used by preset experiment 1..4.
inline Eigen::VectorXd preset_labeling(int experiment) {
    switch (experiment) {
        case 1: return Eigen::Vector2d(0.01, 0.99999995);
        case 2: return Eigen::Vector2d(0.9999995, 0.01);
        case 3:
        case 4: return Eigen::Vector2d(1.0 / std::sqrt(5.0), 2.0 / std::sqrt(5.0));
        default: throw ContractError("experiment must be 1, 2, 3 or 4");
    }
}

/// Experiments 1-3 shift from variances (5, 1e-5) to (1, 40); experiment 4 has
/// no shift, both sides use (1, 40).
inline SyntheticConfig preset(int experiment, std::uint64_t seed) {
    SyntheticConfig cfg;
    cfg.w_star = preset_labeling(experiment);
    cfg.n_train = kPresetRows;
    cfg.n_test = kPresetRows;
    cfg.var_x = experiment == 4 ? std::vector<double>{1.0, 40.0} : std::vector<double>{5.0, 1e-5};
    cfg.var_z = {1.0, 40.0};
    cfg.sigma2 = kPresetSigma2;
    cfg.seed = seed;
    return cfg;
}

inline SyntheticConfig config_from_json(const nlohmann::json& j) {
    try {
        SyntheticConfig cfg;
        cfg.n_train = j.at("n_train").get<std::size_t>();
        cfg.n_test = j.at("n_test").get<std::size_t>();
        cfg.var_x = j.at("var_x").get<std::vector<double>>();
        cfg.var_z = j.at("var_z").get<std::vector<double>>();
        const auto w = j.at("w_star").get<std::vector<double>>();
        cfg.w_star = Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
        cfg.sigma2 = j.at("sigma2").get<double>();
        cfg.seed = j.value("seed", std::uint64_t{0});
        cfg.validate();
        return cfg;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("invalid synthetic config: ") + e.what());
    }
}

inline SyntheticConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    try {
        return config_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError("'" + path.string() + "' is not valid JSON: " + e.what());
    }
}

/// Pairwise (cascade) summation; fixed association order for a given length.
inline double pairwise_sum(std::span<const double> v) {
    if (v.size() <= 8) {
        double s = 0.0;
        for (const double x : v) s += x;
        return s;
    }
    const auto half = v.size() / 2;
    return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

struct Summary {
    double mean = 0.0;
    double std = 0.0;  ///< sample standard deviation (n - 1), zero for one value
    std::size_t count = 0;
};

inline Summary summarize(std::span<const double> v) {
    Summary s;
    s.count = v.size();
    if (v.empty()) return s;
    s.mean = pairwise_sum(v) / static_cast<double>(v.size());
    if (v.size() > 1) {
        std::vector<double> sq(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) sq[i] = (v[i] - s.mean) * (v[i] - s.mean);
        s.std = std::sqrt(pairwise_sum(sq) / static_cast<double>(v.size() - 1));
    }
    return s;
}

struct SeedOutcome {
    std::uint64_t seed = 0;
    double erm = 0.0;
    double pcr = 0.0;
    double spar = 0.0;
    double erm_closed_form = 0.0;  ///< expected ERM loss at the true noise level
    std::vector<std::size_t> spar_selected;
};

/// Squared test error of ERM, PCR(k=1) and ERM+SpAR on one draw.
inline SeedOutcome evaluate(const SyntheticConfig& cfg, double alpha = kPresetAlpha) {
    const auto data = generate(cfg);
    const RankTolerance tol{};
    const Spectrum spec_x = decompose(data.x, tol);
    const Spectrum spec_z = decompose(data.z, tol);

    SeedOutcome out;
    out.seed = cfg.seed;
    const Regressor w_hat = pinv_solve(spec_x, data.y);
    out.erm = squared_error(data.z, data.y_z, w_hat);
    out.pcr = squared_error(data.z, data.y_z, pcr_fit(data.x, data.y, 1, tol));
    const auto report = spar_adapt(data.x, data.y, data.z, Alpha(alpha), tol);
    out.spar = squared_error(data.z, data.y_z, report.weights_spar);
    out.spar_selected = report.selection.indices;
    out.erm_closed_form = ols_ood_risk(spec_x, spec_z, NoiseModel(cfg.sigma2));
    return out;
}

struct ExperimentResult {
    std::string label;
    std::vector<SeedOutcome> outcomes;

    std::vector<double> column(double SeedOutcome::*field) const {
        std::vector<double> v;
        v.reserve(outcomes.size());
        for (const auto& o : outcomes) v.push_back(o.*field);
        return v;
    }
    Summary erm() const { return summarize(column(&SeedOutcome::erm)); }
    Summary pcr() const { return summarize(column(&SeedOutcome::pcr)); }
    Summary spar() const { return summarize(column(&SeedOutcome::spar)); }
    Summary erm_closed_form() const { return summarize(column(&SeedOutcome::erm_closed_form)); }
};

/// Runs `base` with seeds base.seed, base.seed + 1, ...
inline ExperimentResult run_config(const SyntheticConfig& base, std::size_t seeds, std::string label) {
    if (seeds < 1) throw ContractError("need at least one seed");
    ExperimentResult r{std::move(label), {}};
    for (std::size_t s = 0; s < seeds; ++s) {
        auto cfg = base;
        cfg.seed = base.seed + s;
        r.outcomes.push_back(evaluate(cfg));
    }
    return r;
}

inline ExperimentResult run_experiment(int experiment, std::size_t seeds, std::uint64_t first_seed = 0) {
    return run_config(preset(experiment, first_seed), seeds, std::to_string(experiment));
}

inline std::vector<ExperimentResult> run_table1(std::size_t seeds, std::uint64_t first_seed = 0) {
    std::vector<ExperimentResult> out;
    for (int e = 1; e <= 4; ++e) out.push_back(run_experiment(e, seeds, first_seed));
    return out;
}

/// CSV with columns experiment,method,mean,std,seeds.
inline std::string format_table(std::span<const ExperimentResult> results) {
    std::ostringstream os;
    os << "experiment,method,mean,std,seeds\n";
    for (const auto& r : results) {
        const auto row = [&](const char* method, const Summary& s) {
            os << r.label << ',' << method << ',' << io::format_real(s.mean) << ',' << io::format_real(s.std) << ','
               << s.count << '\n';
        };
        row("ERM", r.erm());
        row("PCR", r.pcr());
        row("ERM+SpAR", r.spar());
        row("ERM_closed_form", r.erm_closed_form());
    }
    return os.str();
}

}  // namespace spar::synth

#endif  // SPAR_SYNTHETIC_HPP
