// spar: command line front end for spectrally adapted regression.
//
//   spar adapt    --train X.csv --targets y.csv --test Z.csv --out report.json
//   spar diagnose --train X.csv --targets y.csv --test Z.csv --out profile.csv
//   spar synth    --experiment 2 --seeds 10 --out table.csv
//   spar verify   --trials 100000 --seed 1
//
// Exit status: 0 success, 1 a verification check failed, 2 usage or input error.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "spar/spar.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kVerifyFailed = 1;
constexpr int kUsage = 2;

struct InputFlags {
    std::string train;
    std::string targets;
    std::string test;
    bool header = false;
    double rank_tol = 1e-12;
    std::optional<double> sigma2;
};

void add_input_flags(CLI::App& cmd, InputFlags& f) {
    cmd.add_option("--train", f.train, "source representations, one sample per row")->required();
    cmd.add_option("--targets", f.targets, "source labels, one per line")->required();
    cmd.add_option("--test", f.test, "target representations, one sample per row")->required();
    cmd.add_flag("--header", f.header, "train/test files start with a header line");
    cmd.add_option("--rank-tol", f.rank_tol, "relative singular value threshold")->capture_default_str();
    cmd.add_option("--sigma2", f.sigma2, "known label noise variance (default: maximum-likelihood estimate)");
}

int run_adapt(const InputFlags& f, double alpha, const std::string& out) {
    const auto x = spar::io::load_matrix(f.train, f.header);
    const auto y = spar::io::load_targets(f.targets);
    const auto z = spar::io::load_matrix(f.test, f.header);
    const auto report = spar::spar_adapt(x, y, z, {spar::Alpha(alpha), spar::RankTolerance(f.rank_tol), f.sigma2});
    spar::io::save_report(report, out);
    std::cout << "selected " << report.selection.size() << " of " << report.ledger.size()
              << " target directions; report written to " << out << '\n';
    if (report.source_rank < x.cols())
        std::cout << "note: training matrix is rank deficient (rank " << report.source_rank << " < " << x.cols()
                  << "), using the minimum-norm solution\n";
    return kOk;
}

int run_diagnose(const InputFlags& f, const std::string& out) {
    const auto x = spar::io::load_matrix(f.train, f.header);
    const auto y = spar::io::load_targets(f.targets);
    const auto z = spar::io::load_matrix(f.test, f.header);
    const spar::RankTolerance tol(f.rank_tol);
    const auto spec_x = spar::decompose(x, tol);
    const auto spec_z = spar::decompose(z, tol);
    const auto w_hat = spar::pinv_solve(spec_x, y);
    const double sigma2 = f.sigma2 ? *f.sigma2 : spar::mle_sigma2(x, y, w_hat);
    const auto profile = spar::inflation_profile(spec_x, spec_z, spar::NoiseModel(sigma2));

    std::ostringstream os;
    os << "j,lambda_z_sq,normalized_var\n";
    for (const auto& p : profile)
        os << p.j << ',' << spar::io::format_real(p.lambda_z_sq) << ',' << spar::io::format_real(p.normalized_var)
           << '\n';
    spar::io::write_text(out, os.str());
    return kOk;
}

int run_synth(int experiment, const std::string& config, std::size_t seeds, std::uint64_t first_seed,
              const std::string& out, const std::string& emit_dir) {
    spar::synth::SyntheticConfig base;
    std::string label;
    if (!config.empty()) {
        base = spar::synth::load_config(config);
        label = "config";
    } else {
        base = spar::synth::preset(experiment, first_seed);
        label = std::to_string(experiment);
    }

    if (!emit_dir.empty()) {
        const auto data = spar::synth::generate(base);
        const std::filesystem::path dir(emit_dir);
        std::filesystem::create_directories(dir);
        spar::io::save_matrix(data.x, dir / "train.csv");
        spar::io::save_targets(data.y, dir / "targets.csv");
        spar::io::save_matrix(data.z, dir / "test.csv");
        spar::io::save_targets(data.y_z, dir / "test_targets.csv");
    }
    if (out.empty()) return kOk;

    const auto result = spar::synth::run_config(base, seeds, label);
    spar::io::write_text(out, spar::synth::format_table(std::span(&result, 1)));
    std::cout << "experiment " << label << ": ERM " << result.erm().mean << ", PCR " << result.pcr().mean
              << ", ERM+SpAR " << result.spar().mean << " (mean squared error over " << seeds << " seeds)\n";
    return kOk;
}

int run_verify(std::size_t trials, std::uint64_t seed) {
    const auto report = spar::verify::verify_theorems(trials, seed);
    for (const auto& c : report.checks)
        std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
    return report.all_passed() ? kOk : kVerifyFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spectrally adapted least-squares regression under covariate shift"};
    app.require_subcommand(1);

    InputFlags adapt_in;
    double alpha = spar::Alpha::kDefault;
    std::string adapt_out;
    auto* adapt = app.add_subcommand("adapt", "fit OLS on source data and project out inflated target directions");
    add_input_flags(*adapt, adapt_in);
    adapt->add_option("--alpha", alpha, "rejection confidence in [0, 1)")->capture_default_str();
    adapt->add_option("--out", adapt_out, "report JSON path")->required();

    InputFlags diag_in;
    std::string diag_out;
    auto* diagnose = app.add_subcommand("diagnose", "per-direction spectral inflation profile");
    add_input_flags(*diagnose, diag_in);
    diagnose->add_option("--out", diag_out, "profile CSV path")->required();

    int experiment = 0;
    std::string config;
    std::size_t seeds = 10;
    std::uint64_t first_seed = 0;
    std::string synth_out;
    std::string emit_dir;
    auto* synth = app.add_subcommand("synth", "run a synthetic covariate-shift experiment");
    auto* exp_opt = synth->add_option("--experiment", experiment, "preset experiment")->check(CLI::Range(1, 4));
    auto* cfg_opt = synth->add_option("--config", config, "JSON synthetic config instead of a preset");
    exp_opt->excludes(cfg_opt);
    synth->add_option("--seeds", seeds, "number of seeds")->capture_default_str()->check(CLI::PositiveNumber);
    synth->add_option("--seed", first_seed, "first seed (presets only)")->capture_default_str();
    synth->add_option("--out", synth_out, "table CSV path");
    synth->add_option("--emit-data", emit_dir, "also write the first seed's matrices to this directory");

    std::size_t trials = 100000;
    std::uint64_t verify_seed = 1;
    auto* verify = app.add_subcommand("verify", "Monte Carlo verification of the risk decomposition");
    verify->add_option("--trials", trials, "noise draws per estimate")->capture_default_str();
    verify->add_option("--seed", verify_seed, "seed")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*adapt) return run_adapt(adapt_in, alpha, adapt_out);
        if (*diagnose) return run_diagnose(diag_in, diag_out);
        if (*synth) {
            if (experiment == 0 && config.empty()) {
                std::cerr << "synth: one of --experiment or --config is required\n";
                return kUsage;
            }
            if (synth_out.empty() && emit_dir.empty()) {
                std::cerr << "synth: nothing to do, give --out and/or --emit-data\n";
                return kUsage;
            }
            return run_synth(experiment, config, seeds, first_seed, synth_out, emit_dir);
        }
        if (*verify) return run_verify(trials, verify_seed);
    } catch (const spar::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    }
    return kUsage;
}
