// Acceptance suite: one line per criterion, nonzero exit if any criterion fails.

#include <sys/wait.h>

#include <Eigen/Dense>
#include <Eigen/LU>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "spar/spar.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool passed = false;
    std::string detail;
};

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(4);
    os << v;
    return os.str();
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_cli(const std::string& args) {
    const int status = std::system((std::string(SPAR_CLI) + " " + args + " > /dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

constexpr std::uint64_t kSeed = 20240501;

Outcome theorem1() {
    const auto t0 = std::chrono::steady_clock::now();
    spar::verify::StudyParams p;  // 20 instances, D in 2..6, N = 50, M = 40, sigma^2 = 0.25, 1e5 draws
    p.seed = kSeed;
    const auto s = spar::verify::study_ols_risk(p);
    const double secs = seconds_since(t0);
    return {s.max_gap() <= 0.02 && secs <= 60.0,
            "max relative gap " + fmt(s.max_gap()) + " (<= 0.02), " + fmt(secs) + " s (<= 60)"};
}

Outcome theorem2() {
    spar::verify::StudyParams p;
    p.seed = kSeed + 1;
    const auto s = spar::verify::study_projected_risk(p);
    return {s.max_gap() <= 0.02, "max relative gap " + fmt(s.max_gap()) + " (<= 0.02) over random subsets"};
}

Outcome theorem3() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto s = spar::verify::study_oracle_dominance(20, 6, kSeed + 2);
    const double secs = seconds_since(t0);
    const bool ok = s.subsets_checked == 20 * 64 && s.min_margin >= -1e-10 && secs <= 10.0;
    return {ok, std::to_string(s.subsets_checked) + " subsets, min risk(S) - risk(S*) = " + fmt(s.min_margin) +
                    " (>= -1e-10), " + std::to_string(s.nontrivial_oracles) + "/20 nontrivial S*, " + fmt(secs) +
                    " s (<= 10)"};
}

Outcome table_experiment2() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = spar::synth::run_experiment(2, 10);
    const double secs = seconds_since(t0);
    const double spar_m = r.spar().mean, erm_m = r.erm().mean, pcr_m = r.pcr().mean;
    return {spar_m <= 1e2 && erm_m >= 1e4 && pcr_m <= 1e2 && secs <= 10.0,
            "SpAR " + fmt(spar_m) + " (<= 1e2), ERM " + fmt(erm_m) + " (>= 1e4), PCR " + fmt(pcr_m) + " (<= 1e2), " +
                fmt(secs) + " s (<= 10)"};
}

Outcome table_experiment4() {
    const auto r = spar::synth::run_experiment(4, 10);
    bool per_seed = true;
    std::size_t empty = 0;
    for (const auto& o : r.outcomes) {
        if (!o.spar_selected.empty()) continue;
        ++empty;
        if (std::abs(o.spar - o.erm) > 1e-6 * o.erm) per_seed = false;
    }
    const double spar_m = r.spar().mean, erm_m = r.erm().mean, pcr_m = r.pcr().mean;
    const bool ok = per_seed && spar_m <= 1.05 * erm_m && pcr_m >= 100.0 * erm_m;
    return {ok, std::to_string(empty) + "/10 seeds with empty S agree to 1e-6; SpAR " + fmt(spar_m) + " vs ERM " +
                    fmt(erm_m) + " (<= 1.05x); PCR " + fmt(pcr_m) + " (>= 100x ERM)"};
}

Outcome table_experiments1and3() {
    std::string detail;
    bool ok = true;
    for (const int e : {1, 3}) {
        const auto r = spar::synth::run_experiment(e, 10);
        const double s = r.spar().mean, erm = r.erm().mean, pcr = r.pcr().mean;
        const double ratio = std::max(s / pcr, pcr / s);
        ok = ok && s <= 0.5 * erm && ratio <= 3.0;
        detail += "exp " + std::to_string(e) + ": SpAR " + fmt(s) + ", ERM " + fmt(erm) + ", PCR " + fmt(pcr) +
                  " (SpAR/ERM " + fmt(s / erm) + " <= 0.5, SpAR~PCR factor " + fmt(ratio) + " <= 3); ";
    }
    return {ok, detail.substr(0, detail.size() - 2)};
}

Outcome proposition1() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto cases = spar::verify::study_inclusion({0.0, 0.25, 1.0, 4.0, 16.0}, {0.5, 0.999}, 100000, kSeed + 3);
    const double secs = seconds_since(t0);
    double worst = 0.0;
    for (const auto& c : cases) worst = std::max(worst, c.z_score());
    return {cases.size() == 10 && worst <= 3.0 && secs <= 120.0,
            "10 (ratio, alpha) cases, worst |freq - Pr| = " + fmt(worst) + " SE (<= 3), " + fmt(secs) + " s (<= 120)"};
}

Outcome lemma1() {
    const auto low = spar::verify::study_inclusion({1e-8}, {0.5, 0.999}, 100000, kSeed + 4);
    const auto high = spar::verify::study_inclusion({1e6}, {0.5, 0.999}, 100000, kSeed + 5);
    bool ok = true;
    std::string detail;
    for (const auto& c : low) {
        const double se = std::sqrt(c.alpha * (1.0 - c.alpha) / static_cast<double>(c.draws));
        const double dev = std::abs(c.frequency - c.alpha) / se;
        ok = ok && dev <= 3.0;
        detail += "ratio 1e-8 alpha " + fmt(c.alpha) + ": freq " + fmt(c.frequency) + " (" + fmt(dev) + " SE); ";
    }
    for (const auto& c : high) {
        ok = ok && c.frequency <= 1e-3;
        detail += "ratio 1e6 alpha " + fmt(c.alpha) + ": freq " + fmt(c.frequency) + " (<= 1e-3); ";
    }
    return {ok, detail.substr(0, detail.size() - 2)};
}

Outcome bias_hat_law() {
    const auto s = spar::verify::study_bias_hat_law(100000, kSeed + 6);
    const double dev = std::abs(s.mean.mean - (s.bias + s.var)) / s.mean.std_error;
    return {dev <= 3.0 && s.ks_statistic <= 0.01,
            "mean BiasHat " + fmt(s.mean.mean) + " vs Bias+Var " + fmt(s.bias + s.var) + " (" + fmt(dev) +
                " SE <= 3); KS at zero bias " + fmt(s.ks_statistic) + " (<= 0.01)"};
}

Outcome special_functions() {
    double worst_rt = 0.0;
    for (int k = 1; k <= 99; ++k) {
        const double a = k / 100.0;
        worst_rt = std::max(worst_rt, std::abs(spar::chi2_df1_cdf(spar::chi2_df1_inv_cdf(spar::Alpha(a))) - a));
    }
    double worst_q = 0.0;
    for (int k = 0; k <= 1000; ++k) {
        const double b = k / 100.0;
        worst_q = std::max(worst_q, std::abs(spar::marcum_q_half(0.0, b) - (1.0 - spar::chi2_df1_cdf(b * b))));
    }
    return {worst_rt <= 1e-10 && worst_q <= 1e-9,
            "inv-CDF round trip " + fmt(worst_rt) + " (<= 1e-10); Q(0,b) vs chi2 tail " + fmt(worst_q) + " (<= 1e-9)"};
}

Outcome linear_algebra() {
    spar::GaussianStream rng(kSeed + 7);
    double worst_rel = 0.0;
    for (int t = 0; t < 100; ++t) {
        const Eigen::Index d = 1 + t % 8;
        const Eigen::Index n = d + 5 + t % 20;
        const Eigen::MatrixXd x = rng.matrix(n, d);
        const Eigen::VectorXd y = rng.vector(n);
        const auto w = spar::pinv_solve(spar::DataMatrix(x), spar::TargetVector(y));
        const Eigen::VectorXd oracle = (x.transpose() * x).ldlt().solve(x.transpose() * y);
        worst_rel = std::max(worst_rel, (w.weights() - oracle).norm() / oracle.norm());
    }
    double worst_null = 0.0;
    for (int t = 0; t < 100; ++t) {
        const Eigen::Index d = 3 + t % 6;
        const Eigen::Index r = 1 + t % (d - 1);
        const Eigen::Index n = 4 + t % 15;
        const Eigen::MatrixXd x = rng.matrix(n, r) * rng.matrix(r, d);
        const Eigen::VectorXd y = rng.vector(n);
        const auto w = spar::pinv_solve(spar::DataMatrix(x), spar::TargetVector(y));
        // null space from an LU kernel, orthonormalized by QR
        const Eigen::MatrixXd kernel = Eigen::FullPivLU<Eigen::MatrixXd>(x).kernel();
        const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(kernel).householderQ() *
                                  Eigen::MatrixXd::Identity(d, kernel.cols());
        worst_null = std::max(worst_null, (q.transpose() * w.weights()).cwiseAbs().maxCoeff());
    }
    return {worst_rel <= 1e-8 && worst_null <= 1e-10,
            "full rank: worst relative error vs normal equations " + fmt(worst_rel) +
                " (<= 1e-8); rank deficient: worst null-space component " + fmt(worst_null) + " (<= 1e-10)"};
}

Outcome cli_end_to_end() {
    const fs::path data = SPAR_TEST_DATA;
    const fs::path golden = data / "golden";
    const fs::path work = fs::temp_directory_path() / "spar_acceptance";
    fs::remove_all(work);
    fs::create_directories(work);

    std::string detail;
    bool ok = true;

    const int gen = run_cli("synth --config " + (golden / "config.json").string() + " --emit-data " + work.string());
    bool data_same = gen == 0;
    for (const char* f : {"train.csv", "targets.csv", "test.csv", "test_targets.csv"})
        data_same = data_same && read_file(work / f) == read_file(golden / f);
    ok = ok && data_same;
    detail += std::string("seeded 8x3 data ") + (data_same ? "byte-identical" : "DIFFERS") + "; ";

    const std::string adapt_args = "adapt --train " + (golden / "train.csv").string() + " --targets " +
                                   (golden / "targets.csv").string() + " --test " + (golden / "test.csv").string() +
                                   " --alpha 0.999 --out ";
    const int a1 = run_cli(adapt_args + (work / "r1.json").string());
    const int a2 = run_cli(adapt_args + (work / "r2.json").string());
    const auto r1 = read_file(work / "r1.json");
    const bool report_same = a1 == 0 && a2 == 0 && !r1.empty() && r1 == read_file(work / "r2.json") &&
                             r1 == read_file(golden / "report.json");
    ok = ok && report_same;
    detail += std::string("adapt report ") + (report_same ? "matches golden file" : "DIFFERS from golden file") + "; ";

    const auto t0 = std::chrono::steady_clock::now();
    const int v = run_cli("verify --trials 100000");
    const double secs = seconds_since(t0);
    ok = ok && v == 0 && secs <= 300.0;
    detail += "verify --trials 100000 exit " + std::to_string(v) + " in " + fmt(secs) + " s (<= 300)";
    fs::remove_all(work);
    return {ok, detail};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"AC1 OLS risk closed form vs Monte Carlo", theorem1},
        {"AC2 projected risk decomposition vs Monte Carlo", theorem2},
        {"AC3 oracle set dominates all subsets at D=6", theorem3},
        {"AC4 synthetic experiment 2", table_experiment2},
        {"AC5 synthetic experiment 4 (no shift)", table_experiment4},
        {"AC6 synthetic experiments 1 and 3", table_experiments1and3},
        {"AC7 inclusion probability", proposition1},
        {"AC8 inclusion tail limits", lemma1},
        {"AC9 BiasHat distribution", bias_hat_law},
        {"AC10 special functions", special_functions},
        {"AC11 pseudoinverse solve", linear_algebra},
        {"AC12 CLI end to end", cli_end_to_end},
    };
    int failed = 0;
    for (const auto& [name, check] : criteria) {
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.passed) ++failed;
        std::cout << (o.passed ? "[PASS] " : "[FAIL] ") << name << ": " << o.detail << std::endl;
    }
    std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size()
              << " acceptance criteria passed" << std::endl;
    return failed == 0 ? 0 : 1;
}
