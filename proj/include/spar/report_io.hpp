#ifndef SPAR_REPORT_IO_HPP
#define SPAR_REPORT_IO_HPP

// JSON encoding of an AdaptationReport. Reals are written in the shortest form
// that parses back to the identical double, so a save/load cycle is lossless.

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "spar/adapt.hpp"
#include "spar/errors.hpp"
#include "spar/matrixio.hpp"

namespace spar::io {

using Json = nlohmann::ordered_json;

namespace detail {

inline Json to_json_array(const Eigen::VectorXd& v) {
    Json a = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

inline Eigen::VectorXd vector_from_json(const Json& a, const char* key) {
    if (!a.is_array()) throw FormatError(std::string("report key '") + key + "' must be an array");
    Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!a[i].is_number()) throw FormatError(std::string("report key '") + key + "' holds a non-number");
        v(static_cast<Eigen::Index>(i)) = a[i].get<double>();
    }
    return v;
}

inline const Json& require(const Json& obj, const char* key) {
    const auto it = obj.find(key);
    if (it == obj.end()) throw FormatError(std::string("report is missing key '") + key + "'");
    return *it;
}

}  // namespace detail

inline Json report_to_json(const AdaptationReport& r) {
    Json j;
    j["alpha"] = r.alpha.value();
    j["sigma2_hat"] = r.sigma2_hat;
    j["weights_ols"] = detail::to_json_array(r.weights_ols.weights());
    j["weights_spar"] = detail::to_json_array(r.weights_spar.weights());
    j["selected_indices"] = r.selection.indices;
    Json vecs = Json::array();
    for (Eigen::Index k = 0; k < r.selection.vectors.rows(); ++k)
        vecs.push_back(detail::to_json_array(r.selection.vectors.row(k).transpose()));
    j["selected_vectors"] = std::move(vecs);
    j["source_rank"] = r.source_rank;
    Json ledger = Json::array();
    for (const auto& e : r.ledger.entries) {
        Json row;
        row["j"] = e.j;
        row["lambda_z_sq"] = e.lambda_z_sq;
        row["var_zj"] = e.var_zj;
        if (e.bias_zj) row["bias_zj"] = *e.bias_zj;
        row["bias_hat_zj"] = e.bias_hat_zj;
        row["selected"] = e.selected;
        ledger.push_back(std::move(row));
    }
    j["ledger"] = std::move(ledger);
    return j;
}

inline AdaptationReport report_from_json(const Json& j) {
    if (!j.is_object()) throw FormatError("report must be a JSON object");
    AdaptationReport r;
    r.alpha = Alpha(detail::require(j, "alpha").get<double>());
    r.sigma2_hat = detail::require(j, "sigma2_hat").get<double>();
    r.weights_ols = Regressor(detail::vector_from_json(detail::require(j, "weights_ols"), "weights_ols"));
    r.weights_spar = Regressor(detail::vector_from_json(detail::require(j, "weights_spar"), "weights_spar"));
    r.selection.indices = detail::require(j, "selected_indices").get<std::vector<std::size_t>>();
    const std::size_t dim = r.weights_ols.size();
    r.selection.vectors.resize(static_cast<Eigen::Index>(r.selection.indices.size()), static_cast<Eigen::Index>(dim));
    if (const auto it = j.find("selected_vectors"); it != j.end()) {
        if (it->size() != r.selection.indices.size())
            throw FormatError("report 'selected_vectors' does not match 'selected_indices'");
        for (std::size_t k = 0; k < it->size(); ++k) {
            const auto v = detail::vector_from_json((*it)[k], "selected_vectors");
            if (static_cast<std::size_t>(v.size()) != dim) throw FormatError("selected vector has wrong length");
            r.selection.vectors.row(static_cast<Eigen::Index>(k)) = v.transpose();
        }
    } else if (!r.selection.indices.empty()) {
        throw FormatError("report is missing key 'selected_vectors'");
    }
    r.source_rank = j.value("source_rank", std::size_t{0});
    for (const auto& row : detail::require(j, "ledger")) {
        LedgerEntry e;
        e.j = detail::require(row, "j").get<std::size_t>();
        e.lambda_z_sq = detail::require(row, "lambda_z_sq").get<double>();
        e.var_zj = detail::require(row, "var_zj").get<double>();
        if (const auto it = row.find("bias_zj"); it != row.end()) e.bias_zj = it->get<double>();
        e.bias_hat_zj = detail::require(row, "bias_hat_zj").get<double>();
        e.selected = detail::require(row, "selected").get<bool>();
        r.ledger.entries.push_back(e);
    }
    return r;
}

inline std::string format_report(const AdaptationReport& r) { return report_to_json(r).dump(2) + "\n"; }

inline void save_report(const AdaptationReport& r, const std::filesystem::path& path) {
    write_text(path, format_report(r));
}

inline AdaptationReport load_report(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    std::stringstream buf;
    buf << in.rdbuf();
    Json j;
    try {
        j = Json::parse(buf.str());
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("'" + path.string() + "' is not valid JSON: " + e.what());
    }
    try {
        return report_from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("'" + path.string() + "' has an unexpected report layout: " + e.what());
    }
}

}  // namespace spar::io

#endif  // SPAR_REPORT_IO_HPP
