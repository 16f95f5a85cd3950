#ifndef SPAR_MATRIXIO_HPP
#define SPAR_MATRIXIO_HPP

// Data containers and the comma-separated text format used for source
// representations (X), target representations (Z) and label vectors (Y).

#include <Eigen/Dense>

#include <charconv>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "spar/errors.hpp"

namespace spar {

namespace detail {

inline bool all_finite(const Eigen::Ref<const Eigen::MatrixXd>& m) {
    return m.array().isFinite().all();
}

}  // namespace detail

/// N x D matrix with samples as rows. Never empty, always finite.
class DataMatrix {
public:
    explicit DataMatrix(Eigen::MatrixXd values) : values_(std::move(values)) {
        if (values_.rows() < 1 || values_.cols() < 1)
            throw EmptyInputError("data matrix must have at least one row and one column");
        if (!detail::all_finite(values_))
            throw DomainError("data matrix contains a non-finite entry");
    }

    std::size_t rows() const noexcept { return static_cast<std::size_t>(values_.rows()); }
    std::size_t cols() const noexcept { return static_cast<std::size_t>(values_.cols()); }
    const Eigen::MatrixXd& values() const noexcept { return values_; }

    bool operator==(const DataMatrix& other) const {
        return values_.rows() == other.values_.rows() && values_.cols() == other.values_.cols() &&
               values_ == other.values_;
    }

private:
    Eigen::MatrixXd values_;
};

/// Regression targets paired with the rows of a DataMatrix.
class TargetVector {
public:
    explicit TargetVector(Eigen::VectorXd values) : values_(std::move(values)) {
        if (values_.size() < 1) throw EmptyInputError("target vector is empty");
        if (!detail::all_finite(values_))
            throw DomainError("target vector contains a non-finite entry");
    }

    std::size_t size() const noexcept { return static_cast<std::size_t>(values_.size()); }
    const Eigen::VectorXd& values() const noexcept { return values_; }

private:
    Eigen::VectorXd values_;
};

/// Linear weight vector without an intercept term.
class Regressor {
public:
    explicit Regressor(Eigen::VectorXd weights) : weights_(std::move(weights)) {
        if (!detail::all_finite(weights_))
            throw DomainError("regressor contains a non-finite weight");
    }

    std::size_t size() const noexcept { return static_cast<std::size_t>(weights_.size()); }
    const Eigen::VectorXd& weights() const noexcept { return weights_; }

    bool operator==(const Regressor& other) const {
        return weights_.size() == other.weights_.size() && weights_ == other.weights_;
    }

private:
    Eigen::VectorXd weights_;
};

/// Predictions Zw.
inline Eigen::VectorXd predict(const DataMatrix& z, const Regressor& w) {
    if (z.cols() != w.size()) throw ContractError("regressor length does not match feature count");
    return z.values() * w.weights();
}

/// ||y - Zw||^2, the out-of-distribution squared error used throughout.
inline double squared_error(const DataMatrix& z, const TargetVector& y, const Regressor& w) {
    if (z.rows() != y.size()) throw ContractError("target length does not match row count");
    return (y.values() - predict(z, w)).squaredNorm();
}

namespace io {

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split_cells(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    for (;;) {
        const auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            cells.push_back(trim(line.substr(start)));
            return cells;
        }
        cells.push_back(trim(line.substr(start, comma - start)));
        start = comma + 1;
    }
}

inline double parse_real(std::string_view cell, std::size_t line, std::size_t column) {
    if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
    double value = 0.0;
    const auto* first = cell.data();
    const auto* last = cell.data() + cell.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (cell.empty() || ec != std::errc{} || ptr != last || !std::isfinite(value)) {
        throw ParseError("line " + std::to_string(line) + ", column " + std::to_string(column) +
                             ": cannot parse '" + std::string(cell) + "' as a finite real",
                         line, column);
    }
    return value;
}

inline std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(std::move(line));
    }
    // trailing blank lines carry no data
    while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
    return lines;
}

/// Parsed rows plus the 1-based physical line each came from.
struct Table {
    std::vector<std::vector<double>> rows;
    std::size_t columns = 0;
};

inline Table parse_table(const std::filesystem::path& path, bool has_header) {
    const auto lines = read_lines(path);
    Table table;
    const std::size_t first = has_header ? 1 : 0;
    if (lines.size() <= first) throw EmptyInputError("'" + path.string() + "' contains no data rows");
    for (std::size_t i = first; i < lines.size(); ++i) {
        const std::size_t line_no = i + 1;
        const auto cells = split_cells(lines[i]);
        if (table.rows.empty()) {
            table.columns = cells.size();
        } else if (cells.size() != table.columns) {
            throw FormatError("line " + std::to_string(line_no) + ": expected " +
                              std::to_string(table.columns) + " cells, found " +
                              std::to_string(cells.size()));
        }
        std::vector<double> row;
        row.reserve(cells.size());
        for (std::size_t c = 0; c < cells.size(); ++c) row.push_back(parse_real(cells[c], line_no, c + 1));
        table.rows.push_back(std::move(row));
    }
    return table;
}

}  // namespace detail

/// Shortest text that parses back to exactly `value` (at most 17 significant digits).
inline std::string format_real(double value) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    if (ec != std::errc{}) throw NumericError("cannot format real");
    return std::string(buf, ptr);
}

inline DataMatrix load_matrix(const std::filesystem::path& path, bool has_header = false) {
    const auto table = detail::parse_table(path, has_header);
    Eigen::MatrixXd m(static_cast<Eigen::Index>(table.rows.size()),
                      static_cast<Eigen::Index>(table.columns));
    for (std::size_t r = 0; r < table.rows.size(); ++r)
        for (std::size_t c = 0; c < table.columns; ++c)
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = table.rows[r][c];
    return DataMatrix(std::move(m));
}

inline TargetVector load_targets(const std::filesystem::path& path) {
    const auto table = detail::parse_table(path, false);
    if (table.columns != 1)
        throw FormatError("'" + path.string() + "': target file must have exactly one column, found " +
                          std::to_string(table.columns));
    Eigen::VectorXd v(static_cast<Eigen::Index>(table.rows.size()));
    for (std::size_t r = 0; r < table.rows.size(); ++r) v(static_cast<Eigen::Index>(r)) = table.rows[r][0];
    return TargetVector(std::move(v));
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << text;
    out.flush();
    if (!out) throw IoError("write to '" + path.string() + "' failed");
}

inline std::string format_matrix(const Eigen::Ref<const Eigen::MatrixXd>& m,
                                 const std::vector<std::string>& header = {}) {
    std::ostringstream os;
    for (std::size_t c = 0; c < header.size(); ++c) os << (c ? "," : "") << header[c];
    if (!header.empty()) os << '\n';
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) os << (c ? "," : "") << format_real(m(r, c));
        os << '\n';
    }
    return os.str();
}

inline void save_matrix(const DataMatrix& m, const std::filesystem::path& path,
                        const std::vector<std::string>& header = {}) {
    write_text(path, format_matrix(m.values(), header));
}

inline void save_targets(const TargetVector& y, const std::filesystem::path& path) {
    write_text(path, format_matrix(y.values()));
}

}  // namespace io
}  // namespace spar

#endif  // SPAR_MATRIXIO_HPP
