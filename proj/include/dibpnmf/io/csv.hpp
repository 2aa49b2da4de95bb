// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include "dibpnmf/errors.hpp"
#include "dibpnmf/factorization/model.hpp"
#include "dibpnmf/matrix.hpp"
#include "dibpnmf/ratings.hpp"

#include <charconv>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace dibpnmf::io {

/// Shortest decimal text that parses back to the same double.
inline std::string format_double(double x) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ParseError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Writes to a sibling temporary file and renames it over the target.
inline void write_file_atomic(const std::filesystem::path& path,
                              std::string_view content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw std::runtime_error("cannot write '" + tmp.string() + "'");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out)
            throw std::runtime_error("write failed for '" + tmp.string() + "'");
    }
    std::filesystem::rename(tmp, path);
}

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos)
            end = text.size();
        lines.push_back(text.substr(start, end - start));
        start = end + 1;
    }
    return lines;
}

inline double parse_number(std::string_view cell, std::size_t line,
                           std::size_t column) {
    cell = trim(cell);
    if (!cell.empty() && cell.front() == '+')
        cell.remove_prefix(1);
    double v = 0.0;
    const auto r = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (cell.empty() || r.ec != std::errc() || r.ptr != cell.data() + cell.size())
        throw ParseError("not a number: '" + std::string(cell) + "'", line, column);
    if (!std::isfinite(v))
        throw ParseError("non-finite value", line, column);
    return v;
}

inline bool blank(std::string_view s) { return trim(s).empty(); }

} // namespace detail

/**
 * Comma-separated numbers, one matrix row per line, optional header line.
 * Blank lines are skipped. Every row must have the same number of fields.
 * Negative values are rejected with their location.
 */
inline Matrix parse_dense_csv(std::string_view text, bool header = false) {
    const auto lines = detail::split_lines(text);
    std::vector<std::vector<double>> rows;
    std::size_t width = 0;
    bool header_pending = header;
    for (std::size_t li = 0; li < lines.size(); ++li) {
        const std::size_t line_no = li + 1;
        if (detail::blank(lines[li]))
            continue;
        if (header_pending) {
            header_pending = false;
            continue;
        }
        std::vector<double> row;
        std::string_view rest = lines[li];
        std::size_t col = 1;
        for (;;) {
            const std::size_t comma = rest.find(',');
            const std::string_view cell = rest.substr(0, comma);
            const double v = detail::parse_number(cell, line_no, col);
            if (v < 0.0)
                throw ParseError("negative value", line_no, col);
            row.push_back(v);
            if (comma == std::string_view::npos)
                break;
            rest.remove_prefix(comma + 1);
            ++col;
        }
        if (rows.empty())
            width = row.size();
        else if (row.size() != width)
            throw ParseError("expected " + std::to_string(width) +
                                 " fields, found " + std::to_string(row.size()),
                             line_no);
        rows.push_back(std::move(row));
    }
    if (rows.empty())
        throw ParseError("no data rows");
    Matrix m(static_cast<Eigen::Index>(rows.size()),
             static_cast<Eigen::Index>(width));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < width; ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return m;
}

/// Loader errors are rethrown with the file path prefixed.
inline factorization::DataMatrix load_dense_csv(const std::filesystem::path& path,
                                                bool header = false) {
    const std::string text = read_file(path);
    try {
        return factorization::DataMatrix(parse_dense_csv(text, header));
    } catch (const ParseError& e) {
        throw e.with_context(path.string());
    }
}

/// 0/1 matrix in the dense CSV format.
inline BinaryMatrix load_mask_csv(const std::filesystem::path& path,
                                  bool header = false) {
    const std::string text = read_file(path);
    Matrix m;
    try {
        m = parse_dense_csv(text, header);
    } catch (const ParseError& e) {
        throw e.with_context(path.string());
    }
    BinaryMatrix z(m.rows(), m.cols());
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            if (m(i, j) != 0.0 && m(i, j) != 1.0)
                throw ParseError("mask entries must be 0 or 1",
                                 static_cast<std::size_t>(i) + 1,
                                 static_cast<std::size_t>(j) + 1)
                    .with_context(path.string());
            z(i, j) = m(i, j) != 0.0;
        }
    return z;
}

/// One integer label per line (first field of a CSV line).
inline std::vector<int> load_labels(const std::filesystem::path& path,
                                    bool header = false) {
    const std::string text = read_file(path);
    const auto lines = detail::split_lines(text);
    std::vector<int> labels;
    bool header_pending = header;
    for (std::size_t li = 0; li < lines.size(); ++li) {
        if (detail::blank(lines[li]))
            continue;
        if (header_pending) {
            header_pending = false;
            continue;
        }
        const std::string_view cell =
            detail::trim(lines[li].substr(0, lines[li].find(',')));
        int v = 0;
        const auto r = std::from_chars(cell.data(), cell.data() + cell.size(), v);
        if (cell.empty() || r.ec != std::errc() || r.ptr != cell.data() + cell.size())
            throw ParseError("not an integer label: '" + std::string(cell) + "'",
                             li + 1, 1)
                .with_context(path.string());
        labels.push_back(v);
    }
    return labels;
}

template <typename Derived>
std::string format_csv(const Eigen::MatrixBase<Derived>& m) {
    std::string out;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j > 0)
                out += ',';
            out += format_double(static_cast<double>(m(i, j)));
        }
        out += '\n';
    }
    return out;
}

template <typename Derived>
void write_csv(const std::filesystem::path& path,
               const Eigen::MatrixBase<Derived>& m) {
    write_file_atomic(path, format_csv(m));
}

/**
 * Rating lines "row col value" separated by spaces or tabs, 1-based
 * indices. Fields after the third (such as a timestamp) are ignored; blank
 * lines are skipped.
 */
inline RatingTriplets parse_triplets(std::string_view text, Eigen::Index rows,
                                     Eigen::Index cols) {
    if (rows < 1 || cols < 1)
        throw ParseError("matrix dimensions must be positive");
    RatingTriplets t;
    t.rows = rows;
    t.cols = cols;
    BinaryMatrix seen = BinaryMatrix::Zero(rows, cols);
    const auto lines = detail::split_lines(text);
    for (std::size_t li = 0; li < lines.size(); ++li) {
        const std::size_t line_no = li + 1;
        std::string_view rest = detail::trim(lines[li]);
        if (rest.empty())
            continue;
        std::string_view fields[3];
        for (int f = 0; f < 3; ++f) {
            rest = detail::trim(rest);
            if (rest.empty())
                throw ParseError("expected 'row col value'", line_no);
            const std::size_t end = rest.find_first_of(" \t");
            fields[f] = rest.substr(0, end);
            rest = end == std::string_view::npos ? std::string_view{}
                                                 : rest.substr(end);
        }
        long long idx[2];
        for (int f = 0; f < 2; ++f) {
            const auto r = std::from_chars(fields[f].data(),
                                           fields[f].data() + fields[f].size(),
                                           idx[f]);
            if (r.ec != std::errc() || r.ptr != fields[f].data() + fields[f].size())
                throw ParseError("not an index: '" + std::string(fields[f]) + "'",
                                 line_no, static_cast<std::size_t>(f) + 1);
        }
        const double v = detail::parse_number(fields[2], line_no, 3);
        if (v < 0.0)
            throw ParseError("negative value", line_no, 3);
        if (idx[0] < 1 || idx[0] > rows)
            throw ParseError("row index " + std::to_string(idx[0]) +
                                 " outside 1.." + std::to_string(rows),
                             line_no, 1);
        if (idx[1] < 1 || idx[1] > cols)
            throw ParseError("column index " + std::to_string(idx[1]) +
                                 " outside 1.." + std::to_string(cols),
                             line_no, 2);
        const auto r = static_cast<Eigen::Index>(idx[0] - 1);
        const auto c = static_cast<Eigen::Index>(idx[1] - 1);
        if (seen(r, c))
            throw ParseError("duplicate entry (" + std::to_string(idx[0]) + ", " +
                                 std::to_string(idx[1]) + ")",
                             line_no);
        seen(r, c) = 1;
        t.ratings.push_back({r, c, v});
    }
    return t;
}

inline RatingTriplets load_triplets(const std::filesystem::path& path,
                                    Eigen::Index rows, Eigen::Index cols) {
    const std::string text = read_file(path);
    try {
        return parse_triplets(text, rows, cols);
    } catch (const ParseError& e) {
        throw e.with_context(path.string());
    }
}

/// Dense matrix with the observation mask set at the listed entries.
inline factorization::DataMatrix to_data_matrix(const RatingTriplets& t) {
    auto [values, mask] = t.dense();
    return factorization::DataMatrix(std::move(values), std::move(mask));
}

} // namespace dibpnmf::io
