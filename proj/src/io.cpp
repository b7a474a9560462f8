#include "qks/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

namespace qks::io {

std::string format_double(double value) { return fmt::format("{:.17g}", value); }

std::optional<double> parse_double(std::string_view token) {
    while (!token.empty() && (token.front() == ' ' || token.front() == '\t')) {
        token.remove_prefix(1);
    }
    while (!token.empty() &&
           (token.back() == ' ' || token.back() == '\t' || token.back() == '\r')) {
        token.remove_suffix(1);
    }
    if (!token.empty() && token.front() == '+') { token.remove_prefix(1); }
    if (token.empty()) { return std::nullopt; }
    double value = 0.0;
    const auto [end, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || end != token.data() + token.size()) { return std::nullopt; }
    return value;
}

std::vector<std::string> split_csv_line(std::string_view line) {
    if (!line.empty() && line.back() == '\r') { line.remove_suffix(1); }
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    current.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                current.push_back(ch);
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            fields.push_back(std::move(current));
            current.clear();
        } else {
            current.push_back(ch);
        }
    }
    fields.push_back(std::move(current));
    return fields;
}

std::string read_text(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) { throw FormatError("cannot open " + path.string()); }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_text(const std::filesystem::path &path, std::string_view text) {
    if (path.has_parent_path()) { std::filesystem::create_directories(path.parent_path()); }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) { throw FormatError("cannot write " + path.string()); }
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) { throw FormatError("write failed for " + path.string()); }
}

Grid read_grid(const std::filesystem::path &path, bool has_header) {
    std::istringstream in(read_text(path));
    Grid grid;
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    std::size_t width = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") { continue; }
        auto fields = split_csv_line(line);
        if (has_header && grid.header.empty() && rows.empty()) {
            grid.header = std::move(fields);
            width = grid.header.size();
            continue;
        }
        if (width == 0) { width = fields.size(); }
        if (fields.size() != width) {
            throw FormatError(fmt::format("{}:{}: expected {} fields, found {}", path.string(),
                                          line_no, width, fields.size()));
        }
        std::vector<double> row;
        row.reserve(fields.size());
        for (std::size_t c = 0; c < fields.size(); ++c) {
            const auto value = parse_double(fields[c]);
            if (!value) {
                throw FormatError(fmt::format("{}:{}: column {}: cannot parse '{}'",
                                              path.string(), line_no, c + 1, fields[c]));
            }
            row.push_back(*value);
        }
        rows.push_back(std::move(row));
    }
    grid.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < width; ++c) {
            grid.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
        }
    }
    return grid;
}

void write_grid(const std::filesystem::path &path, const Eigen::MatrixXd &values,
                const std::vector<std::string> &header) {
    std::string text;
    if (!header.empty()) {
        for (std::size_t c = 0; c < header.size(); ++c) {
            if (c > 0) { text += ','; }
            text += header[c];
        }
        text += '\n';
    }
    for (Eigen::Index r = 0; r < values.rows(); ++r) {
        for (Eigen::Index c = 0; c < values.cols(); ++c) {
            if (c > 0) { text += ','; }
            text += format_double(values(r, c));
        }
        text += '\n';
    }
    write_text(path, text);
}

} // namespace qks::io
