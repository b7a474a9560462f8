#pragma once

// Text and CSV plumbing shared by the file formats.

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace qks::io {

/// Failure to read, parse or write a file; the message names the location.
class FormatError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// 17 significant digits: parses back to the identical double.
std::string format_double(double value);

/// Strict full-token parse; std::nullopt if the token is not a number.
std::optional<double> parse_double(std::string_view token);

/// Splits one CSV record, honoring double-quoted fields.
std::vector<std::string> split_csv_line(std::string_view line);

std::string read_text(const std::filesystem::path &path);
void write_text(const std::filesystem::path &path, std::string_view text);

struct Grid {
    std::vector<std::string> header;  // empty when the file has none
    Eigen::MatrixXd values;
};

/// Reads a numeric CSV grid. Every row must have the same width.
Grid read_grid(const std::filesystem::path &path, bool has_header);
void write_grid(const std::filesystem::path &path, const Eigen::MatrixXd &values,
                const std::vector<std::string> &header = {});

} // namespace qks::io
