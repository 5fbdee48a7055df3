#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace qaml {

// Bad or missing run configuration; the CLI maps it to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Filesystem trouble; the CLI maps it to exit code 4.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Shortest decimal form that parses back to the same double.
std::string format_double(double v);
std::string format_int(long long v);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    // Throws logic_error when the row width disagrees with the header.
    void add_row(std::vector<std::string> row);
};

// Comma separators, '.' decimal marks, LF line endings, header row first.
std::string csv_to_string(const CsvTable& table);

// FNV-1a hash of the CSV bytes with the named columns removed (wall-time
// columns are excluded from reproducibility comparisons this way).
std::uint64_t csv_determinism_hash(const CsvTable& table,
                                   const std::vector<std::string>& excluded_columns);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace qaml
