#include "qaml/report.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "qaml/data.hpp"

namespace qaml {

std::string format_double(double v) {
    char buf[40];
    for (int precision = 15; precision <= 17; ++precision) {
        snprintf(buf, sizeof buf, "%.*g", precision, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

std::string format_int(long long v) { return std::to_string(v); }

void CsvTable::add_row(std::vector<std::string> row) {
    if (row.size() != header.size()) throw std::logic_error("csv row width mismatch");
    rows.push_back(std::move(row));
}

namespace {

std::string join_csv_line(const std::vector<std::string>& cells,
                          const std::vector<bool>& keep) {
    std::string line;
    bool first = true;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (!keep[i]) continue;
        if (!first) line += ',';
        line += cells[i];
        first = false;
    }
    line += '\n';
    return line;
}

std::string csv_text(const CsvTable& table, const std::vector<bool>& keep) {
    std::string out = join_csv_line(table.header, keep);
    for (const auto& row : table.rows) out += join_csv_line(row, keep);
    return out;
}

}  // namespace

std::string csv_to_string(const CsvTable& table) {
    return csv_text(table, std::vector<bool>(table.header.size(), true));
}

std::uint64_t csv_determinism_hash(const CsvTable& table,
                                   const std::vector<std::string>& excluded_columns) {
    std::vector<bool> keep(table.header.size(), true);
    for (std::size_t i = 0; i < table.header.size(); ++i)
        for (const auto& name : excluded_columns)
            if (table.header[i] == name) keep[i] = false;
    return fnv1a64(csv_text(table, keep));
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out.write(text.data(), std::streamsize(text.size()));
    if (!out) throw IoError("short write to " + path);
}

}  // namespace qaml
