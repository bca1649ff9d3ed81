#pragma once

#include <string>
#include <vector>

namespace mcfqkd {

// Column-ordered numeric table with leading '#' comment lines. The comment
// block carries run provenance (command, config hash, seed) so any reported
// number is reproducible from the output file alone.
struct ResultsTable {
    std::vector<std::string> comments;  // without the leading "# "
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

// 12 significant digits; enough to re-parse to the in-memory value at the
// documented 9-digit fidelity.
std::string format_double(double v);

std::string to_csv(const ResultsTable& table);
void write_csv(const std::string& path, const ResultsTable& table);

// Reads a table written by to_csv: '#' lines are collected as comments,
// the first non-comment line is the header.
ResultsTable read_csv(const std::string& path);
ResultsTable parse_csv(const std::string& text);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace mcfqkd
