#include "mcfqkd/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "mcfqkd/errors.hpp"

namespace mcfqkd {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::string to_csv(const ResultsTable& table) {
    std::ostringstream out;
    for (const auto& c : table.comments) {
        out << "# " << c << "\n";
    }
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
        out << (i ? "," : "") << table.columns[i];
    }
    out << "\n";
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            out << (i ? "," : "") << format_double(row[i]);
        }
        out << "\n";
    }
    return out.str();
}

void write_csv(const std::string& path, const ResultsTable& table) {
    write_text_file(path, to_csv(table));
}

ResultsTable parse_csv(const std::string& text) {
    ResultsTable table;
    std::istringstream in(text);
    std::string line;
    bool header_seen = false;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::string c = line.substr(1);
            if (!c.empty() && c[0] == ' ') c.erase(0, 1);
            table.comments.push_back(c);
            continue;
        }
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (!header_seen) {
            table.columns = cells;
            header_seen = true;
            continue;
        }
        std::vector<double> row;
        row.reserve(cells.size());
        for (const auto& c : cells) {
            try {
                std::size_t used = 0;
                row.push_back(std::stod(c, &used));
                if (used != c.size()) throw std::invalid_argument(c);
            } catch (const std::exception&) {
                throw ParseError("csv: not a number: '" + c + "'", lineno);
            }
        }
        table.rows.push_back(std::move(row));
    }
    if (!header_seen) {
        throw ParseError("csv: missing header row");
    }
    return table;
}

ResultsTable read_csv(const std::string& path) {
    return parse_csv(read_text_file(path));
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ParseError("cannot open file: " + path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write file: " + path);
    }
    out << text;
}

}  // namespace mcfqkd
