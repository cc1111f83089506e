#include "oscid/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace oscid::csv {

Writer::Writer(const std::string& path, const std::string& schema_comment)
    : out_(path) {
    if (!out_) throw std::runtime_error("cannot open for writing: " + path);
    out_ << "# " << schema_comment << "\n";
}

void Writer::header(std::initializer_list<const char*> names) {
    bool first = true;
    for (const char* n : names) {
        if (!first) out_ << ',';
        out_ << n;
        first = false;
    }
    out_ << '\n';
}

void Writer::row(std::initializer_list<double> values) {
    char buf[32];
    bool first = true;
    for (double v : values) {
        if (!first) out_ << ',';
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        out_ << buf;
        first = false;
    }
    out_ << '\n';
}

void Writer::raw_row(const std::string& line) { out_ << line << '\n'; }

std::vector<std::vector<double>> read_numeric(const std::string& path, int n_cols) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);

    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::vector<double> row;
        row.reserve(static_cast<std::size_t>(n_cols));
        std::stringstream ss(line);
        std::string tok;
        bool numeric = true;
        while (std::getline(ss, tok, ',')) {
            const char* begin = tok.data();
            const char* end = tok.data() + tok.size();
            while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
            while (end > begin && (end[-1] == ' ' || end[-1] == '\r' || end[-1] == '\t')) --end;
            double v;
            auto res = std::from_chars(begin, end, v);
            if (res.ec != std::errc{} || res.ptr != end) {
                numeric = false;
                break;
            }
            row.push_back(v);
        }
        if (!numeric) {
            if (rows.empty()) continue;  // header row
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": non-numeric data row");
        }
        if (static_cast<int>(row.size()) != n_cols) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected " + std::to_string(n_cols) + " columns");
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace oscid::csv
