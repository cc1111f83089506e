#pragma once

#include <fstream>
#include <initializer_list>
#include <string>
#include <vector>

namespace oscid::csv {

/// Column-oriented CSV writer. Every file starts with a `#` comment line
/// declaring its schema, followed by a plain header row.
class Writer {
public:
    Writer(const std::string& path, const std::string& schema_comment);

    void header(std::initializer_list<const char*> names);
    void row(std::initializer_list<double> values);
    void raw_row(const std::string& line);

private:
    std::ofstream out_;
};

/// Reads a CSV file with `n_cols` numeric columns, skipping `#` comment
/// lines and a single non-numeric header row if present.
std::vector<std::vector<double>> read_numeric(const std::string& path, int n_cols);

}  // namespace oscid::csv
