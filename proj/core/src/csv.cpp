#include "superbsde/csv.hpp"
#include "superbsde/errors.hpp"

#include <cstdio>

namespace superbsde {

CsvWriter::CsvWriter(const std::string& path) : out_(path, std::ios::binary) {
    if (!out_)
        throw ConfigError("cannot open CSV file for writing: " + path);
}

std::string CsvWriter::format(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

void CsvWriter::header(const std::vector<std::string>& names) {
    for (size_t i = 0; i < names.size(); ++i) {
        if (i) out_ << ',';
        out_ << names[i];
    }
    out_ << '\n';
}

void CsvWriter::row(const std::vector<double>& values) {
    for (size_t i = 0; i < values.size(); ++i) {
        if (i) out_ << ',';
        out_ << format(values[i]);
    }
    out_ << '\n';
}

void CsvWriter::mixed_row(const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) {
        if (i) out_ << ',';
        out_ << cells[i];
    }
    out_ << '\n';
}

} // namespace superbsde
