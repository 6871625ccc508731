#pragma once

#include <fstream>
#include <string>
#include <vector>

namespace superbsde {

// RFC-4180-style CSV writer: '.' decimal point, header row, '\n' line ends.
// Numeric formatting is fixed ("%.12g") so identical runs produce
// byte-identical files.
class CsvWriter {
public:
    explicit CsvWriter(const std::string& path);

    void header(const std::vector<std::string>& names);
    void row(const std::vector<double>& values);
    void mixed_row(const std::vector<std::string>& cells);

    static std::string format(double v);

private:
    std::ofstream out_;
};

} // namespace superbsde
