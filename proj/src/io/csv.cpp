#include "dsim/io/csv.hpp"

#include <cstdio>
#include <stdexcept>

namespace dsim {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

CsvWriter::CsvWriter(const std::string& path, const std::string& meta_json,
                     const std::vector<std::string>& columns)
    : f_(path, std::ios::trunc), ncols_(columns.size()) {
    if (!f_) throw std::runtime_error("CsvWriter: cannot open " + path);
    if (!meta_json.empty()) f_ << "# " << meta_json << "\n";
    for (size_t i = 0; i < columns.size(); ++i) f_ << (i ? "," : "") << columns[i];
    f_ << "\n";
}

void CsvWriter::row(std::span<const double> values) {
    if (values.size() != ncols_) throw std::logic_error("CsvWriter: column count mismatch");
    for (size_t i = 0; i < values.size(); ++i)
        f_ << (i ? "," : "") << format_double(values[i]);
    f_ << "\n";
}

void CsvWriter::close() { f_.close(); }

}  // namespace dsim
