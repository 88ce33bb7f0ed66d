#pragma once

#include <fstream>
#include <span>
#include <string>
#include <vector>

namespace dsim {

// CSV with a leading '#'-prefixed JSON metadata line; numbers printed with
// %.17g so goldens round-trip exactly.
class CsvWriter {
  public:
    CsvWriter(const std::string& path, const std::string& meta_json,
              const std::vector<std::string>& columns);

    void row(std::span<const double> values);
    void close();

  private:
    std::ofstream f_;
    size_t ncols_;
};

std::string format_double(double v);

}  // namespace dsim
