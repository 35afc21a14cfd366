#ifndef PHONONFLUX_IO_HPP
#define PHONONFLUX_IO_HPP

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "phononflux/field_state.hpp"

namespace phononflux {

/// Round-trip-exact doubles by default (17 significant digits).
std::string format_double(double v, int precision = 17);

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header,
            int precision = 17);
  CsvWriter& field(double v);
  CsvWriter& field(int v);
  CsvWriter& field(const std::string& v);
  void end_row();

 private:
  std::ofstream out_;
  int precision_;
  bool row_open_ = false;
};

std::uint64_t fnv1a_hash(const std::string& text);

void write_field_csv(const std::string& path, const FieldState& y,
                     int precision = 17);

}  // namespace phononflux

#endif
