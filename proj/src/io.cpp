#include "phononflux/io.hpp"

#include <cstdio>
#include <stdexcept>

namespace phononflux {

std::string format_double(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", precision, v);
  return buf;
}

CsvWriter::CsvWriter(const std::string& path,
                     const std::vector<std::string>& header, int precision)
    : out_(path), precision_(precision) {
  if (!out_) throw std::runtime_error("cannot open " + path);
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) out_ << ',';
    out_ << header[i];
  }
  out_ << '\n';
}

CsvWriter& CsvWriter::field(double v) {
  if (row_open_) out_ << ',';
  out_ << format_double(v, precision_);
  row_open_ = true;
  return *this;
}

CsvWriter& CsvWriter::field(int v) {
  if (row_open_) out_ << ',';
  out_ << v;
  row_open_ = true;
  return *this;
}

CsvWriter& CsvWriter::field(const std::string& v) {
  if (row_open_) out_ << ',';
  out_ << v;
  row_open_ = true;
  return *this;
}

void CsvWriter::end_row() {
  out_ << '\n';
  row_open_ = false;
}

std::uint64_t fnv1a_hash(const std::string& text) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

void write_field_csv(const std::string& path, const FieldState& y,
                     int precision) {
  const TorusGrid& grid = y.grid;
  std::vector<std::string> header;
  for (int a = 0; a < grid.dim(); ++a)
    header.push_back("x_" + std::to_string(a + 1));
  header.push_back("component");
  header.push_back("u");
  header.push_back("v");
  CsvWriter csv(path, header, precision);
  std::vector<int> c(grid.dim());
  for (std::size_t node = 0; node < grid.size(); ++node) {
    grid.coords(node, c.data());
    for (int comp = 0; comp < y.components(); ++comp) {
      for (int a = 0; a < grid.dim(); ++a) csv.field(c[a]);
      csv.field(comp + 1);
      csv.field(y.u(node, comp));
      csv.field(y.v(node, comp));
      csv.end_row();
    }
  }
}

}  // namespace phononflux
