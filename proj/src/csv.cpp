#include <ggfp/csv.hpp>

#include <cstdio>
#include <stdexcept>

namespace ggfp::csv {

std::string format(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Writer::Writer(const std::string& path) : file_(path), os_(&file_) {
  if (!file_) throw std::runtime_error("cannot open " + path + " for writing");
}

void Writer::header(std::initializer_list<std::string_view> names) {
  for (auto n : names) cell(n);
  end_row();
}

Writer& Writer::cell(std::string_view text) {
  if (row_started_) *os_ << ',';
  *os_ << text;
  row_started_ = true;
  return *this;
}

void Writer::end_row() {
  *os_ << '\n';
  row_started_ = false;
}

}  // namespace ggfp::csv
