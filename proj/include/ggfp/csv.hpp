#pragma once

#include <fstream>
#include <initializer_list>
#include <string>
#include <string_view>

namespace ggfp::csv {

/// %.17g formatting, the round-trip precision used in every output file.
std::string format(double v);

/// Minimal comma-separated writer; cells are written verbatim.
class Writer {
 public:
  explicit Writer(const std::string& path);
  explicit Writer(std::ostream& os) : os_(&os) {}

  void header(std::initializer_list<std::string_view> names);
  Writer& cell(std::string_view text);
  Writer& cell(double v) { return cell(format(v)); }
  void end_row();

 private:
  std::ofstream file_;
  std::ostream* os_;
  bool row_started_ = false;
};

}  // namespace ggfp::csv
