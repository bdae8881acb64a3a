#pragma once

#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace qd {

inline constexpr int kSchemaVersion = 1;

// %.17g, with -0 printed as 0 so outputs compare byte for byte.
std::string format_double(double x);

using Cell = std::variant<double, long, std::string>;

// Fixed column order; first line "# schema_version=1".
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns);
  void add_row(std::vector<Cell> row);
  std::size_t rows() const { return rows_.size(); }
  void write(std::ostream& os) const;
  void save(const std::string& path) const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<Cell>> rows_;
};

// Pretty-printed JSON with a trailing newline; adds "schema_version" to objects lacking one.
void save_json(nlohmann::json j, const std::string& path);

std::string join_path(const std::string& dir, const std::string& file);

}  // namespace qd
