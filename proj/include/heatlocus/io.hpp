#pragma once

#include <string>
#include <vector>

#include "heatlocus/geometry.hpp"
#include "json.hpp"

namespace heatlocus {

/// Real number with 17 significant digits; non-finite values become "nan", "inf", "-inf".
std::string format_real(double x);

/// JSON text with every floating-point number written with 17 significant digits
/// (non-finite floats become null). Object keys keep their sorted order.
std::string dump_json(const nlohmann::json& j, int indent = 2);

/// Parses JSON config text; syntax errors become parse errors "source:line:column: message".
nlohmann::json parse_config(const std::string& text, const std::string& source = "<config>");

/// Reads and parses a config file (missing file is an invalid-input error).
nlohmann::json load_config(const std::string& path);

/// Writes text to a file, throwing invalid-input when the file cannot be opened.
void write_text(const std::string& path, const std::string& text);

/// CSV table of reals; empty optional cells are written as empty fields.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);
  void add_row(const std::vector<double>& row);
  /// Cells are preformatted strings (used for mixed columns).
  void add_raw_row(const std::vector<std::string>& row);
  std::string str() const;
  std::size_t rows() const { return rows_.size(); }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Typed accessors with the JSON path in error messages (all errors are invalid-input).
namespace cfg {

const nlohmann::json& member(const nlohmann::json& obj, const std::string& key, const std::string& path);
double real(const nlohmann::json& obj, const std::string& key, const std::string& path);
double real_or(const nlohmann::json& obj, const std::string& key, double fallback, const std::string& path);
int integer(const nlohmann::json& obj, const std::string& key, const std::string& path);
int integer_or(const nlohmann::json& obj, const std::string& key, int fallback, const std::string& path);
Vec vector(const nlohmann::json& value, const std::string& path);
std::vector<double> reals(const nlohmann::json& value, const std::string& path);
/// A point is either an array of coordinates (chart 0) or {"coords": [...], "chart": c}.
Point point(const nlohmann::json& value, const std::string& path);

}  // namespace cfg

nlohmann::json to_json(const Point& p);
nlohmann::json to_json(const Vec& v);

}  // namespace heatlocus
