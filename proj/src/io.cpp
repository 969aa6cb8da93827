#include "heatlocus/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace heatlocus {

std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

void dump_value(const nlohmann::json& j, int indent, int level, std::string& out) {
  const std::string pad = indent > 0 ? std::string(static_cast<std::size_t>(indent * (level + 1)), ' ') : "";
  const std::string close_pad = indent > 0 ? std::string(static_cast<std::size_t>(indent * level), ' ') : "";
  const char* nl = indent > 0 ? "\n" : "";
  const char* colon = indent > 0 ? ": " : ":";
  switch (j.type()) {
    case nlohmann::json::value_t::number_float: {
      const double x = j.get<double>();
      out += std::isfinite(x) ? format_real(x) : "null";
      return;
    }
    case nlohmann::json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{";
      out += nl;
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) {
          out += ",";
          out += nl;
        }
        first = false;
        out += pad;
        out += nlohmann::json(it.key()).dump();
        out += colon;
        dump_value(it.value(), indent, level + 1, out);
      }
      out += nl;
      out += close_pad;
      out += "}";
      return;
    }
    case nlohmann::json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[";
      out += nl;
      bool first = true;
      for (const auto& v : j) {
        if (!first) {
          out += ",";
          out += nl;
        }
        first = false;
        out += pad;
        dump_value(v, indent, level + 1, out);
      }
      out += nl;
      out += close_pad;
      out += "]";
      return;
    }
    default:
      out += j.dump();
  }
}

}  // namespace

std::string dump_json(const nlohmann::json& j, int indent) {
  std::string out;
  dump_value(j, indent, 0, out);
  out += "\n";
  return out;
}

nlohmann::json parse_config(const std::string& text, const std::string& source) {
  try {
    return nlohmann::json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const nlohmann::json::parse_error& e) {
    // e.byte is 1-based and points just past the offending character.
    const std::size_t stop = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    int line = 1, column = 1;
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    std::string what = e.what();
    const auto pos = what.find("parse error");
    if (pos != std::string::npos) what = what.substr(pos);
    fail(ErrorKind::Parse, source + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + what);
  }
}

nlohmann::json load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::InvalidInput, "cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorKind::InvalidInput, "cannot write '" + path + "'");
  out << text;
  require(static_cast<bool>(out), ErrorKind::InvalidInput, "write to '" + path + "' failed");
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add_row(const std::vector<double>& row) {
  std::vector<std::string> cells;
  cells.reserve(row.size());
  for (double x : row) cells.push_back(format_real(x));
  add_raw_row(cells);
}

void CsvTable::add_raw_row(const std::vector<std::string>& row) {
  require(row.size() == header_.size(), ErrorKind::InvalidInput, "CSV row width does not match the header");
  rows_.push_back(row);
}

std::string CsvTable::str() const {
  std::string out;
  auto line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ",";
      out += cells[i];
    }
    out += "\n";
  };
  line(header_);
  for (const auto& r : rows_) line(r);
  return out;
}

namespace cfg {

namespace {
std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }
}  // namespace

const nlohmann::json& member(const nlohmann::json& obj, const std::string& key, const std::string& path) {
  require(obj.is_object(), ErrorKind::InvalidInput, "config: '" + (path.empty() ? "<root>" : path) + "' must be an object");
  require(obj.contains(key), ErrorKind::InvalidInput, "config: missing field '" + join(path, key) + "'");
  return obj.at(key);
}

double real(const nlohmann::json& obj, const std::string& key, const std::string& path) {
  const nlohmann::json& v = member(obj, key, path);
  require(v.is_number(), ErrorKind::InvalidInput, "config: '" + join(path, key) + "' must be a number");
  const double x = v.get<double>();
  require(std::isfinite(x), ErrorKind::InvalidInput, "config: '" + join(path, key) + "' must be finite");
  return x;
}

double real_or(const nlohmann::json& obj, const std::string& key, double fallback, const std::string& path) {
  return obj.is_object() && obj.contains(key) ? real(obj, key, path) : fallback;
}

int integer(const nlohmann::json& obj, const std::string& key, const std::string& path) {
  const nlohmann::json& v = member(obj, key, path);
  require(v.is_number_integer(), ErrorKind::InvalidInput, "config: '" + join(path, key) + "' must be an integer");
  return v.get<int>();
}

int integer_or(const nlohmann::json& obj, const std::string& key, int fallback, const std::string& path) {
  return obj.is_object() && obj.contains(key) ? integer(obj, key, path) : fallback;
}

std::vector<double> reals(const nlohmann::json& value, const std::string& path) {
  require(value.is_array(), ErrorKind::InvalidInput, "config: '" + path + "' must be an array of numbers");
  std::vector<double> out;
  for (const auto& x : value) {
    require(x.is_number(), ErrorKind::InvalidInput, "config: '" + path + "' must be an array of numbers");
    out.push_back(x.get<double>());
    require(std::isfinite(out.back()), ErrorKind::InvalidInput, "config: '" + path + "' must be finite");
  }
  return out;
}

Vec vector(const nlohmann::json& value, const std::string& path) {
  const std::vector<double> xs = reals(value, path);
  require(!xs.empty(), ErrorKind::InvalidInput, "config: '" + path + "' must not be empty");
  return Eigen::Map<const Vec>(xs.data(), static_cast<Eigen::Index>(xs.size()));
}

Point point(const nlohmann::json& value, const std::string& path) {
  if (value.is_array()) return Point(vector(value, path));
  require(value.is_object(), ErrorKind::InvalidInput,
          "config: '" + path + "' must be a coordinate array or {\"coords\": [...], \"chart\": c}");
  return Point(vector(member(value, "coords", path), join(path, "coords")), integer_or(value, "chart", 0, path));
}

}  // namespace cfg

nlohmann::json to_json(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

nlohmann::json to_json(const Point& p) { return {{"coords", to_json(p.coords)}, {"chart", p.chart}}; }

}  // namespace heatlocus
