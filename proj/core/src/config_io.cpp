#include "hetjsq/config_io.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "hetjsq/error.hpp"

namespace hetjsq {

namespace {

using nlohmann::json;

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double parse_decimal(std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc{} || end != text.data() + text.size() ||
      !std::isfinite(value)) {
    fail(ErrorKind::ParseError, "not a number: '" + std::string(text) + "'");
  }
  return value;
}

double number_field(const json& node, const char* key) {
  const json& v = node.at(key);
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) return parse_number(v.get<std::string>());
  fail(ErrorKind::ParseError, std::string("'") + key + "' must be a number");
}

void reject_unknown(const json& node, std::initializer_list<const char*> known,
                    const char* where) {
  for (const auto& item : node.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || item.key() == k;
    if (!ok) {
      fail(ErrorKind::ParseError,
           "unknown key '" + item.key() + "' in " + where);
    }
  }
}

}  // namespace

double parse_number(std::string_view text) {
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) return parse_decimal(text);
  const double num = parse_decimal(text.substr(0, slash));
  const double den = parse_decimal(text.substr(slash + 1));
  if (den == 0.0) fail(ErrorKind::ParseError, "zero denominator in '" + std::string(text) + "'");
  return num / den;
}

SystemConfig parse_config(std::string_view text,
                          std::vector<std::string>* warnings) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    fail(ErrorKind::ParseError, e.what());
  }
  if (!doc.is_object()) fail(ErrorKind::ParseError, "config must be a JSON object");
  reject_unknown(doc, {"lambda", "mu", "classes"}, "config");
  if (!doc.contains("classes") || !doc["classes"].is_array()) {
    fail(ErrorKind::ParseError, "'classes' must be an array");
  }

  SystemConfig raw;
  try {
    raw.arrival_rate = doc.contains("lambda") ? number_field(doc, "lambda") : 0.0;
    raw.mu = doc.contains("mu") ? number_field(doc, "mu") : 1.0;
    for (const auto& node : doc["classes"]) {
      if (!node.is_object()) fail(ErrorKind::ParseError, "each class must be an object");
      reject_unknown(node, {"capacity", "fraction"}, "class");
      raw.classes.push_back({number_field(node, "capacity"), number_field(node, "fraction")});
    }
  } catch (const json::exception& e) {
    fail(ErrorKind::ParseError, e.what());
  }
  return validate_config(std::move(raw), warnings);
}

SystemConfig load_config(const std::string& path,
                         std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::ParseError, "cannot open config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), warnings);
}

std::string dump_config(const SystemConfig& config) {
  json doc;
  doc["lambda"] = config.arrival_rate;
  doc["mu"] = config.mu;
  doc["classes"] = json::array();
  for (const auto& c : config.classes) {
    doc["classes"].push_back({{"capacity", c.capacity}, {"fraction", c.fraction}});
  }
  return doc.dump(2);
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, end);
}

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) out << ',';
    const std::string& f = fields[i];
    if (f.find_first_of(",\"\n") == std::string::npos) {
      out << f;
      continue;
    }
    out << '"';
    for (char c : f) {
      if (c == '"') out << '"';
      out << c;
    }
    out << '"';
  }
  out << '\n';
}

}  // namespace hetjsq
