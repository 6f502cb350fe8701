#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "hetjsq/model.hpp"

namespace hetjsq {

/// Config documents are JSON objects:
///
///   {
///     "lambda": 0.5,
///     "mu": 1.0,
///     "classes": [ {"capacity": "4/3", "fraction": 0.5},
///                  {"capacity": "2/3", "fraction": 0.5} ]
///   }
///
/// `mu` defaults to 1 and `lambda` to 0. Numbers may also be written as
/// strings holding a decimal or a ratio "p/q". Unknown keys are rejected.
/// The result has been through validate_config.
SystemConfig parse_config(std::string_view text,
                          std::vector<std::string>* warnings = nullptr);
SystemConfig load_config(const std::string& path,
                         std::vector<std::string>* warnings = nullptr);

std::string dump_config(const SystemConfig& config);

/// Parses a decimal or "p/q". Throws ParseError.
double parse_number(std::string_view text);

/// Shortest text that reads back as the same double.
std::string format_double(double value);

/// Writes one CSV record; fields containing separators or quotes are quoted.
void write_csv_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace hetjsq
