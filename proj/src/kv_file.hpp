#pragma once

// Internal helper for the tiny "key=value" text files used by configs and
// fitted-weight files. Lines starting with '#' and blank lines are ignored.

#include <cstddef>
#include <string>
#include <vector>

namespace solarsched::detail {

struct KvEntry {
  std::string key;
  std::string value;
  std::size_t line;  // 1-based, for error reporting
};

// Throws ParseError on a line without '=' or with an empty key.
std::vector<KvEntry> parse_kv_file(const std::string& path);

// Parses value as double/long; throws ParseError naming the line on failure.
double kv_to_double(const KvEntry& e);
long kv_to_long(const KvEntry& e);

// Splits a comma-separated list, trimming whitespace around items.
std::vector<std::string> split_csv_list(const std::string& s);

std::string trim(const std::string& s);

}  // namespace solarsched::detail
