#include "kv_file.hpp"

#include <cerrno>
#include <cstdlib>
#include <fstream>

#include "solarsched/errors.hpp"

namespace solarsched::detail {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<KvEntry> parse_kv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError("cannot open file: " + path, 0);
  }
  std::vector<KvEntry> entries;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::size_t eq = t.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ParseError("expected key=value in " + path, lineno);
    }
    entries.push_back({trim(t.substr(0, eq)), trim(t.substr(eq + 1)), lineno});
  }
  return entries;
}

double kv_to_double(const KvEntry& e) {
  const std::string& v = e.value;
  errno = 0;
  char* end = nullptr;
  double x = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0' || errno == ERANGE) {
    throw ParseError("invalid numeric value for key '" + e.key + "'", e.line);
  }
  return x;
}

long kv_to_long(const KvEntry& e) {
  const std::string& v = e.value;
  errno = 0;
  char* end = nullptr;
  long x = std::strtol(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0' || errno == ERANGE) {
    throw ParseError("invalid integer value for key '" + e.key + "'", e.line);
  }
  return x;
}

std::vector<std::string> split_csv_list(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    std::size_t comma = s.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(trim(s.substr(start)));
      break;
    }
    out.push_back(trim(s.substr(start, comma - start)));
    start = comma + 1;
  }
  return out;
}

}  // namespace solarsched::detail
