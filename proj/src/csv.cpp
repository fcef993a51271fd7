#include "semlead/csv.hpp"

#include <charconv>
#include <istream>

#include "semlead/common.hpp"

namespace semlead::csv {

std::string field(std::string_view text) {
  if (text.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(text);
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string number(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc{}) throw Error("cannot format number");
  return std::string(buf, end);
}

std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

std::vector<std::vector<std::string>> read(std::istream& in, const std::vector<std::string>& header,
                                           std::string_view what) {
  std::string line;
  if (!std::getline(in, line) || split(line) != header)
    throw Error(std::string(what) + ": missing or unexpected header row");
  std::vector<std::vector<std::string>> rows;
  std::size_t n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty() || line == "\r") continue;
    auto row = split(line);
    if (row.size() != header.size())
      throw Error(std::string(what) + ": line " + std::to_string(n) + " has " + std::to_string(row.size()) +
                  " fields, expected " + std::to_string(header.size()));
    rows.push_back(std::move(row));
  }
  return rows;
}

double to_double(const std::string& text, std::string_view what) {
  double x = 0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), x);
  if (ec != std::errc{} || p != text.data() + text.size())
    throw Error(std::string(what) + ": not a number: '" + text + "'");
  return x;
}

int to_int(const std::string& text, std::string_view what) {
  int x = 0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), x);
  if (ec != std::errc{} || p != text.data() + text.size())
    throw Error(std::string(what) + ": not an integer: '" + text + "'");
  return x;
}

}  // namespace semlead::csv
