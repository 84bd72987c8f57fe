#include "vstress/csv.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "vstress/error.hpp"

namespace vstress::csv {

std::size_t Table::column(const std::string& name) const {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end())
    throw ParseError("missing column: " + name);
  return static_cast<std::size_t>(it - header.begin());
}

bool Table::has_column(const std::string& name) const {
  return std::find(header.begin(), header.end(), name) != header.end();
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(field);
      field.clear();
    } else {
      field += c;
    }
  }
  out.push_back(field);
  for (auto& f : out) {
    while (!f.empty() && (f.back() == ' ' || f.back() == '\t' || f.back() == '\r'))
      f.pop_back();
    std::size_t start = f.find_first_not_of(" \t");
    if (start == std::string::npos)
      f.clear();
    else if (start > 0)
      f.erase(0, start);
  }
  return out;
}

Table parse_stream(std::istream& in, const std::string& origin) {
  Table t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#')
      continue;
    auto fields = split_line(line);
    if (t.header.empty()) {
      t.header = std::move(fields);
      continue;
    }
    if (fields.size() != t.header.size())
      throw ParseError(origin + " line " + std::to_string(lineno) + ": expected " +
                       std::to_string(t.header.size()) + " fields, got " +
                       std::to_string(fields.size()));
    t.rows.push_back(std::move(fields));
  }
  if (t.header.empty())
    throw ParseError(origin + ": empty CSV");
  return t;
}

}  // namespace

Table read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw ParseError("cannot open file: " + path.string());
  return parse_stream(in, path.filename().string());
}

Table read_string(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  return parse_stream(in, origin);
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& token, const std::string& context) {
  double v = 0.0;
  auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size())
    throw ParseError(context + ": non-numeric token '" + token + "'");
  return v;
}

std::optional<double> parse_optional_double(const std::string& token,
                                            const std::string& context) {
  if (token.empty())
    return std::nullopt;
  return parse_double(token, context);
}

std::string join_row(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i)
      out += ',';
    const std::string& f = fields[i];
    if (f.find_first_of(",\"\n") != std::string::npos) {
      out += '"';
      for (char c : f) {
        if (c == '"')
          out += '"';
        out += c;
      }
      out += '"';
    } else {
      out += f;
    }
  }
  return out;
}

std::uint64_t fnv1a_digest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw ParseError("cannot open file: " + path.string());
  std::uint64_t h = 1469598103934665603ULL;
  char buf[4096];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ULL;
    }
    if (!in)
      break;
  }
  return h;
}

}  // namespace vstress::csv
