#ifndef VSTRESS_CSV_HPP
#define VSTRESS_CSV_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace vstress::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Column index by header name; throws ParseError when absent.
  std::size_t column(const std::string& name) const;
  bool has_column(const std::string& name) const;
};

Table read_file(const std::filesystem::path& path);
Table read_string(const std::string& text, const std::string& origin = "<string>");

// Shortest round-trip decimal form of a double ("0.5", not "0.500000").
std::string format_double(double v);

double parse_double(const std::string& token, const std::string& context);
std::optional<double> parse_optional_double(const std::string& token,
                                            const std::string& context);

std::string join_row(const std::vector<std::string>& fields);

// FNV-1a over a file's bytes, used for the provenance block.
std::uint64_t fnv1a_digest(const std::filesystem::path& path);

}  // namespace vstress::csv

#endif
