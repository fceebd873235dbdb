#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace mclab::csv {

// Comma separated text with a header row. Quoted fields ("a,b", "say ""hi""")
// are supported; a trailing CR on each line is dropped.
struct table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  // 1-based line number of each row in the source, for diagnostics.
  std::vector<std::size_t> lines;

  std::optional<std::size_t> column(std::string_view name) const;
};

table parse(std::string_view text);

// Throws io_error when the file cannot be opened.
table read_file(std::string const& path);

// Throws schema_error naming the first missing column.
std::vector<std::size_t> require_columns(
    table const& t, std::vector<std::string_view> const& names,
    std::string_view file_label);

std::string escape(std::string_view field);
void write_row(std::ostream& out, std::vector<std::string> const& fields);

// Shortest round-trip decimal representation.
std::string format_double(double v);

std::optional<double> to_double(std::string_view s);
std::optional<long long> to_int(std::string_view s);

}  // namespace mclab::csv
