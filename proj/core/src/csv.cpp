#include "mclab/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "mclab/error.hpp"

namespace mclab::csv {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
    s.remove_prefix(1);
  }
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

}  // namespace

std::optional<std::size_t> table::column(std::string_view name) const {
  for (auto i = 0U; i != header.size(); ++i) {
    if (header[i] == name) {
      return i;
    }
  }
  return std::nullopt;
}

table parse(std::string_view text) {
  // Strip a UTF-8 byte order mark.
  if (text.starts_with("\xEF\xBB\xBF")) {
    text.remove_prefix(3);
  }

  table t;
  std::vector<std::string> record;
  std::string field;
  auto in_quotes = false;
  auto line = std::size_t{1};
  auto record_line = line;
  auto field_started = false;

  auto const end_record = [&]() {
    record.push_back(std::string{trim(field)});
    field.clear();
    auto const blank = record.size() == 1 && record.front().empty();
    if (!blank) {
      if (t.header.empty()) {
        t.header = std::move(record);
      } else {
        t.rows.push_back(std::move(record));
        t.lines.push_back(record_line);
      }
    }
    record = {};
    field_started = false;
  };

  for (auto i = std::size_t{0}; i < text.size(); ++i) {
    auto const c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') {
          ++line;
        }
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field_started || trim(field).empty()) {
          field.clear();
          in_quotes = true;
          field_started = true;
        } else {
          field.push_back(c);
        }
        break;
      case ',':
        record.push_back(std::string{trim(field)});
        field.clear();
        field_started = false;
        break;
      case '\n':
        end_record();
        ++line;
        record_line = line;
        break;
      default:
        field.push_back(c);
        field_started = true;
    }
  }
  if (!field.empty() || !record.empty()) {
    end_record();
  }
  return t;
}

table read_file(std::string const& path) {
  std::ifstream in{path, std::ios::binary};
  if (!in) {
    throw io_error{"cannot open " + path};
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) {
    throw io_error{"cannot read " + path};
  }
  return parse(ss.str());
}

std::vector<std::size_t> require_columns(
    table const& t, std::vector<std::string_view> const& names,
    std::string_view file_label) {
  std::vector<std::size_t> idx;
  idx.reserve(names.size());
  for (auto const name : names) {
    auto const c = t.column(name);
    if (!c) {
      throw schema_error{std::string{file_label} + ": missing column \"" +
                         std::string{name} + "\""};
    }
    idx.push_back(*c);
  }
  return idx;
}

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) {
    return std::string{field};
  }
  std::string out = "\"";
  for (auto const c : field) {
    if (c == '"') {
      out += "\"\"";
    } else {
      out.push_back(c);
    }
  }
  out.push_back('"');
  return out;
}

void write_row(std::ostream& out, std::vector<std::string> const& fields) {
  for (auto i = 0U; i != fields.size(); ++i) {
    if (i != 0U) {
      out << ',';
    }
    out << escape(fields[i]);
  }
  out << '\n';
}

std::string format_double(double v) {
  if (v == 0.0) {
    return "0";
  }
  char buf[64];
  auto const [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string{buf, ptr};
}

std::optional<double> to_double(std::string_view s) {
  s = trim(s);
  if (s.empty()) {
    return std::nullopt;
  }
  if (s.front() == '+') {
    s.remove_prefix(1);
  }
  double v = 0.0;
  auto const [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) {
    return std::nullopt;
  }
  return v;
}

std::optional<long long> to_int(std::string_view s) {
  s = trim(s);
  if (s.empty()) {
    return std::nullopt;
  }
  long long v = 0;
  auto const [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    return std::nullopt;
  }
  return v;
}

}  // namespace mclab::csv
