#pragma once

// Cohort export format:
//
//   #cohort=<name>,total=<int>[,width=<int>]
//   term_id,description,count
//   T1,History of abuse,20
//
// `width` is the censoring half-width of every count (default 5, i.e. rounded
// to the nearest ten); width=0 marks an unrounded export. Fields follow
// RFC 4180 quoting.

#include <charconv>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "comorbid/cohort.hpp"
#include "comorbid/errors.hpp"

namespace comorbid {

struct ExportFormat {
  char delimiter = ',';
  // Reject counts that are not multiples of ten. When false they are rounded
  // with a warning instead.
  bool strict = true;
};

namespace detail {

inline std::vector<std::string> split_record(std::string_view line, char delim, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(ch);
      }
    } else if (ch == '"') {
      if (!field.empty() || was_quoted) throw ParseError(line_no, "unexpected quote inside field");
      quoted = was_quoted = true;
    } else if (ch == delim) {
      fields.push_back(std::move(field));
      field.clear();
      was_quoted = false;
    } else {
      if (was_quoted) throw ParseError(line_no, "characters after closing quote");
      field.push_back(ch);
    }
  }
  if (quoted) throw ParseError(line_no, "unterminated quoted field");
  fields.push_back(std::move(field));
  return fields;
}

inline std::string quote_field(std::string_view field, char delim) {
  if (field.find_first_of(std::string{delim, '"', '\n', '\r'}) == std::string_view::npos) {
    return std::string(field);
  }
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out.push_back('"');
    out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

inline std::int64_t parse_integer(std::string_view text, std::size_t line_no, std::string_view what) {
  std::int64_t value = 0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || text.empty()) {
    throw ParseError(line_no, "invalid " + std::string(what) + " '" + std::string(text) + "'");
  }
  return value;
}

// Applies the rounding rule to one raw count.
inline RoundedCount make_count(std::int64_t value, std::int64_t width, const ExportFormat& format,
                               std::size_t line_no, const WarningSink& sink) {
  if (value < 0) {
    throw DomainError("line " + std::to_string(line_no) + ": negative count " + std::to_string(value));
  }
  if (width > 0 && value % 10 != 0) {
    if (format.strict) {
      throw ParseError(line_no, "count " + std::to_string(value) + " is not a multiple of ten");
    }
    const std::int64_t rounded = round_to_ten(value);
    warn(sink, "line " + std::to_string(line_no) + ": rounded count " + std::to_string(value) + " to " +
                   std::to_string(rounded));
    value = rounded;
  }
  return RoundedCount(value, width);
}

}  // namespace detail

inline Cohort parse_cohort_export(std::istream& in, const ExportFormat& format = {}, const WarningSink& sink = {}) {
  std::string line;
  std::size_t line_no = 0;

  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) return true;
    }
    return false;
  };

  if (!next_line()) throw ParseError(line_no + 1, "missing cohort header");
  if (line.rfind("#cohort=", 0) != 0) throw ParseError(line_no, "header must start with '#cohort='");

  std::string name;
  std::optional<std::int64_t> total;
  std::int64_t width = RoundedCount::kDefaultWidth;
  const std::size_t header_line = line_no;
  for (const auto& item : detail::split_record(std::string_view(line).substr(1), format.delimiter, line_no)) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ParseError(line_no, "header item '" + item + "' is not key=value");
    const std::string key = item.substr(0, eq);
    const std::string value = item.substr(eq + 1);
    if (key == "cohort") {
      name = value;
    } else if (key == "total") {
      total = detail::parse_integer(value, line_no, "total");
    } else if (key == "width") {
      width = detail::parse_integer(value, line_no, "width");
      if (width < 0) throw ParseError(line_no, "width must be non-negative");
    } else {
      warn(sink, "line " + std::to_string(line_no) + ": ignoring unknown header key '" + key + "'");
    }
  }
  if (name.empty()) throw ParseError(line_no, "header has empty cohort name");
  if (!total) throw ParseError(line_no, "header is missing total");

  Cohort cohort(name, detail::make_count(*total, width, format, header_line, sink));

  bool first_row = true;
  while (next_line()) {
    auto fields = detail::split_record(line, format.delimiter, line_no);
    if (first_row && fields.size() == 3 && fields[0] == "term_id") {
      first_row = false;
      continue;
    }
    first_row = false;
    if (fields.size() != 3) {
      throw ParseError(line_no, "expected 3 fields (term_id, description, count), got " +
                                    std::to_string(fields.size()));
    }
    if (fields[0].empty()) throw ParseError(line_no, "empty term id");
    const std::int64_t value = detail::parse_integer(fields[2], line_no, "count");
    RoundedCount count = detail::make_count(value, width, format, line_no, sink);
    cohort.add_term({std::move(fields[0]), std::move(fields[1]), count});
  }
  return cohort;
}

inline Cohort read_cohort_file(const std::filesystem::path& path, const ExportFormat& format = {},
                               const WarningSink& sink = {}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(0, "cannot open '" + path.string() + "'");
  return parse_cohort_export(in, format, sink);
}

inline void write_cohort_export(std::ostream& out, const Cohort& cohort, char delim = ',') {
  if (cohort.name().find(delim) != std::string::npos || cohort.name().find('"') != std::string::npos) {
    throw ConfigError("cohort name '" + cohort.name() + "' cannot be written to the export header");
  }
  out << "#cohort=" << cohort.name() << delim << "total=" << cohort.total().reported();
  if (cohort.total().width() != RoundedCount::kDefaultWidth) out << delim << "width=" << cohort.total().width();
  out << '\n' << "term_id" << delim << "description" << delim << "count\n";
  for (const auto& record : cohort.terms()) {
    out << detail::quote_field(record.term_id, delim) << delim << detail::quote_field(record.description, delim)
        << delim << record.count.reported() << '\n';
  }
}

inline void write_cohort_file(const std::filesystem::path& path, const Cohort& cohort, char delim = ',') {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  write_cohort_export(out, cohort, delim);
}

}  // namespace comorbid
