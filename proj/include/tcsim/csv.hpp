#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace tcsim::csv {

/// One parsed CSV record with the 1-based line number it started on.
struct Row {
    std::size_t line = 0;
    std::vector<std::string> fields;
};

/// RFC 4180 reader: quoted fields may contain commas, doubled quotes and
/// newlines. Blank lines are skipped. Throws ParseError on an unterminated
/// quote.
std::vector<Row> parse(std::string_view text);

/// Reads a file and checks that its first record equals `header`.
/// The header row is not included in the result.
std::vector<Row> read_with_header(const std::filesystem::path& path,
                                  const std::vector<std::string>& header);

/// Quotes a field only when it needs quoting.
std::string escape(std::string_view field);

std::string join_row(const std::vector<std::string>& fields);

/// Shortest decimal text that reads back to the same double.
std::string number(double v);

}  // namespace tcsim::csv
