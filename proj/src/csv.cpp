#include "tcsim/csv.hpp"

#include <charconv>

#include "tcsim/error.hpp"
#include "tcsim/io.hpp"

namespace tcsim::csv {

std::vector<Row> parse(std::string_view text) {
    std::vector<Row> rows;
    Row row;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;  // distinguishes `""` from an absent field
    std::size_t line = 1;
    row.line = 1;

    auto end_field = [&] {
        row.fields.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_row = [&] {
        bool blank = row.fields.empty() && field.empty() && !field_started;
        if (!blank) {
            end_field();
            rows.push_back(std::move(row));
        }
        row = Row{};
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') ++line;
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
            case '"':
                in_quotes = true;
                field_started = true;
                break;
            case ',':
                end_field();
                break;
            case '\r':
                break;
            case '\n':
                end_row();
                row.line = ++line;
                break;
            default:
                field.push_back(c);
                field_started = true;
        }
    }
    if (in_quotes) throw ParseError("csv: unterminated quoted field starting in record at line " + std::to_string(row.line));
    end_row();
    return rows;
}

std::vector<Row> read_with_header(const std::filesystem::path& path, const std::vector<std::string>& header) {
    auto rows = parse(io::read_file(path));
    if (rows.empty()) throw ParseError(path.string() + ": missing header row, expected " + join_row(header));
    if (rows.front().fields != header)
        throw ParseError(path.string() + ": line 1: unexpected header, expected " + join_row(header));
    rows.erase(rows.begin());
    for (const auto& r : rows) {
        if (r.fields.size() != header.size())
            throw ParseError(path.string() + ": line " + std::to_string(r.line) + ": expected " +
                             std::to_string(header.size()) + " fields, got " + std::to_string(r.fields.size()));
    }
    return rows;
}

std::string escape(std::string_view field) {
    if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::string join_row(const std::vector<std::string>& fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out.push_back(',');
        out += escape(fields[i]);
    }
    return out;
}

std::string number(double v) {
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

}  // namespace tcsim::csv
