#include "csv.hpp"

#include "macromc/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace macromc::detail {

namespace {

std::string trim(const std::string& s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& line)
{
    std::vector<std::string> fields;
    std::string field;
    std::istringstream is(line);
    while (std::getline(is, field, ',')) {
        fields.push_back(trim(field));
    }
    if (!line.empty() && line.back() == ',') {
        fields.emplace_back();
    }
    return fields;
}

double parse_field(const std::string& field, std::size_t line)
{
    if (field.empty()) {
        throw ParseError("empty numeric field", line);
    }
    // strtod is locale-sensitive; from_chars is not
    double value = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    if (*first == '+') {
        ++first;
    }
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) {
        throw ParseError("cannot parse '" + field + "' as a number", line);
    }
    if (!std::isfinite(value)) {
        throw ParseError("non-finite value '" + field + "'", line);
    }
    return value;
}

} // namespace

CsvDocument read_numeric_csv(std::istream& in, const std::vector<std::string>& columns)
{
    CsvDocument doc;
    std::string raw;
    std::size_t line = 0;
    bool have_header = false;
    while (std::getline(in, raw)) {
        ++line;
        const std::string text = trim(raw);
        if (text.empty()) {
            continue;
        }
        if (text.front() == '#') {
            doc.comments.push_back(trim(text.substr(1)));
            continue;
        }
        const auto fields = split(text);
        if (!have_header) {
            if (fields != columns) {
                std::string expected;
                for (const auto& c : columns) {
                    expected += (expected.empty() ? "" : ",") + c;
                }
                throw ParseError("expected header '" + expected + "'", line);
            }
            have_header = true;
            continue;
        }
        if (fields.size() != columns.size()) {
            throw ParseError("expected " + std::to_string(columns.size()) + " fields, found " +
                                 std::to_string(fields.size()),
                             line);
        }
        CsvRow row{line, {}};
        row.values.reserve(fields.size());
        for (const auto& f : fields) {
            row.values.push_back(parse_field(f, line));
        }
        doc.rows.push_back(std::move(row));
    }
    if (!have_header) {
        throw ParseError("missing header line", line);
    }
    return doc;
}

CsvDocument read_numeric_csv(const std::filesystem::path& path, const std::vector<std::string>& columns)
{
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open '" + path.string() + "' for reading");
    }
    return read_numeric_csv(in, columns);
}

std::string format_double(double value)
{
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, ptr);
}

} // namespace macromc::detail
