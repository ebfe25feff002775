#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace econet::csv {

// RFC-4180 reader over an in-memory buffer. Handles quoted fields, doubled
// quotes, embedded separators/newlines and both LF and CRLF endings.
class Reader {
public:
    explicit Reader(std::string text);

    // Reads the whole file; throws DataError if it cannot be opened.
    static Reader open(const std::filesystem::path& path);

    // Fills `fields` with the next record. Returns false at end of input.
    bool next(std::vector<std::string>& fields);

    // 1-based physical line on which the last returned record started.
    std::size_t line() const { return record_line_; }

private:
    std::string text_;
    std::size_t pos_ = 0;
    std::size_t current_line_ = 1;
    std::size_t record_line_ = 0;
};

// Reads the header record and checks it against `expected` exactly.
// Throws DataError naming the file on mismatch or on an empty file.
void expect_header(Reader& reader, const std::vector<std::string_view>& expected,
                   const std::filesystem::path& path);

class Writer {
public:
    explicit Writer(std::ostream& out) : out_(&out) {}

    Writer& field(std::string_view value);
    Writer& field(std::int64_t value);
    Writer& field(double value);
    Writer& field(const std::optional<double>& value);
    void end_row();

    void row(const std::vector<std::string>& fields);

private:
    std::ostream* out_;
    bool first_ = true;
};

// 12 significant digits; non-finite values print as empty cells.
std::string format_double(double value);

std::optional<std::int64_t> parse_int(std::string_view text);
std::optional<double> parse_double(std::string_view text);

}  // namespace econet::csv
