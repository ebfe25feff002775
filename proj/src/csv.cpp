#include "econet/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "econet/types.hpp"

namespace econet::csv {

Reader::Reader(std::string text) : text_(std::move(text)) {
    // Skip a UTF-8 byte-order mark.
    if (text_.size() >= 3 && text_.compare(0, 3, "\xEF\xBB\xBF") == 0) pos_ = 3;
}

Reader Reader::open(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    if (in.bad()) throw DataError("cannot read " + path.string());
    return Reader(buffer.str());
}

bool Reader::next(std::vector<std::string>& fields) {
    fields.clear();
    if (pos_ >= text_.size()) return false;

    record_line_ = current_line_;
    std::string cell;
    bool quoted = false;
    bool cell_was_quoted = false;

    while (pos_ < text_.size()) {
        const char c = text_[pos_];
        if (quoted) {
            if (c == '"') {
                if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '"') {
                    cell.push_back('"');
                    pos_ += 2;
                    continue;
                }
                quoted = false;
                ++pos_;
                continue;
            }
            if (c == '\n') ++current_line_;
            cell.push_back(c);
            ++pos_;
            continue;
        }
        if (c == '"' && cell.empty() && !cell_was_quoted) {
            quoted = true;
            cell_was_quoted = true;
            ++pos_;
            continue;
        }
        if (c == ',') {
            fields.push_back(std::move(cell));
            cell.clear();
            cell_was_quoted = false;
            ++pos_;
            continue;
        }
        if (c == '\r' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '\n') {
            ++pos_;
            continue;
        }
        if (c == '\n') {
            ++pos_;
            ++current_line_;
            fields.push_back(std::move(cell));
            return true;
        }
        cell.push_back(c);
        ++pos_;
    }
    fields.push_back(std::move(cell));
    return true;
}

void expect_header(Reader& reader, const std::vector<std::string_view>& expected,
                   const std::filesystem::path& path) {
    std::vector<std::string> header;
    if (!reader.next(header)) throw DataError(path.string() + ": missing header");
    bool ok = header.size() == expected.size();
    for (std::size_t i = 0; ok && i < header.size(); ++i) ok = header[i] == expected[i];
    if (!ok) {
        std::string want;
        for (std::size_t i = 0; i < expected.size(); ++i) {
            if (i) want += ',';
            want += expected[i];
        }
        throw DataError(path.string() + ": header does not match schema, expected '" + want + "'");
    }
}

Writer& Writer::field(std::string_view value) {
    if (!first_) *out_ << ',';
    first_ = false;
    const bool needs_quotes = value.find_first_of(",\"\r\n") != std::string_view::npos;
    if (!needs_quotes) {
        *out_ << value;
        return *this;
    }
    *out_ << '"';
    for (char c : value) {
        if (c == '"') *out_ << '"';
        *out_ << c;
    }
    *out_ << '"';
    return *this;
}

Writer& Writer::field(std::int64_t value) { return field(std::to_string(value)); }

Writer& Writer::field(double value) { return field(format_double(value)); }

Writer& Writer::field(const std::optional<double>& value) {
    return value ? field(*value) : field(std::string_view{});
}

void Writer::end_row() {
    *out_ << '\n';
    first_ = true;
}

void Writer::row(const std::vector<std::string>& fields) {
    for (const auto& f : fields) field(f);
    end_row();
}

std::string format_double(double value) {
    if (!std::isfinite(value)) return {};
    if (value == 0.0) return "0";  // folds -0
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", value);
    return buf;
}

std::optional<std::int64_t> parse_int(std::string_view text) {
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    std::int64_t value = 0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (text.empty() || ec != std::errc{} || ptr != end) return std::nullopt;
    return value;
}

std::optional<double> parse_double(std::string_view text) {
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    double value = 0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (text.empty() || ec != std::errc{} || ptr != end || !std::isfinite(value)) return std::nullopt;
    return value;
}

}  // namespace econet::csv
