#include "econet/types.hpp"

#include <charconv>
#include <cstdio>

namespace econet {

std::string_view to_string(Region r) {
    switch (r) {
        case Region::North: return "North";
        case Region::Northeast: return "Northeast";
        case Region::Midwest: return "Midwest";
        case Region::Southeast: return "Southeast";
        case Region::South: return "South";
    }
    return "?";
}

std::optional<Region> parse_region(std::string_view text) {
    for (Region r : kAllRegions)
        if (text == to_string(r)) return r;
    return std::nullopt;
}

namespace {

bool parse_fixed(std::string_view text, int& out) {
    if (text.empty()) return false;
    for (char c : text)
        if (c < '0' || c > '9') return false;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    return ec == std::errc{} && ptr == text.data() + text.size();
}

bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

}  // namespace

std::optional<Date> parse_iso_date(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
    Date d;
    if (!parse_fixed(text.substr(0, 4), d.year) || !parse_fixed(text.substr(5, 2), d.month) ||
        !parse_fixed(text.substr(8, 2), d.day))
        return std::nullopt;
    static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (d.month < 1 || d.month > 12) return std::nullopt;
    int days = kDays[d.month - 1] + (d.month == 2 && is_leap(d.year) ? 1 : 0);
    if (d.day < 1 || d.day > days) return std::nullopt;
    return d;
}

std::string format_iso_date(const Date& d) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", d.year, d.month, d.day);
    return buf;
}

std::optional<YearRange> parse_year_range(std::string_view text) {
    YearRange r;
    const auto dots = text.find("..");
    if (dots == std::string_view::npos) {
        if (!parse_fixed(text, r.first)) return std::nullopt;
        r.last = r.first;
        return r;
    }
    if (!parse_fixed(text.substr(0, dots), r.first) || !parse_fixed(text.substr(dots + 2), r.last))
        return std::nullopt;
    if (r.last < r.first) return std::nullopt;
    return r;
}

}  // namespace econet
