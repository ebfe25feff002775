#include "econet/concentration.hpp"

#include <array>
#include <stdexcept>

namespace econet {

double hhi(std::span<const double> sectors) {
    double total = 0.0;
    for (double s : sectors) {
        if (s < 0.0) throw std::invalid_argument("sector values must be non-negative");
        total += s;
    }
    if (total == 0.0) throw UndefinedResult("HHI undefined for a zero total");
    // sum(x^2) / (sum x)^2 rounds once, so k equal sectors give exactly 1/k.
    double squares = 0.0;
    for (double s : sectors) squares += s * s;
    return squares / (total * total);
}

double hhi_bank_credit(Cents agriculture, Cents manufacturing, Cents services) {
    const std::array<double, 3> v{static_cast<double>(agriculture), static_cast<double>(manufacturing),
                                  static_cast<double>(services)};
    return hhi(v);
}

double hhi_jobs(std::int64_t manufacturing, std::int64_t construction, std::int64_t trade,
                std::int64_t services, std::int64_t agriculture) {
    const std::array<double, 5> v{static_cast<double>(manufacturing), static_cast<double>(construction),
                                  static_cast<double>(trade), static_cast<double>(services),
                                  static_cast<double>(agriculture)};
    return hhi(v);
}

namespace {

template <typename T, std::size_t N>
std::optional<double> optional_hhi(const std::array<std::optional<T>, N>& cells) {
    std::array<double, N> v{};
    for (std::size_t k = 0; k < N; ++k) {
        if (!cells[k]) return std::nullopt;
        v[k] = static_cast<double>(*cells[k]);
    }
    try {
        return hhi(v);
    } catch (const UndefinedResult&) {
        return std::nullopt;
    }
}

}  // namespace

std::vector<HhiRow> compute_hhi(const CovariatePanel& panel) {
    std::vector<HhiRow> out;
    out.reserve(panel.size());
    for (const auto& [key, row] : panel)
        out.push_back({row.city, row.year, optional_hhi(row.sector_credit), optional_hhi(row.sector_jobs)});
    return out;
}

}  // namespace econet
