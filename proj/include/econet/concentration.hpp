#pragma once

#include <optional>
#include <span>
#include <vector>

#include "econet/ingest.hpp"

namespace econet {

// Sum of squared sector shares. Throws std::invalid_argument on a negative
// share and UndefinedResult when the total is zero.
double hhi(std::span<const double> sectors);

double hhi_bank_credit(Cents agriculture, Cents manufacturing, Cents services);

double hhi_jobs(std::int64_t manufacturing, std::int64_t construction, std::int64_t trade,
                std::int64_t services, std::int64_t agriculture);

struct HhiRow {
    CityId city{};
    int year = 0;
    std::optional<double> hhi_bank_credit;  // absent when a sector is missing or the total is zero
    std::optional<double> hhi_jobs;
};

// One row per covariate row, in panel order.
std::vector<HhiRow> compute_hhi(const CovariatePanel& panel);

}  // namespace econet
