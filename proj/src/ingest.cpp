#include "econet/ingest.hpp"

#include <string_view>
#include <type_traits>

#include "econet/csv.hpp"

namespace econet {

void FirmDirectory::add(FirmId id, FirmInfo info) {
    if (!firms_.emplace(id, info).second)
        throw DataError("duplicate firm id " + std::to_string(raw(id)));
}

const FirmInfo& FirmDirectory::at(FirmId id) const {
    if (const auto* info = find(id)) return *info;
    throw DataError("unknown firm id " + std::to_string(raw(id)));
}

const FirmInfo* FirmDirectory::find(FirmId id) const {
    auto it = firms_.find(id);
    return it == firms_.end() ? nullptr : &it->second;
}

void CityDirectory::add(CityId id, CityInfo info) {
    if (!cities_.emplace(id, std::move(info)).second)
        throw DataError("duplicate city id " + std::to_string(raw(id)));
}

const CityInfo& CityDirectory::at(CityId id) const {
    if (const auto* info = find(id)) return *info;
    throw DataError("unknown city id " + std::to_string(raw(id)));
}

const CityInfo* CityDirectory::find(CityId id) const {
    auto it = cities_.find(id);
    return it == cities_.end() ? nullptr : &it->second;
}

void CovariatePanel::add(CovariateRow row) {
    const auto key = std::make_pair(row.city, row.year);
    if (rows_.count(key))
        throw DataError("duplicate covariate key (city " + std::to_string(raw(row.city)) + ", year " +
                        std::to_string(row.year) + ")");
    rows_.emplace(key, std::move(row));
}

const CovariateRow* CovariatePanel::find(CityId city, int year) const {
    auto it = rows_.find({city, year});
    return it == rows_.end() ? nullptr : &it->second;
}

void LoadReport::reject(std::size_t line, std::string reason) {
    ++rejected_by_reason[reason];
    rejections.push_back({line, std::move(reason)});
}

namespace {

std::string at_line(const std::filesystem::path& path, std::size_t line) {
    return path.string() + ":" + std::to_string(line) + ": ";
}

std::optional<bool> parse_flag(std::string_view text) {
    if (text == "0") return false;
    if (text == "1") return true;
    return std::nullopt;
}

}  // namespace

CityDirectory load_cities(const std::filesystem::path& path) {
    auto reader = csv::Reader::open(path);
    csv::expect_header(reader, schema::kCities, path);
    CityDirectory cities;
    std::vector<std::string> f;
    while (reader.next(f)) {
        const auto where = at_line(path, reader.line());
        if (f.size() != schema::kCities.size()) throw DataError(where + "wrong column count");
        auto id = csv::parse_int(f[0]);
        if (!id) throw DataError(where + "malformed city id");
        auto region = parse_region(f[3]);
        if (!region) throw DataError(where + "unknown region '" + f[3] + "'");
        auto capital = parse_flag(f[4]);
        if (!capital) throw DataError(where + "is_capital must be 0 or 1");
        try {
            cities.add(CityId{*id}, CityInfo{f[1], f[2], *region, *capital});
        } catch (const DataError& e) {
            throw DataError(where + e.what());
        }
    }
    return cities;
}

FirmDirectory load_firms(const std::filesystem::path& path, const CityDirectory& cities) {
    auto reader = csv::Reader::open(path);
    csv::expect_header(reader, schema::kFirms, path);
    FirmDirectory firms;
    std::vector<std::string> f;
    while (reader.next(f)) {
        const auto where = at_line(path, reader.line());
        if (f.size() != schema::kFirms.size()) throw DataError(where + "wrong column count");
        auto id = csv::parse_int(f[0]);
        auto city = csv::parse_int(f[1]);
        if (!id || !city) throw DataError(where + "malformed identifier");
        if (!cities.contains(CityId{*city}))
            throw DataError(where + "firm refers to unknown city " + f[1]);
        auto flag = parse_flag(f[2]);
        if (!flag) throw DataError(where + "is_public_admin must be 0 or 1");
        try {
            firms.add(FirmId{*id}, FirmInfo{CityId{*city}, *flag});
        } catch (const DataError& e) {
            throw DataError(where + e.what());
        }
    }
    return firms;
}

TransactionLoad load_transactions(const std::filesystem::path& path, const FirmDirectory& firms,
                                  YearRange window) {
    auto reader = csv::Reader::open(path);
    csv::expect_header(reader, schema::kTransactions, path);

    TransactionLoad out;
    auto& report = out.report;
    std::vector<std::string> f;
    while (reader.next(f)) {
        ++report.total_rows;
        const auto line = reader.line();
        if (f.size() != schema::kTransactions.size()) {
            report.reject(line, reason::kColumnCount);
            continue;
        }
        auto date = parse_iso_date(f[0]);
        if (!date) {
            report.reject(line, reason::kMalformedDate);
            continue;
        }
        auto payer = csv::parse_int(f[1]);
        auto payee = csv::parse_int(f[2]);
        if (!payer || !payee) {
            report.reject(line, reason::kMalformedFirm);
            continue;
        }
        auto amount = csv::parse_int(f[3]);
        if (!amount) {
            report.reject(line, reason::kNonNumericAmount);
            continue;
        }
        if (*amount <= 0) {
            report.reject(line, reason::kNonPositiveAmount);
            continue;
        }
        if (*payer == *payee) {
            report.reject(line, reason::kSelfTransfer);
            continue;
        }
        if (!firms.find(FirmId{*payer}) || !firms.find(FirmId{*payee})) {
            report.reject(line, reason::kUnknownFirm);
            continue;
        }
        if (!window.contains(date->year)) {
            report.reject(line, reason::kOutsideWindow);
            continue;
        }
        out.records.push_back({*date, FirmId{*payer}, FirmId{*payee}, *amount});
        ++report.accepted;
    }
    return out;
}

std::vector<TransactionRecord> filter_public_administration(const std::vector<TransactionRecord>& txs,
                                                            const FirmDirectory& firms) {
    std::vector<TransactionRecord> kept;
    kept.reserve(txs.size());
    for (const auto& tx : txs) {
        firms.at(tx.payer);
        if (!firms.at(tx.payee).public_admin) kept.push_back(tx);
    }
    return kept;
}

namespace {

// Parses an optional cell. Returns false when the cell is non-empty but
// malformed.
template <typename T>
bool optional_cell(const std::string& text, std::optional<T>& out) {
    out.reset();
    if (text.empty()) return true;
    if constexpr (std::is_integral_v<T>) {
        auto v = csv::parse_int(text);
        if (!v) return false;
        out = *v;
    } else {
        auto v = csv::parse_double(text);
        if (!v) return false;
        out = *v;
    }
    return true;
}

}  // namespace

CovariateLoad load_covariates(const std::filesystem::path& path, const CityDirectory& cities) {
    auto reader = csv::Reader::open(path);
    csv::expect_header(reader, schema::kCovariates, path);

    CovariateLoad out;
    auto& report = out.report;
    std::vector<std::string> f;
    while (reader.next(f)) {
        ++report.total_rows;
        const auto line = reader.line();
        if (f.size() != schema::kCovariates.size()) {
            report.reject(line, "wrong column count");
            continue;
        }
        auto city = csv::parse_int(f[0]);
        auto year = csv::parse_int(f[1]);
        if (!city || !year) {
            report.reject(line, "malformed key");
            continue;
        }
        if (!cities.contains(CityId{*city})) {
            report.reject(line, "unknown city");
            continue;
        }
        CovariateRow row;
        row.city = CityId{*city};
        row.year = static_cast<int>(*year);

        bool ok = optional_cell(f[2], row.gdp) && optional_cell(f[3], row.exports_over_gdp) &&
                  optional_cell(f[4], row.credit_over_gdp) && optional_cell(f[5], row.gini) &&
                  optional_cell(f[6], row.hdi) && optional_cell(f[7], row.backlog) &&
                  optional_cell(f[8], row.expenditures) && optional_cell(f[9], row.completed_cases);
        for (std::size_t k = 0; ok && k < kCreditSectors; ++k) ok = optional_cell(f[10 + k], row.sector_credit[k]);
        for (std::size_t k = 0; ok && k < kJobSectors; ++k) ok = optional_cell(f[13 + k], row.sector_jobs[k]);
        if (!ok) {
            report.reject(line, "non-numeric value");
            continue;
        }

        const char* bad = nullptr;
        auto unit = [](const std::optional<double>& v) { return v && (*v < 0.0 || *v > 1.0); };
        auto negative = [](const auto& v) { return v && *v < 0; };
        if (unit(row.gini)) bad = "gini out of [0,1]";
        else if (unit(row.hdi)) bad = "hdi out of [0,1]";
        else if (negative(row.exports_over_gdp)) bad = "exports_over_gdp negative";
        else if (negative(row.credit_over_gdp)) bad = "credit_over_gdp negative";
        else if (negative(row.gdp) || negative(row.backlog) || negative(row.expenditures) ||
                 negative(row.completed_cases))
            bad = "negative count or money";
        for (const auto& v : row.sector_credit)
            if (!bad && negative(v)) bad = "negative count or money";
        for (const auto& v : row.sector_jobs)
            if (!bad && negative(v)) bad = "negative count or money";
        if (bad) {
            report.reject(line, bad);
            continue;
        }

        try {
            out.panel.add(std::move(row));
        } catch (const DataError& e) {
            throw DataError(at_line(path, line) + e.what());
        }
        ++report.accepted;
    }
    return out;
}

}  // namespace econet
