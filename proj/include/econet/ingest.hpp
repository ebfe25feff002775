#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "econet/types.hpp"

namespace econet {

// One wire transfer. The payer is the customer, the payee the supplier.
struct TransactionRecord {
    Date date;
    FirmId payer{};
    FirmId payee{};
    Cents amount = 0;

    bool operator==(const TransactionRecord&) const = default;
};

struct FirmInfo {
    CityId city{};
    bool public_admin = false;
};

class FirmDirectory {
public:
    // Throws DataError if the firm is already present.
    void add(FirmId id, FirmInfo info);

    // Throws DataError for an unknown firm.
    const FirmInfo& at(FirmId id) const;
    const FirmInfo* find(FirmId id) const;

    std::size_t size() const { return firms_.size(); }

private:
    std::unordered_map<FirmId, FirmInfo> firms_;
};

struct CityInfo {
    std::string name;
    std::string state;
    Region region = Region::North;
    bool capital = false;
};

class CityDirectory {
public:
    // Throws DataError on a duplicate identifier.
    void add(CityId id, CityInfo info);

    const CityInfo& at(CityId id) const;
    const CityInfo* find(CityId id) const;
    bool contains(CityId id) const { return cities_.count(id) != 0; }

    std::size_t size() const { return cities_.size(); }
    auto begin() const { return cities_.begin(); }
    auto end() const { return cities_.end(); }

private:
    std::map<CityId, CityInfo> cities_;
};

// Sector order follows the covariates.csv columns.
inline constexpr std::size_t kCreditSectors = 3;  // agriculture, manufacturing, services
inline constexpr std::size_t kJobSectors = 5;     // manufacturing, construction, trade, services, agriculture

// Every value cell is optional: an empty cell is recorded as absent.
struct CovariateRow {
    CityId city{};
    int year = 0;
    std::optional<Cents> gdp;
    std::optional<double> exports_over_gdp;
    std::optional<double> credit_over_gdp;
    std::optional<double> gini;
    std::optional<double> hdi;
    std::optional<std::int64_t> backlog;
    std::optional<Cents> expenditures;
    std::optional<std::int64_t> completed_cases;
    std::array<std::optional<Cents>, kCreditSectors> sector_credit;
    std::array<std::optional<std::int64_t>, kJobSectors> sector_jobs;
};

class CovariatePanel {
public:
    // Throws DataError naming the key if (city, year) is already present.
    void add(CovariateRow row);

    const CovariateRow* find(CityId city, int year) const;
    std::size_t size() const { return rows_.size(); }
    auto begin() const { return rows_.begin(); }
    auto end() const { return rows_.end(); }

private:
    std::map<std::pair<CityId, int>, CovariateRow> rows_;
};

struct Rejection {
    std::size_t line = 0;
    std::string reason;
};

// Bookkeeping for a bulk load: accepted + rejected == total data rows.
struct LoadReport {
    std::size_t total_rows = 0;
    std::size_t accepted = 0;
    std::vector<Rejection> rejections;
    std::map<std::string, std::size_t> rejected_by_reason;

    std::size_t rejected() const { return rejections.size(); }
    void reject(std::size_t line, std::string reason);
};

struct TransactionLoad {
    std::vector<TransactionRecord> records;
    LoadReport report;
};

struct CovariateLoad {
    CovariatePanel panel;
    LoadReport report;
};

// Rejection reasons reported by load_transactions.
namespace reason {
inline constexpr const char* kColumnCount = "wrong column count";
inline constexpr const char* kMalformedDate = "malformed date";
inline constexpr const char* kMalformedFirm = "malformed firm id";
inline constexpr const char* kNonNumericAmount = "non-numeric amount";
inline constexpr const char* kNonPositiveAmount = "non-positive amount";
inline constexpr const char* kSelfTransfer = "self transfer";
inline constexpr const char* kUnknownFirm = "unknown firm";
inline constexpr const char* kOutsideWindow = "outside study window";
}  // namespace reason

// CSV headers of the four input files.
namespace schema {
inline const std::vector<std::string_view> kTransactions = {"date", "payer_firm", "payee_firm",
                                                            "amount_cents"};
inline const std::vector<std::string_view> kFirms = {"firm_id", "city_id", "is_public_admin"};
inline const std::vector<std::string_view> kCities = {"city_id", "name", "state", "region",
                                                      "is_capital"};
inline const std::vector<std::string_view> kCovariates = {
    "city_id",         "year",          "gdp_cents",        "exports_over_gdp", "credit_over_gdp",
    "gini",            "hdi",           "backlog",          "expenditures_cents",
    "completed_cases", "credit_agri_cents", "credit_manu_cents", "credit_serv_cents",
    "jobs_manu",       "jobs_constr",   "jobs_trade",       "jobs_serv",        "jobs_agri"};
}  // namespace schema

CityDirectory load_cities(const std::filesystem::path& path);
FirmDirectory load_firms(const std::filesystem::path& path, const CityDirectory& cities);

// Rows failing validation are rejected individually; structural problems
// (unreadable file, bad header) throw DataError.
TransactionLoad load_transactions(const std::filesystem::path& path, const FirmDirectory& firms,
                                  YearRange window);

// Keeps the records whose payee is not a public-administration firm.
std::vector<TransactionRecord> filter_public_administration(const std::vector<TransactionRecord>& txs,
                                                            const FirmDirectory& firms);

CovariateLoad load_covariates(const std::filesystem::path& path, const CityDirectory& cities);

}  // namespace econet
