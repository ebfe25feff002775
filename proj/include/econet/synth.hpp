#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "econet/econometrics.hpp"
#include "econet/ingest.hpp"

namespace econet {

struct SynthConfig {
    std::uint64_t seed = 42;
    int n_cities = 150;
    int n_firms = 5000;
    YearRange years{2008, 2017};
    double pareto_alpha = 1.5;
    double gravity_decay = 5.0;
    double intra_city_share = 0.3;
    std::optional<int> recession_year = 2014;
    double recession_kill_fraction = 0.4;
    double mean_tx_per_firm_year = 2.0;
    double public_admin_fraction = 0.02;

    // Throws UsageError naming the offending field.
    void validate() const;

    // Applies "key=value" lines; '#' starts a comment. Unknown keys are
    // returned so callers can reuse one file for several stages.
    std::map<std::string, std::string> apply(const std::map<std::string, std::string>& values);

    std::vector<std::pair<std::string, std::string>> to_entries() const;
};

// Parses a key=value text file. Throws UsageError on malformed lines.
std::map<std::string, std::string> read_key_value_file(const std::filesystem::path& path);

struct SynthCity {
    CityId id{};
    CityInfo info;
    double x = 0.0;  // synthetic coordinates; region r occupies [r, r+1] x [0, 1]
    double y = 0.0;
};

struct SynthFirm {
    FirmId id{};
    CityId city{};
    double size = 1.0;
    bool public_admin = false;
    std::optional<int> death_year;  // no transactions from this year on
};

struct SynthDataset {
    SynthConfig config;
    std::vector<SynthCity> cities;
    std::vector<SynthFirm> firms;
    std::vector<TransactionRecord> transactions;
    std::vector<CovariateRow> covariates;

    Cents ledger_total() const;
    CityDirectory city_directory() const;
    FirmDirectory firm_directory() const;
    CovariatePanel covariate_panel() const;
};

// Deterministic in `config`:
//  * firm sizes ~ Pareto(alpha, x_min = 1); one firm per city first, the rest
//    placed with probability proportional to a lognormal city weight;
//  * each live firm pays Poisson(mean_tx * size / mean live size) times a year; with
//    probability intra_city_share the payee is drawn inside the payer's city,
//    otherwise from other cities with probability proportional to
//    size * exp(-gravity_decay * distance);
//  * from recession_year on the smallest recession_kill_fraction of firms are
//    dead (neither pay nor get paid);
//  * GDP follows the city's live firm mass; credit, jobs, HDI and court data
//    are drawn around it.
SynthDataset generate(const SynthConfig& config);

// Writes transactions.csv, firms.csv, cities.csv, covariates.csv and
// synth_manifest.csv into `dir` (which must exist).
void write_dataset(const SynthDataset& data, const std::filesystem::path& dir);

struct KnownBetaConfig {
    std::uint64_t seed = 1;
    std::vector<double> beta{2.0, -1.0};
    double noise_sd = 0.0;
    int n_cities = 500;
    int n_years = 10;
};

// outcome "y" = region-year effect + beta . x + noise_sd * N(0, 1) with
// regressors x1..xk independent standard normals.
PanelDataset generate_known_beta_panel(const KnownBetaConfig& config);

// panel.csv plus synth_manifest.csv recording the planted beta.
void write_known_beta_panel(const KnownBetaConfig& config, const std::filesystem::path& dir);

}  // namespace econet
