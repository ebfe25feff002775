#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "econet/concentration.hpp"
#include "econet/dea.hpp"
#include "econet/ingest.hpp"
#include "econet/measures.hpp"

namespace econet {

// Outcome and regressor columns of the city-year regression.
inline const std::vector<std::string> kOutcomeNames = {"pagerank_down", "pagerank_up",    "in_degree",
                                                       "out_degree",    "total_received", "total_paid"};
inline const std::vector<std::string> kRegressorNames = {
    "log_gdp", "exports_over_gdp", "credit_over_gdp", "gini", "doec",
    "does",    "hhi_bank",         "hhi_jobs",        "hdi",  "courts_efficiency"};

struct PanelKey {
    CityId city{};  // cluster
    int year = 0;
    Region region = Region::North;  // region x year is the absorbed group
};

// Complete-case city-year panel: no missing cells.
struct PanelDataset {
    std::vector<std::string> outcome_names;
    std::vector<std::string> regressor_names;
    std::vector<PanelKey> keys;
    Eigen::MatrixXd outcomes;    // rows x outcome_names
    Eigen::MatrixXd regressors;  // rows x regressor_names

    std::size_t rows() const { return keys.size(); }
    // Throws UsageError for an unknown outcome.
    std::size_t outcome_index(std::string_view name) const;
    // Throws DataError when the matrices disagree with the key/name vectors.
    void validate() const;
};

/// (x - mean) / sd with the n-1 denominator. Throws UndefinedResult naming
/// `variable` when there are fewer than two values or no variation.
std::vector<double> zscore(std::span<const double> values, std::string_view variable = "value");

// Dense group index per row for region x year; groups are numbered in
// ascending (year, region) order.
struct GroupIndex {
    std::vector<std::size_t> of_row;
    std::size_t count = 0;
};
GroupIndex group_index(const std::vector<PanelKey>& keys);

struct DemeanedPanel {
    Eigen::MatrixXd outcomes;
    Eigen::MatrixXd regressors;
    GroupIndex groups;
    std::vector<bool> singleton;  // row is alone in its group (demeaned to zero)
    std::size_t singleton_rows = 0;
};

/// Subtracts the region x year mean from every column.
DemeanedPanel within_demean(const PanelDataset& panel);

// Demeans the columns of `m` within the given groups.
Eigen::MatrixXd demean_within(const Eigen::MatrixXd& m, const GroupIndex& groups);

struct FitOptions {
    bool zscore_outcome = true;
};

struct FeRegressionFit {
    std::string outcome;
    std::vector<std::string> regressors;
    Eigen::VectorXd beta;
    Eigen::VectorXd se_cluster;
    Eigen::VectorXd t_stat;
    Eigen::MatrixXd vcov;
    Eigen::VectorXd residuals;
    std::size_t n_obs = 0;
    std::size_t n_groups = 0;
    std::size_t n_clusters = 0;
    double r2_within = 0.0;
    double cr_factor = 1.0;  // G/(G-1) * (N-1)/(N-K), K = regressors + groups
    bool outcome_zscored = false;
};

/// OLS on already-demeaned data with city-clustered CR1 variance.
/// `absorbed` is the number of fixed-effect groups removed by demeaning.
/// Throws NumericalError naming the collinear columns on rank deficiency,
/// and when there are fewer than two clusters or no residual degrees of
/// freedom.
FeRegressionFit fit_demeaned(const Eigen::VectorXd& y, const Eigen::MatrixXd& x,
                             std::span<const CityId> clusters, std::size_t absorbed,
                             const std::vector<std::string>& names);

/// Region x year fixed-effects regression of one outcome on every regressor.
FeRegressionFit fit_fe_ols(const PanelDataset& panel, std::string_view outcome,
                           const FitOptions& options = {});

struct PanelAssembly {
    PanelDataset panel;
    std::size_t candidate_rows = 0;
    std::size_t deleted_rows = 0;
    // A deleted row is counted once under every reason that applies.
    std::map<std::string, std::size_t> deleted_by_reason;
};

/// Inner join of network measures with covariates, HHIs and state-level
/// courts efficiency (broadcast to every city of the state). log GDP is the
/// natural log of GDP in currency units. Rows with any missing cell are
/// dropped and counted.
PanelAssembly assemble_panel(const std::vector<MeasureRow>& measures, const CovariatePanel& covariates,
                             const std::vector<HhiRow>& hhi, const std::map<int, DeaScores>& dea_by_year,
                             const CityDirectory& cities);

// State-level courts DEA instance for `year`, one unit per state, taken from
// the covariate rows of the state's cities (which must agree). States with
// incomplete or invalid court data are skipped.
DeaInstance courts_instance(const CovariatePanel& covariates, const CityDirectory& cities, int year);

// panel.csv: city_id,year,region,<outcomes...>,<regressors...>
void write_panel_csv(const PanelDataset& panel, const std::filesystem::path& path);
PanelDataset read_panel_csv(const std::filesystem::path& path, const std::vector<std::string>& outcomes);

// regression_<outcome>.csv and the shared regression_meta.csv.
void write_regression_csv(const FeRegressionFit& fit, const std::filesystem::path& dir);
void write_regression_meta(const std::vector<FeRegressionFit>& fits, const std::filesystem::path& dir);

}  // namespace econet
