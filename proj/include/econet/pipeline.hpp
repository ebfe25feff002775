#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "econet/dea.hpp"
#include "econet/econometrics.hpp"
#include "econet/flow_graph.hpp"
#include "econet/ingest.hpp"
#include "econet/measures.hpp"
#include "econet/synth.hpp"

namespace econet {

// Numeric and selection parameters shared by the analysis stages.
struct PipelineParams {
    std::optional<YearRange> years;  // default: every year with transactions
    PageRankOptions pagerank;
    Orientation orientation = Orientation::MoneyFlow;
    AssortativityMode assortativity = AssortativityMode::OutIn;
    std::size_t top_k = 30;
    ReturnsToScale rts = ReturnsToScale::NonIncreasing;
    double lp_tol = 1e-9;
    bool zscore_outcome = true;

    // Consumes the keys it knows and returns the rest. Throws UsageError on
    // malformed values.
    std::map<std::string, std::string> apply(const std::map<std::string, std::string>& values);
    void validate() const;
    std::vector<std::pair<std::string, std::string>> to_entries() const;
};

std::string_view to_string(AssortativityMode mode);
std::optional<AssortativityMode> parse_assortativity_mode(std::string_view text);

// Lowercase hex SHA-256 of a file's bytes, or of a string.
std::string sha256_file(const std::filesystem::path& path);
std::string sha256_hex(std::string_view bytes);

// manifest.csv: key,value rows. Timestamps are recorded here and nowhere else.
class RunManifest {
public:
    explicit RunManifest(std::string command);

    void set(std::string key, std::string value);
    void param(const std::vector<std::pair<std::string, std::string>>& entries);
    void input(const std::filesystem::path& path);
    // Hash of the parameter entries recorded so far.
    std::string config_hash() const;
    void write(const std::filesystem::path& dir) const;

private:
    std::string command_;
    std::string started_;
    std::vector<std::pair<std::string, std::string>> params_;
    std::vector<std::pair<std::string, std::string>> inputs_;
    std::vector<std::pair<std::string, std::string>> facts_;
};

// Output directory that appears under its final name only on commit(). The
// staging directory is removed if the object is destroyed uncommitted.
class StagedDirectory {
public:
    explicit StagedDirectory(std::filesystem::path final_path);
    ~StagedDirectory();
    StagedDirectory(const StagedDirectory&) = delete;
    StagedDirectory& operator=(const StagedDirectory&) = delete;

    const std::filesystem::path& path() const { return staging_; }
    // Replaces any existing directory at the final path.
    void commit();

private:
    std::filesystem::path final_;
    std::filesystem::path staging_;
    bool committed_ = false;
};

// Runs `body`, prefixing any error message with the stage name while keeping
// the error's category.
void run_stage(std::string_view stage, const std::function<void()>& body);

struct LoadedDataset {
    CityDirectory cities;
    FirmDirectory firms;
    std::vector<TransactionRecord> transactions;  // public-administration payees removed
    LoadReport transaction_report;
    std::size_t public_admin_dropped = 0;
    CovariatePanel covariates;
    LoadReport covariate_report;
    YearRange years;
    std::vector<std::filesystem::path> inputs;
};

// Reads cities.csv, firms.csv, transactions.csv and covariates.csv from `dir`.
LoadedDataset load_dataset(const std::filesystem::path& dir, const std::optional<YearRange>& years);

std::vector<FlowGraph> dataset_graphs(const LoadedDataset& data, const PipelineParams& params);

// Stage bodies. Each writes its files plus manifest.csv into an existing
// directory `out`.
void stage_synth(const SynthConfig& config, const std::filesystem::path& out);
void stage_build(const std::filesystem::path& dataset, const PipelineParams& params,
                 const std::filesystem::path& out);
void stage_measures(const std::filesystem::path& dataset, const PipelineParams& params,
                    const std::filesystem::path& out);
void stage_rank(const std::filesystem::path& measures, std::string_view measure, int year, std::size_t top_k,
                const std::optional<std::filesystem::path>& dataset, const std::filesystem::path& out);
void stage_dea(const std::filesystem::path& units, const PipelineParams& params, const std::filesystem::path& out);
void stage_regress(const std::filesystem::path& dataset, const std::filesystem::path& measures,
                   const PipelineParams& params, const std::filesystem::path& out);
void stage_regress_panel(const std::filesystem::path& panel, const std::vector<std::string>& outcomes,
                         const PipelineParams& params, const std::filesystem::path& out);
void stage_report(const std::filesystem::path& dataset, const std::filesystem::path& measures,
                  const std::filesystem::path& out);

// dataset/, graphs/, measures/, regression/ and report/ under `out`.
void stage_run(const SynthConfig& config, const PipelineParams& params, const std::filesystem::path& out);

// Two-variable least squares fit used for the scatter plot data.
struct LineFit {
    std::size_t n = 0;
    double slope = 0.0;
    double intercept = 0.0;
};
// Throws UndefinedResult with fewer than two points or constant x.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace econet
