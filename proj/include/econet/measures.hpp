#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <vector>

#include "econet/flow_graph.hpp"
#include "econet/ingest.hpp"

namespace econet {

using CityValues = std::map<CityId, double>;

/// E / (N (N - 1)) over directed inter-city edges.
/// Throws UndefinedResult when the graph has fewer than two nodes.
double density(const FlowGraph& g);

// Internal volume is excluded from all four quantities. On the money-flow
// orientation in-neighbours are customers and out-neighbours are suppliers.
struct DegreeStrength {
    std::int64_t in_degree = 0;
    std::int64_t out_degree = 0;
    Cents total_received = 0;
    Cents total_paid = 0;

    bool operator==(const DegreeStrength&) const = default;
};

std::map<CityId, DegreeStrength> degrees_strengths(const FlowGraph& g);

// Which degree is taken at the source and at the target of each edge.
enum class AssortativityMode { OutIn, OutOut, InIn, InOut };

/// Pearson correlation over directed edges u->v between deg(u) and deg(v),
/// unweighted. Throws UndefinedResult for fewer than two edges or zero
/// variance at either end.
double assortativity(const FlowGraph& g, AssortativityMode mode = AssortativityMode::OutIn);

/// Longest shortest-path hop count inside the largest connected component of
/// the undirected, unweighted projection. Ties between equally large
/// components go to the one holding the smallest city id.
/// Throws UndefinedResult on an empty graph.
int diameter(const FlowGraph& g);

struct PageRankOptions {
    double damping = 0.85;
    double tol = 1e-12;
    int max_iter = 10000;
    bool weighted = true;
};

struct PageRankResult {
    CityValues scores;
    bool converged = false;
    int iterations = 0;
    double residual = 0.0;  // last L1 change
};

/// Power iteration with transition w(u->v) / out_strength(u). Dangling cities
/// spread their mass uniformly over all nodes. Stops when the L1 change drops
/// below tol; a run that hits max_iter returns with converged == false.
/// Throws std::invalid_argument on bad options and UndefinedResult on an
/// empty graph.
PageRankResult pagerank(const FlowGraph& g, const PageRankOptions& options = {});

struct Centrality {
    PageRankResult downstream;  // on g
    PageRankResult upstream;    // on reverse(g)
};

Centrality centrality_both(const FlowGraph& g, const PageRankOptions& options = {});

// Absent when the denominator is zero.
struct Dependence {
    std::optional<double> doec;
    std::optional<double> does;
};

/// doec = external received / (external received + internal volume),
/// does = external paid / (external paid + internal volume).
std::map<CityId, Dependence> dependence_measures(const FlowGraph& g);

/// Divides by the maximum. Throws UndefinedResult when no value is positive.
CityValues normalize_to_max(const CityValues& values);

/// Trailing mean over the current and previous year; the first year is kept.
/// Throws std::invalid_argument if the years are not consecutive.
std::map<int, double> smooth_two_year(const std::map<int, double>& series);

enum class SizeClass { Small, Medium, Large };
std::string_view to_string(SizeClass s);

struct TercileClass {
    SizeClass size = SizeClass::Small;
    bool global_fallback = false;  // region had fewer than 3 cities
};

/// Region-specific GDP terciles for `year`: sort by (GDP, city id) and cut at
/// 1/3 and 2/3. Cities without GDP for the year are left out. Regions with
/// fewer than three cities fall back to the national ordering.
std::map<CityId, TercileClass> gdp_terciles(const CovariatePanel& panel, const CityDirectory& cities,
                                            int year);

struct RankEntry {
    int rank = 0;
    CityId city{};
    double value = 0.0;

    bool operator==(const RankEntry&) const = default;
};

/// Descending by value, ties by ascending city id, truncated to top_k.
std::vector<RankEntry> rank_measure(const CityValues& values, std::size_t top_k);

// ---------------------------------------------------------------------------
// Per-period tables.

struct MeasureRow {
    CityId city{};
    int period = 0;
    std::int64_t in_degree = 0;
    std::int64_t out_degree = 0;
    Cents total_received = 0;
    Cents total_paid = 0;
    double pagerank_down = 0.0;
    double pagerank_up = 0.0;
    std::optional<double> doec;
    std::optional<double> does;
};

struct GlobalMeasures {
    int period = 0;
    std::optional<double> density;
    std::optional<double> assortativity;
    std::optional<int> diameter;
};

struct MeasureSet {
    std::vector<MeasureRow> rows;  // ascending city id
    GlobalMeasures global;
    bool pagerank_converged = true;
};

// Every measure for one graph. Undefined global measures are left absent.
MeasureSet compute_measures(const FlowGraph& g, const PageRankOptions& options = {});

void write_measures_csv(const MeasureSet& set, const std::filesystem::path& dir);
std::vector<MeasureRow> read_measures_csv(const std::filesystem::path& path);
GlobalMeasures read_global_csv(const std::filesystem::path& path);

// Named accessors used by the ranking and regression front-ends.
inline const std::vector<std::string_view> kMeasureNames = {
    "in_degree", "out_degree", "total_received_cents", "total_paid_cents",
    "pagerank_down", "pagerank_up", "doec", "does"};

std::optional<double> measure_value(const MeasureRow& row, std::string_view name);

}  // namespace econet
