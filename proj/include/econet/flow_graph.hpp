#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <utility>
#include <vector>

#include "econet/ingest.hpp"
#include "econet/types.hpp"

namespace econet {

// money_flow: customer city -> supplier city (payer -> payee).
enum class Orientation { MoneyFlow, Reversed };

Orientation flipped(Orientation o);
std::string_view to_string(Orientation o);
std::optional<Orientation> parse_orientation(std::string_view text);

using CityPair = std::pair<CityId, CityId>;

// Directed weighted city graph for one period. Edge weights are strictly
// positive and never self-loops; intra-city money lives in internal_volume.
class FlowGraph {
public:
    FlowGraph() = default;
    FlowGraph(int period, Orientation orientation) : period_(period), orientation_(orientation) {}

    int period() const { return period_; }
    Orientation orientation() const { return orientation_; }

    const std::set<CityId>& nodes() const { return nodes_; }
    const std::map<CityPair, Cents>& edges() const { return edges_; }
    const std::map<CityId, Cents>& internal_volume() const { return internal_; }

    // Adds `amount` to u->v, or to internal volume when u == v. Both
    // endpoints join the node set. Throws std::invalid_argument if amount <= 0.
    void add_flow(CityId from, CityId to, Cents amount);
    void add_node(CityId city) { nodes_.insert(city); }

    std::size_t edge_count() const { return edges_.size(); }
    std::size_t node_count() const { return nodes_.size(); }

    // Edges + internal volume.
    Cents total_volume() const;

    bool operator==(const FlowGraph&) const = default;

private:
    int period_ = 0;
    Orientation orientation_ = Orientation::MoneyFlow;
    std::set<CityId> nodes_;
    std::map<CityPair, Cents> edges_;
    std::map<CityId, Cents> internal_;
};

// One money-flow graph per year in `periods`; transactions outside the range
// are ignored. Throws DataError if a firm does not resolve.
std::vector<FlowGraph> build_flow_graphs(const std::vector<TransactionRecord>& txs,
                                         const FirmDirectory& firms, YearRange periods);

// (u, v, w) -> (v, u, w); internal volume is unchanged.
FlowGraph reverse(const FlowGraph& g);

// Writes flowgraph_<year>.csv and internal_<year>.csv into `dir`.
void write_graph_dump(const FlowGraph& g, const std::filesystem::path& dir);

}  // namespace econet
