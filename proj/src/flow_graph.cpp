#include "econet/flow_graph.hpp"

#include <fstream>
#include <stdexcept>

#include "econet/csv.hpp"

namespace econet {

Orientation flipped(Orientation o) {
    return o == Orientation::MoneyFlow ? Orientation::Reversed : Orientation::MoneyFlow;
}

std::string_view to_string(Orientation o) {
    return o == Orientation::MoneyFlow ? "money-flow" : "reversed";
}

std::optional<Orientation> parse_orientation(std::string_view text) {
    if (text == "money-flow" || text == "money_flow") return Orientation::MoneyFlow;
    if (text == "reversed") return Orientation::Reversed;
    return std::nullopt;
}

void FlowGraph::add_flow(CityId from, CityId to, Cents amount) {
    if (amount <= 0) throw std::invalid_argument("flow amount must be positive");
    nodes_.insert(from);
    nodes_.insert(to);
    if (from == to)
        internal_[from] += amount;
    else
        edges_[{from, to}] += amount;
}

Cents FlowGraph::total_volume() const {
    Cents total = 0;
    for (const auto& [pair, w] : edges_) total += w;
    for (const auto& [city, w] : internal_) total += w;
    return total;
}

std::vector<FlowGraph> build_flow_graphs(const std::vector<TransactionRecord>& txs,
                                         const FirmDirectory& firms, YearRange periods) {
    std::vector<FlowGraph> graphs;
    graphs.reserve(static_cast<std::size_t>(periods.size()));
    for (int y = periods.first; y <= periods.last; ++y) graphs.emplace_back(y, Orientation::MoneyFlow);

    for (const auto& tx : txs) {
        if (!periods.contains(tx.date.year)) continue;
        const CityId payer_city = firms.at(tx.payer).city;
        const CityId payee_city = firms.at(tx.payee).city;
        graphs[static_cast<std::size_t>(tx.date.year - periods.first)].add_flow(payer_city, payee_city,
                                                                                 tx.amount);
    }
    return graphs;
}

FlowGraph reverse(const FlowGraph& g) {
    FlowGraph r(g.period(), flipped(g.orientation()));
    for (CityId c : g.nodes()) r.add_node(c);
    for (const auto& [pair, w] : g.edges()) r.add_flow(pair.second, pair.first, w);
    for (const auto& [city, w] : g.internal_volume()) r.add_flow(city, city, w);
    return r;
}

void write_graph_dump(const FlowGraph& g, const std::filesystem::path& dir) {
    const auto year = std::to_string(g.period());
    {
        std::ofstream out(dir / ("flowgraph_" + year + ".csv"), std::ios::binary);
        csv::Writer w(out);
        w.row({"payer_city", "payee_city", "weight_cents"});
        for (const auto& [pair, weight] : g.edges())
            w.field(raw(pair.first)).field(raw(pair.second)).field(weight).end_row();
        if (!out) throw DataError("cannot write graph dump in " + dir.string());
    }
    {
        std::ofstream out(dir / ("internal_" + year + ".csv"), std::ios::binary);
        csv::Writer w(out);
        w.row({"city", "weight_cents"});
        for (const auto& [city, weight] : g.internal_volume()) w.field(raw(city)).field(weight).end_row();
        if (!out) throw DataError("cannot write graph dump in " + dir.string());
    }
}

}  // namespace econet
