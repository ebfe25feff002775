#include <doctest.h>

#include <random>

#include "econet/csv.hpp"
#include "econet/flow_graph.hpp"
#include "econet/synth.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace econet;

namespace {

FirmDirectory two_city_firms() {
    FirmDirectory f;
    f.add(FirmId{1}, {CityId{1}, false});
    f.add(FirmId{2}, {CityId{1}, false});
    f.add(FirmId{3}, {CityId{2}, false});
    f.add(FirmId{4}, {CityId{3}, false});
    return f;
}

TransactionRecord tx(int year, int payer, int payee, Cents amount) {
    return {{year, 6, 1}, FirmId{payer}, FirmId{payee}, amount};
}

}  // namespace

TEST_CASE("flows aggregate per year in money-flow orientation") {
    const auto firms = two_city_firms();
    const std::vector<TransactionRecord> txs = {tx(2010, 1, 3, 100), tx(2010, 2, 3, 50), tx(2010, 3, 4, 7),
                                                tx(2010, 1, 2, 30),  tx(2011, 4, 1, 9),  tx(2012, 1, 3, 1)};
    const auto graphs = build_flow_graphs(txs, firms, {2010, 2011});
    REQUIRE(graphs.size() == 2);
    const auto& g = graphs[0];
    CHECK(g.period() == 2010);
    CHECK(g.orientation() == Orientation::MoneyFlow);
    CHECK(g.edges().at({CityId{1}, CityId{2}}) == 150);
    CHECK(g.edges().at({CityId{2}, CityId{3}}) == 7);
    CHECK(g.edge_count() == 2);
    CHECK(g.internal_volume().at(CityId{1}) == 30);
    CHECK(g.total_volume() == 187);
    CHECK(graphs[1].edges().at({CityId{3}, CityId{1}}) == 9);
    CHECK(graphs[1].total_volume() == 9);
}

TEST_CASE("unknown firms during aggregation are an error") {
    const auto firms = two_city_firms();
    CHECK_THROWS_AS(build_flow_graphs({tx(2010, 1, 99, 5)}, firms, {2010, 2010}), DataError);
}

TEST_CASE("add_flow rejects non-positive amounts and never stores self-loops") {
    FlowGraph g(2010, Orientation::MoneyFlow);
    CHECK_THROWS_AS(g.add_flow(CityId{1}, CityId{2}, 0), std::invalid_argument);
    g.add_flow(CityId{1}, CityId{1}, 5);
    CHECK(g.edge_count() == 0);
    CHECK(g.node_count() == 1);
}

TEST_CASE("graph invariants on synthetic transactions") {
    SynthConfig cfg;
    cfg.n_cities = 30;
    cfg.n_firms = 400;
    cfg.years = {2010, 2012};
    const auto data = generate(cfg);
    const auto firms = data.firm_directory();
    const auto graphs = build_flow_graphs(data.transactions, firms, cfg.years);
    for (const auto& g : graphs) {
        Cents expected = 0;
        for (const auto& t : data.transactions)
            if (t.date.year == g.period()) expected += t.amount;
        CHECK(g.total_volume() == expected);
        for (const auto& [pair, w] : g.edges()) {
            CHECK(w > 0);
            CHECK(pair.first != pair.second);
        }
        const auto r = reverse(g);
        CHECK(r.orientation() == Orientation::Reversed);
        CHECK(reverse(r) == g);
        CHECK(r.internal_volume() == g.internal_volume());
        CHECK(r.total_volume() == g.total_volume());
        for (const auto& [pair, w] : g.edges()) CHECK(r.edges().at({pair.second, pair.first}) == w);
    }
}

TEST_CASE("orientation names round-trip") {
    CHECK(parse_orientation("money-flow") == Orientation::MoneyFlow);
    CHECK(parse_orientation(to_string(Orientation::Reversed)) == Orientation::Reversed);
    CHECK_FALSE(parse_orientation("goods"));
    CHECK(flipped(flipped(Orientation::MoneyFlow)) == Orientation::MoneyFlow);
}

TEST_CASE("graph dump files") {
    FlowGraph g(2013, Orientation::MoneyFlow);
    g.add_flow(CityId{2}, CityId{1}, 40);
    g.add_flow(CityId{1}, CityId{2}, 10);
    g.add_flow(CityId{3}, CityId{3}, 6);
    const auto dir = oracle::fresh_dir("netbuild_dump");
    write_graph_dump(g, dir);
    CHECK(fixture::read_text(dir / "flowgraph_2013.csv") == "payer_city,payee_city,weight_cents\n1,2,10\n2,1,40\n");
    CHECK(fixture::read_text(dir / "internal_2013.csv") == "city,weight_cents\n3,6\n");
}
