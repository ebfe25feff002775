#include <doctest.h>

#include <random>

#include "econet/measures.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace econet;

namespace {

FlowGraph edges_graph(std::initializer_list<std::tuple<int, int, Cents>> edges) {
    FlowGraph g(2010, Orientation::MoneyFlow);
    for (auto [u, v, w] : edges) g.add_flow(CityId{u}, CityId{v}, w);
    return g;
}

double score(const PageRankResult& r, int city) { return r.scores.at(CityId{city}); }

}  // namespace

TEST_CASE("density") {
    CHECK(density(edges_graph({{1, 2, 1}, {2, 1, 1}})) == doctest::Approx(1.0));
    auto g = edges_graph({{1, 2, 1}, {2, 3, 1}});
    g.add_node(CityId{4});
    CHECK(density(g) == doctest::Approx(2.0 / 12.0));
    const double before = density(g);
    g.add_flow(CityId{4}, CityId{1}, 3);
    CHECK(density(g) > before);
    FlowGraph single(2010, Orientation::MoneyFlow);
    single.add_node(CityId{1});
    CHECK_THROWS_AS(density(single), UndefinedResult);
}

TEST_CASE("degrees and strengths exclude internal volume") {
    auto g = edges_graph({{1, 2, 10}, {1, 3, 5}, {3, 2, 2}, {2, 2, 100}});
    const auto d = degrees_strengths(g);
    CHECK(d.at(CityId{1}) == DegreeStrength{0, 2, 0, 15});
    CHECK(d.at(CityId{2}) == DegreeStrength{2, 0, 12, 0});
    CHECK(d.at(CityId{3}) == DegreeStrength{1, 1, 5, 2});
    const auto r = degrees_strengths(reverse(g));
    for (const auto& [c, s] : d) {
        CHECK(r.at(c).in_degree == s.out_degree);
        CHECK(r.at(c).total_received == s.total_paid);
    }
}

TEST_CASE("assortativity") {
    // Star out of a hub: every source has out-degree 3 -> zero variance.
    CHECK_THROWS_AS(assortativity(edges_graph({{1, 2, 1}, {1, 3, 1}, {1, 4, 1}})), UndefinedResult);
    CHECK_THROWS_AS(assortativity(edges_graph({{1, 2, 1}})), UndefinedResult);
    // Hub and spokes in both directions is disassortative.
    const auto g = edges_graph({{1, 2, 1}, {1, 3, 1}, {1, 4, 1}, {2, 1, 1}, {3, 1, 1}, {4, 1, 1}, {2, 3, 1}});
    CHECK(assortativity(g) < 0.0);
    const double r = assortativity(g, AssortativityMode::InIn);
    CHECK(r >= -1.0);
    CHECK(r <= 1.0);

    // 200-node preferential-attachment graph against the edge-list oracle.
    std::mt19937_64 rng(7);
    oracle::Dense d(200);
    std::vector<int> targets = {0};
    for (int v = 1; v < 200; ++v) {
        for (int k = 0; k < 2; ++k) {
            std::uniform_int_distribution<std::size_t> pick(0, targets.size() - 1);
            const int u = targets[pick(rng)];
            if (u == v) continue;
            if (k == 0) d.w[v][u] = 1 + v; else d.w[u][v] = 2 + u;
            targets.push_back(u);
        }
        targets.push_back(v);
    }
    CHECK(assortativity(d.graph()) == doctest::Approx(*oracle::assortativity_out_in(d)).epsilon(1e-12));
}

TEST_CASE("diameter") {
    CHECK(diameter(edges_graph({{1, 2, 1}, {2, 3, 1}, {3, 4, 1}})) == 3);
    FlowGraph k5(2010, Orientation::MoneyFlow);
    for (int u = 1; u <= 5; ++u)
        for (int v = 1; v <= 5; ++v)
            if (u != v) k5.add_flow(CityId{u}, CityId{v}, u * v);
    CHECK(diameter(k5) == 1);
    FlowGraph lone(2010, Orientation::MoneyFlow);
    lone.add_node(CityId{9});
    CHECK(diameter(lone) == 0);
    // Two components of size 3: the one with city 1 wins.
    CHECK(diameter(edges_graph({{5, 6, 1}, {6, 7, 1}, {1, 2, 1}, {1, 3, 1}})) == 2);
    // Weights do not matter.
    CHECK(diameter(edges_graph({{1, 2, 1000}, {2, 3, 1}})) == diameter(edges_graph({{1, 2, 1}, {2, 3, 1}})));

    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int rep = 0; rep < 3; ++rep) {
        oracle::Dense d(100);
        for (int a = 0; a < d.n; ++a)
            for (int b = 0; b < d.n; ++b)
                if (a != b && u(rng) < 0.015) d.w[a][b] = 1;
        CHECK(diameter(d.graph()) == oracle::diameter(d));
    }
}

TEST_CASE("pagerank fixed points") {
    SUBCASE("symmetric two-cycle") {
        const auto r = pagerank(edges_graph({{1, 2, 5}, {2, 1, 5}}));
        CHECK(r.converged);
        CHECK(score(r, 1) == doctest::Approx(0.5).epsilon(1e-12));
    }
    SUBCASE("complete symmetric graph") {
        FlowGraph g(2010, Orientation::MoneyFlow);
        for (int u = 1; u <= 6; ++u)
            for (int v = 1; v <= 6; ++v)
                if (u != v) g.add_flow(CityId{u}, CityId{v}, 3);
        const auto r = pagerank(g);
        for (int c = 1; c <= 6; ++c) CHECK(score(r, c) == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
    }
    SUBCASE("three-node weighted graph matches the dense oracle") {
        oracle::Dense d(3);
        d.w[0][1] = 3;
        d.w[0][2] = 1;
        d.w[1][2] = 4;
        d.w[2][0] = 2;
        const auto r = pagerank(d.graph());
        const auto o = oracle::pagerank(d, 0.85);
        for (int i = 0; i < 3; ++i) CHECK(std::abs(score(r, i + 1) - o[static_cast<std::size_t>(i)]) < 1e-10);
    }
    SUBCASE("bad options") {
        const auto g = edges_graph({{1, 2, 1}});
        CHECK_THROWS_AS(pagerank(g, {1.0, 1e-12, 100, true}), std::invalid_argument);
        CHECK_THROWS_AS(pagerank(g, {0.85, 0.0, 100, true}), std::invalid_argument);
        CHECK_THROWS_AS(pagerank(FlowGraph{}), UndefinedResult);
    }
    SUBCASE("iteration cap is reported") {
        const auto r = pagerank(edges_graph({{1, 2, 1}, {2, 3, 1}, {3, 1, 7}, {1, 3, 2}}), {0.85, 1e-300, 3, true});
        CHECK_FALSE(r.converged);
        CHECK(r.iterations == 3);
    }
}

TEST_CASE("pagerank properties on random graphs") {
    std::mt19937_64 rng(3);
    for (int rep = 0; rep < 40; ++rep) {
        auto d = oracle::random_dense(rng, 8);
        const auto g = d.graph();
        for (double damping : {0.5, 0.85, 0.99}) {
            const auto r = pagerank(g, {damping, 1e-12, 10000, true});
            double sum = 0.0;
            for (const auto& [c, v] : r.scores) {
                CHECK(v >= 0.0);
                sum += v;
            }
            CHECK(std::abs(sum - 1.0) < 1e-9);
        }
        auto scaled = d;
        for (auto& row : scaled.w)
            for (auto& w : row) w *= 37;
        const auto a = pagerank(g);
        const auto b = pagerank(scaled.graph());
        for (const auto& [c, v] : a.scores) CHECK(std::abs(v - b.scores.at(c)) < 1e-12);
    }
}

TEST_CASE("downstream and upstream centrality") {
    SUBCASE("symmetric graph") {
        const auto c = centrality_both(edges_graph({{1, 2, 4}, {2, 1, 4}, {2, 3, 1}, {3, 2, 1}}));
        for (int i = 1; i <= 3; ++i) CHECK(score(c.downstream, i) == doctest::Approx(score(c.upstream, i)));
    }
    SUBCASE("pure sink") {
        oracle::Dense d(3);
        d.w[0][2] = 5;
        d.w[1][2] = 2;
        d.w[0][1] = 1;
        const auto c = centrality_both(d.graph());
        const auto down = oracle::pagerank(d, 0.85);
        const auto up = oracle::pagerank(d, 0.85, 1000, true);
        CHECK(std::abs(score(c.downstream, 3) - down[2]) < 1e-10);
        CHECK(std::abs(score(c.upstream, 3) - up[2]) < 1e-10);
        CHECK(score(c.downstream, 3) > score(c.upstream, 3));
    }
    SUBCASE("one edge") {
        const auto c = centrality_both(edges_graph({{1, 2, 9}}));
        CHECK(score(c.downstream, 2) > score(c.downstream, 1));
    }
}

TEST_CASE("dependence measures") {
    auto g = edges_graph({{1, 2, 30}, {3, 2, 10}, {2, 1, 5}});
    g.add_flow(CityId{2}, CityId{2}, 40);
    g.add_flow(CityId{4}, CityId{4}, 8);
    const auto d = dependence_measures(g);
    CHECK(*d.at(CityId{2}).doec == doctest::Approx(40.0 / 80.0));
    CHECK(*d.at(CityId{2}).does == doctest::Approx(5.0 / 45.0));
    CHECK(*d.at(CityId{1}).doec == doctest::Approx(1.0));  // receipts, no internal volume
    CHECK_FALSE(d.at(CityId{3}).doec.has_value());
    CHECK(*d.at(CityId{4}).doec == 0.0);
    CHECK(*d.at(CityId{4}).does == 0.0);

    // Adding internal volume lowers both measures.
    auto more = g;
    more.add_flow(CityId{2}, CityId{2}, 1);
    const auto m = dependence_measures(more);
    CHECK(*m.at(CityId{2}).doec < *d.at(CityId{2}).doec);
    CHECK(*m.at(CityId{2}).does < *d.at(CityId{2}).does);

    // 20-city random graph against the hand formula.
    std::mt19937_64 rng(5);
    auto dense = oracle::random_dense(rng, 20, 0.3);
    const auto dm = dependence_measures(dense.graph());
    for (int i = 0; i < dense.n; ++i) {
        const double in = static_cast<double>(dense.in_strength(i));
        const double out = static_cast<double>(dense.out_strength(i));
        const double internal = static_cast<double>(dense.internal[static_cast<std::size_t>(i)]);
        const auto& got = dm.at(CityId{i + 1});
        if (in + internal > 0) {
            REQUIRE(got.doec);
            CHECK(std::abs(*got.doec - in / (in + internal)) < 1e-12);
            CHECK(*got.doec >= 0.0);
            CHECK(*got.doec <= 1.0);
        } else {
            CHECK_FALSE(got.doec);
        }
        if (out + internal > 0) {
            REQUIRE(got.does);
            CHECK(std::abs(*got.does - out / (out + internal)) < 1e-12);
        } else {
            CHECK_FALSE(got.does);
        }
    }
}

TEST_CASE("normalize_to_max") {
    const auto n = normalize_to_max({{CityId{1}, 2.0}, {CityId{2}, 1.0}, {CityId{3}, 0.5}});
    CHECK(n.at(CityId{1}) == 1.0);
    CHECK(n.at(CityId{2}) == 0.5);
    CHECK(n.at(CityId{3}) == 0.25);
    CHECK(normalize_to_max({{CityId{4}, 0.3}}).at(CityId{4}) == 1.0);
    CHECK_THROWS_AS(normalize_to_max({{CityId{1}, 0.0}}), UndefinedResult);
}

TEST_CASE("two-year smoothing") {
    CHECK(smooth_two_year({{2003, 0.0}, {2004, 2.0}}) == std::map<int, double>{{2003, 0.0}, {2004, 1.0}});
    CHECK(smooth_two_year({{2003, 4.0}, {2004, 4.0}, {2005, 4.0}}) ==
          std::map<int, double>{{2003, 4.0}, {2004, 4.0}, {2005, 4.0}});
    CHECK(smooth_two_year({}).empty());
    CHECK_THROWS_AS(smooth_two_year({{2003, 1.0}, {2005, 1.0}}), std::invalid_argument);

    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 10.0);
    std::map<int, double> s;
    for (int y = 2000; y < 2010; ++y) s[y] = u(rng);
    const auto out = smooth_two_year(s);
    // Rolling-mean oracle over a plain array.
    std::vector<double> v;
    for (const auto& [y, x] : s) v.push_back(x);
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double expected = i == 0 ? v[0] : (v[i] + v[i - 1]) / 2.0;
        CHECK(out.at(2000 + static_cast<int>(i)) == doctest::Approx(expected).epsilon(1e-15));
    }
}

TEST_CASE("gdp terciles") {
    CityDirectory cities;
    CovariatePanel panel;
    auto add = [&](int id, Region r, std::optional<Cents> gdp) {
        cities.add(CityId{id}, {"c" + std::to_string(id), "S", r, false});
        CovariateRow row;
        row.city = CityId{id};
        row.year = 2010;
        row.gdp = gdp;
        panel.add(row);
    };
    add(1, Region::North, 1);
    add(2, Region::North, 2);
    add(3, Region::North, 3);
    add(4, Region::South, 5);  // equal GDPs: split by id
    add(5, Region::South, 5);
    add(6, Region::South, 5);
    add(7, Region::Midwest, 100);  // only one city in the region
    add(8, Region::South, std::nullopt);
    const auto t = gdp_terciles(panel, cities, 2010);
    CHECK(t.at(CityId{1}).size == SizeClass::Small);
    CHECK(t.at(CityId{2}).size == SizeClass::Medium);
    CHECK(t.at(CityId{3}).size == SizeClass::Large);
    CHECK(t.at(CityId{4}).size == SizeClass::Small);
    CHECK(t.at(CityId{5}).size == SizeClass::Medium);
    CHECK(t.at(CityId{6}).size == SizeClass::Large);
    CHECK(t.at(CityId{7}).global_fallback);
    CHECK(t.at(CityId{7}).size == SizeClass::Large);
    CHECK_FALSE(t.at(CityId{1}).global_fallback);
    CHECK(t.count(CityId{8}) == 0);

    // 30-city region against a sort-based oracle.
    CityDirectory big_cities;
    CovariatePanel big;
    std::mt19937_64 rng(2);
    std::uniform_int_distribution<Cents> g(1, 20);
    std::vector<std::pair<Cents, int>> order;
    for (int id = 1; id <= 30; ++id) {
        big_cities.add(CityId{id}, {"x", "S", Region::Southeast, false});
        CovariateRow row;
        row.city = CityId{id};
        row.year = 2011;
        row.gdp = g(rng);
        order.emplace_back(*row.gdp, id);
        big.add(row);
    }
    std::sort(order.begin(), order.end());
    const auto bt = gdp_terciles(big, big_cities, 2011);
    std::map<SizeClass, int> counts;
    for (std::size_t k = 0; k < order.size(); ++k) {
        const auto expected = k < 10 ? SizeClass::Small : k < 20 ? SizeClass::Medium : SizeClass::Large;
        CHECK(bt.at(CityId{order[k].second}).size == expected);
        ++counts[bt.at(CityId{order[k].second}).size];
    }
    CHECK(counts[SizeClass::Small] == 10);
    CHECK(counts[SizeClass::Large] == 10);
}

TEST_CASE("rank_measure") {
    const auto r = rank_measure({{CityId{1}, 3.0}, {CityId{2}, 1.0}, {CityId{3}, 2.0}}, 2);
    CHECK(r == std::vector<RankEntry>{{1, CityId{1}, 3.0}, {2, CityId{3}, 2.0}});
    const auto ties = rank_measure({{CityId{2}, 1.0}, {CityId{1}, 1.0}}, 2);
    CHECK(ties[0].city == CityId{1});
    CHECK(ties[1].city == CityId{2});

    std::mt19937_64 rng(4);
    std::uniform_int_distribution<int> u(0, 30);
    CityValues values;
    std::vector<std::pair<double, std::int64_t>> sorted;
    for (int id = 1; id <= 100; ++id) {
        const double v = u(rng);
        values[CityId{id}] = v;
        sorted.emplace_back(-v, id);
    }
    std::sort(sorted.begin(), sorted.end());
    const auto top = rank_measure(values, 25);
    REQUIRE(top.size() == 25);
    for (std::size_t k = 0; k < top.size(); ++k) {
        CHECK(top[k].rank == static_cast<int>(k + 1));
        CHECK(raw(top[k].city) == sorted[k].second);
    }
}

TEST_CASE("measure tables round-trip through CSV") {
    auto g = edges_graph({{1, 2, 30}, {3, 2, 10}, {2, 1, 5}, {1, 3, 2}});
    g.add_flow(CityId{2}, CityId{2}, 40);
    const auto set = compute_measures(g);
    const auto dir = oracle::fresh_dir("measures_csv");
    write_measures_csv(set, dir);
    const auto rows = read_measures_csv(dir / "measures_2010.csv");
    REQUIRE(rows.size() == set.rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].city == set.rows[i].city);
        CHECK(rows[i].period == 2010);
        CHECK(rows[i].total_received == set.rows[i].total_received);
        CHECK(rows[i].pagerank_down == doctest::Approx(set.rows[i].pagerank_down).epsilon(1e-11));
        CHECK(rows[i].doec.has_value() == set.rows[i].doec.has_value());
    }
    const auto global = read_global_csv(dir / "global_2010.csv");
    CHECK(global.period == 2010);
    CHECK(*global.diameter == *set.global.diameter);
    CHECK(*global.density == doctest::Approx(*set.global.density));
    CHECK(measure_value(set.rows[0], "pagerank_up") == set.rows[0].pagerank_up);
    CHECK_THROWS_AS(measure_value(set.rows[0], "betweenness"), UsageError);
}
