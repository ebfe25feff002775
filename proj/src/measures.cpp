#include "econet/measures.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

#include "econet/csv.hpp"

namespace econet {

namespace {

// Dense 0..N-1 view of a FlowGraph, nodes in ascending city id.
struct IndexedGraph {
    std::vector<CityId> ids;
    std::unordered_map<CityId, std::size_t> index;
    // (target, weight) per source; (source, weight) per target.
    std::vector<std::vector<std::pair<std::size_t, double>>> out;
    std::vector<std::vector<std::pair<std::size_t, double>>> in;

    explicit IndexedGraph(const FlowGraph& g) {
        ids.assign(g.nodes().begin(), g.nodes().end());
        for (std::size_t i = 0; i < ids.size(); ++i) index.emplace(ids[i], i);
        out.resize(ids.size());
        in.resize(ids.size());
        for (const auto& [pair, w] : g.edges()) {
            const auto u = index.at(pair.first);
            const auto v = index.at(pair.second);
            out[u].emplace_back(v, static_cast<double>(w));
            in[v].emplace_back(u, static_cast<double>(w));
        }
    }

    std::size_t size() const { return ids.size(); }
};

}  // namespace

double density(const FlowGraph& g) {
    const auto n = static_cast<double>(g.node_count());
    if (g.node_count() < 2) throw UndefinedResult("density needs at least two nodes");
    return static_cast<double>(g.edge_count()) / (n * (n - 1.0));
}

std::map<CityId, DegreeStrength> degrees_strengths(const FlowGraph& g) {
    std::map<CityId, DegreeStrength> out;
    for (CityId c : g.nodes()) out[c];
    for (const auto& [pair, w] : g.edges()) {
        auto& src = out[pair.first];
        auto& dst = out[pair.second];
        ++src.out_degree;
        src.total_paid += w;
        ++dst.in_degree;
        dst.total_received += w;
    }
    return out;
}

double assortativity(const FlowGraph& g, AssortativityMode mode) {
    if (g.edge_count() < 2) throw UndefinedResult("assortativity needs at least two edges");
    const auto deg = degrees_strengths(g);
    const bool source_out = mode == AssortativityMode::OutIn || mode == AssortativityMode::OutOut;
    const bool target_out = mode == AssortativityMode::OutOut || mode == AssortativityMode::InOut;

    std::vector<double> xs, ys;
    xs.reserve(g.edge_count());
    ys.reserve(g.edge_count());
    for (const auto& [pair, w] : g.edges()) {
        const auto& s = deg.at(pair.first);
        const auto& t = deg.at(pair.second);
        xs.push_back(static_cast<double>(source_out ? s.out_degree : s.in_degree));
        ys.push_back(static_cast<double>(target_out ? t.out_degree : t.in_degree));
    }
    const double m = static_cast<double>(xs.size());
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / m;
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / m;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        const double dx = xs[k] - mx;
        const double dy = ys[k] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) throw UndefinedResult("assortativity undefined: zero degree variance");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

int diameter(const FlowGraph& g) {
    if (g.node_count() == 0) throw UndefinedResult("diameter of an empty graph");
    const IndexedGraph ig(g);
    const std::size_t n = ig.size();

    std::vector<std::vector<std::size_t>> adj(n);
    for (std::size_t u = 0; u < n; ++u)
        for (const auto& [v, w] : ig.out[u]) {
            adj[u].push_back(v);
            adj[v].push_back(u);
        }
    for (auto& a : adj) {
        std::sort(a.begin(), a.end());
        a.erase(std::unique(a.begin(), a.end()), a.end());
    }

    // Components are discovered in ascending id order, so the first largest
    // one contains the smallest id among the ties.
    std::vector<int> comp(n, -1);
    std::vector<std::size_t> best;
    int next = 0;
    for (std::size_t s = 0; s < n; ++s) {
        if (comp[s] >= 0) continue;
        std::vector<std::size_t> members{s};
        comp[s] = next;
        for (std::size_t k = 0; k < members.size(); ++k)
            for (auto v : adj[members[k]])
                if (comp[v] < 0) {
                    comp[v] = next;
                    members.push_back(v);
                }
        if (members.size() > best.size()) best = std::move(members);
        ++next;
    }

    int result = 0;
    std::vector<int> dist(n, -1);
    std::deque<std::size_t> queue;
    for (auto s : best) {
        std::fill(dist.begin(), dist.end(), -1);
        dist[s] = 0;
        queue.assign(1, s);
        while (!queue.empty()) {
            const auto u = queue.front();
            queue.pop_front();
            result = std::max(result, dist[u]);
            for (auto v : adj[u])
                if (dist[v] < 0) {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
        }
    }
    return result;
}

PageRankResult pagerank(const FlowGraph& g, const PageRankOptions& options) {
    if (!(options.damping > 0.0 && options.damping < 1.0))
        throw std::invalid_argument("damping must lie in (0, 1)");
    if (!(options.tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
    if (options.max_iter < 1) throw std::invalid_argument("max_iter must be at least 1");
    if (g.node_count() == 0) throw UndefinedResult("pagerank of an empty graph");

    const IndexedGraph ig(g);
    const std::size_t n = ig.size();
    const double nd = static_cast<double>(n);
    const double alpha = options.damping;

    std::vector<double> strength(n, 0.0);
    for (std::size_t u = 0; u < n; ++u)
        for (const auto& [v, w] : ig.out[u]) strength[u] += options.weighted ? w : 1.0;

    std::vector<double> x(n, 1.0 / nd), next(n);
    PageRankResult result;
    for (int it = 1; it <= options.max_iter; ++it) {
        double dangling = 0.0;
        for (std::size_t u = 0; u < n; ++u)
            if (strength[u] == 0.0) dangling += x[u];
        const double base = (1.0 - alpha) / nd + alpha * dangling / nd;
        for (std::size_t v = 0; v < n; ++v) {
            double acc = 0.0;
            for (const auto& [u, w] : ig.in[v]) acc += x[u] * (options.weighted ? w : 1.0) / strength[u];
            next[v] = base + alpha * acc;
        }
        double change = 0.0;
        for (std::size_t i = 0; i < n; ++i) change += std::abs(next[i] - x[i]);
        x.swap(next);
        result.iterations = it;
        result.residual = change;
        if (change < options.tol) {
            result.converged = true;
            break;
        }
    }

    const double total = std::accumulate(x.begin(), x.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) result.scores.emplace(ig.ids[i], x[i] / total);
    return result;
}

Centrality centrality_both(const FlowGraph& g, const PageRankOptions& options) {
    return {pagerank(g, options), pagerank(reverse(g), options)};
}

std::map<CityId, Dependence> dependence_measures(const FlowGraph& g) {
    const auto deg = degrees_strengths(g);
    std::map<CityId, Dependence> out;
    for (const auto& [city, d] : deg) {
        const auto it = g.internal_volume().find(city);
        const double internal = it == g.internal_volume().end() ? 0.0 : static_cast<double>(it->second);
        const double received = static_cast<double>(d.total_received);
        const double paid = static_cast<double>(d.total_paid);
        Dependence dep;
        if (received + internal > 0.0) dep.doec = received / (received + internal);
        if (paid + internal > 0.0) dep.does = paid / (paid + internal);
        out.emplace(city, dep);
    }
    return out;
}

CityValues normalize_to_max(const CityValues& values) {
    double top = 0.0;
    for (const auto& [c, v] : values) top = std::max(top, v);
    if (!(top > 0.0)) throw UndefinedResult("normalize_to_max needs a positive value");
    CityValues out;
    for (const auto& [c, v] : values) out.emplace(c, v / top);
    return out;
}

std::map<int, double> smooth_two_year(const std::map<int, double>& series) {
    std::map<int, double> out;
    const std::pair<const int, double>* prev = nullptr;
    for (const auto& entry : series) {
        if (prev && entry.first != prev->first + 1)
            throw std::invalid_argument("smooth_two_year needs consecutive years");
        out.emplace(entry.first, prev ? 0.5 * (prev->second + entry.second) : entry.second);
        prev = &entry;
    }
    return out;
}

std::string_view to_string(SizeClass s) {
    switch (s) {
        case SizeClass::Small: return "small";
        case SizeClass::Medium: return "medium";
        case SizeClass::Large: return "large";
    }
    return "?";
}

namespace {

using GdpEntry = std::pair<Cents, CityId>;

SizeClass tercile_of(std::size_t position, std::size_t count) {
    return static_cast<SizeClass>(std::min<std::size_t>(2, 3 * position / count));
}

}  // namespace

std::map<CityId, TercileClass> gdp_terciles(const CovariatePanel& panel, const CityDirectory& cities,
                                            int year) {
    std::map<Region, std::vector<GdpEntry>> by_region;
    std::vector<GdpEntry> national;
    for (const auto& [id, info] : cities) {
        const auto* row = panel.find(id, year);
        if (!row || !row->gdp) continue;
        by_region[info.region].emplace_back(*row->gdp, id);
        national.emplace_back(*row->gdp, id);
    }
    std::sort(national.begin(), national.end());
    std::map<CityId, std::size_t> national_pos;
    for (std::size_t k = 0; k < national.size(); ++k) national_pos[national[k].second] = k;

    std::map<CityId, TercileClass> out;
    for (auto& [region, entries] : by_region) {
        std::sort(entries.begin(), entries.end());
        const bool fallback = entries.size() < 3;
        for (std::size_t k = 0; k < entries.size(); ++k) {
            const auto city = entries[k].second;
            const auto cls = fallback ? tercile_of(national_pos.at(city), national.size())
                                      : tercile_of(k, entries.size());
            out.emplace(city, TercileClass{cls, fallback});
        }
    }
    return out;
}

std::vector<RankEntry> rank_measure(const CityValues& values, std::size_t top_k) {
    std::vector<std::pair<CityId, double>> items;
    for (const auto& [c, v] : values)
        if (!std::isnan(v)) items.emplace_back(c, v);
    std::stable_sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    std::vector<RankEntry> out;
    for (std::size_t k = 0; k < items.size() && k < top_k; ++k)
        out.push_back({static_cast<int>(k + 1), items[k].first, items[k].second});
    return out;
}

MeasureSet compute_measures(const FlowGraph& g, const PageRankOptions& options) {
    MeasureSet set;
    set.global.period = g.period();
    if (g.node_count() == 0) return set;

    const auto deg = degrees_strengths(g);
    const auto dep = dependence_measures(g);
    const auto cen = centrality_both(g, options);
    set.pagerank_converged = cen.downstream.converged && cen.upstream.converged;

    for (const auto& [city, d] : deg) {
        MeasureRow row;
        row.city = city;
        row.period = g.period();
        row.in_degree = d.in_degree;
        row.out_degree = d.out_degree;
        row.total_received = d.total_received;
        row.total_paid = d.total_paid;
        row.pagerank_down = cen.downstream.scores.at(city);
        row.pagerank_up = cen.upstream.scores.at(city);
        row.doec = dep.at(city).doec;
        row.does = dep.at(city).does;
        set.rows.push_back(row);
    }

    try {
        set.global.density = density(g);
    } catch (const UndefinedResult&) {
    }
    try {
        set.global.assortativity = assortativity(g);
    } catch (const UndefinedResult&) {
    }
    set.global.diameter = diameter(g);
    return set;
}

void write_measures_csv(const MeasureSet& set, const std::filesystem::path& dir) {
    const auto year = std::to_string(set.global.period);
    {
        std::ofstream out(dir / ("measures_" + year + ".csv"), std::ios::binary);
        csv::Writer w(out);
        w.row({"city_id", "in_degree", "out_degree", "total_received_cents", "total_paid_cents",
               "pagerank_down", "pagerank_up", "doec", "does"});
        for (const auto& r : set.rows)
            w.field(raw(r.city))
                .field(r.in_degree)
                .field(r.out_degree)
                .field(r.total_received)
                .field(r.total_paid)
                .field(r.pagerank_down)
                .field(r.pagerank_up)
                .field(r.doec)
                .field(r.does)
                .end_row();
        if (!out) throw DataError("cannot write measures in " + dir.string());
    }
    {
        std::ofstream out(dir / ("global_" + year + ".csv"), std::ios::binary);
        csv::Writer w(out);
        w.row({"year", "density", "assortativity", "diameter"});
        w.field(std::int64_t{set.global.period}).field(set.global.density).field(set.global.assortativity);
        if (set.global.diameter)
            w.field(std::int64_t{*set.global.diameter});
        else
            w.field(std::string_view{});
        w.end_row();
        if (!out) throw DataError("cannot write measures in " + dir.string());
    }
}

namespace {

std::optional<double> optional_double(const std::string& text, const std::filesystem::path& path,
                                      std::size_t line) {
    if (text.empty()) return std::nullopt;
    auto v = csv::parse_double(text);
    if (!v) throw DataError(path.string() + ":" + std::to_string(line) + ": malformed number '" + text + "'");
    return v;
}

std::int64_t required_int(const std::string& text, const std::filesystem::path& path, std::size_t line) {
    auto v = csv::parse_int(text);
    if (!v) throw DataError(path.string() + ":" + std::to_string(line) + ": malformed integer '" + text + "'");
    return *v;
}

int year_from_name(const std::filesystem::path& path) {
    const auto stem = path.stem().string();
    const auto us = stem.rfind('_');
    auto y = us == std::string::npos ? std::nullopt : csv::parse_int(stem.substr(us + 1));
    if (!y) throw DataError(path.string() + ": cannot infer the year from the file name");
    return static_cast<int>(*y);
}

}  // namespace

std::vector<MeasureRow> read_measures_csv(const std::filesystem::path& path) {
    auto reader = csv::Reader::open(path);
    csv::expect_header(reader,
                       {"city_id", "in_degree", "out_degree", "total_received_cents", "total_paid_cents",
                        "pagerank_down", "pagerank_up", "doec", "does"},
                       path);
    const int year = year_from_name(path);
    std::vector<MeasureRow> rows;
    std::vector<std::string> f;
    while (reader.next(f)) {
        const auto line = reader.line();
        if (f.size() != 9) throw DataError(path.string() + ":" + std::to_string(line) + ": wrong column count");
        MeasureRow r;
        r.city = CityId{required_int(f[0], path, line)};
        r.period = year;
        r.in_degree = required_int(f[1], path, line);
        r.out_degree = required_int(f[2], path, line);
        r.total_received = required_int(f[3], path, line);
        r.total_paid = required_int(f[4], path, line);
        auto down = optional_double(f[5], path, line);
        auto up = optional_double(f[6], path, line);
        if (!down || !up) throw DataError(path.string() + ":" + std::to_string(line) + ": missing pagerank");
        r.pagerank_down = *down;
        r.pagerank_up = *up;
        r.doec = optional_double(f[7], path, line);
        r.does = optional_double(f[8], path, line);
        rows.push_back(r);
    }
    return rows;
}

GlobalMeasures read_global_csv(const std::filesystem::path& path) {
    auto reader = csv::Reader::open(path);
    csv::expect_header(reader, {"year", "density", "assortativity", "diameter"}, path);
    std::vector<std::string> f;
    if (!reader.next(f) || f.size() != 4) throw DataError(path.string() + ": expected one data row");
    GlobalMeasures gm;
    gm.period = static_cast<int>(required_int(f[0], path, reader.line()));
    gm.density = optional_double(f[1], path, reader.line());
    gm.assortativity = optional_double(f[2], path, reader.line());
    if (!f[3].empty()) gm.diameter = static_cast<int>(required_int(f[3], path, reader.line()));
    return gm;
}

std::optional<double> measure_value(const MeasureRow& row, std::string_view name) {
    if (name == "in_degree") return static_cast<double>(row.in_degree);
    if (name == "out_degree") return static_cast<double>(row.out_degree);
    if (name == "total_received_cents" || name == "total_received") return static_cast<double>(row.total_received);
    if (name == "total_paid_cents" || name == "total_paid") return static_cast<double>(row.total_paid);
    if (name == "pagerank_down") return row.pagerank_down;
    if (name == "pagerank_up") return row.pagerank_up;
    if (name == "doec") return row.doec;
    if (name == "does") return row.does;
    throw UsageError("unknown measure '" + std::string(name) + "'");
}

}  // namespace econet
