#include "econet/pipeline.hpp"

#include <openssl/evp.h>
#include <unistd.h>

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iterator>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "econet/concentration.hpp"
#include "econet/csv.hpp"

#ifndef ECONET_VERSION
#define ECONET_VERSION "0.0.0"
#endif

namespace econet {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Parameters.

std::string_view to_string(AssortativityMode mode) {
    switch (mode) {
        case AssortativityMode::OutIn: return "out-in";
        case AssortativityMode::OutOut: return "out-out";
        case AssortativityMode::InIn: return "in-in";
        case AssortativityMode::InOut: return "in-out";
    }
    return "?";
}

std::optional<AssortativityMode> parse_assortativity_mode(std::string_view text) {
    if (text == "out-in") return AssortativityMode::OutIn;
    if (text == "out-out") return AssortativityMode::OutOut;
    if (text == "in-in") return AssortativityMode::InIn;
    if (text == "in-out") return AssortativityMode::InOut;
    return std::nullopt;
}

namespace {

double number(const std::string& key, const std::string& text) {
    auto v = csv::parse_double(text);
    if (!v) throw UsageError("'" + key + "' expects a number, got '" + text + "'");
    return *v;
}

std::int64_t integer(const std::string& key, const std::string& text) {
    auto v = csv::parse_int(text);
    if (!v) throw UsageError("'" + key + "' expects an integer, got '" + text + "'");
    return *v;
}

bool boolean(const std::string& key, const std::string& text) {
    if (text == "1" || text == "true") return true;
    if (text == "0" || text == "false") return false;
    throw UsageError("'" + key + "' expects true or false, got '" + text + "'");
}

std::string year_text(const YearRange& r) { return std::to_string(r.first) + ".." + std::to_string(r.last); }

}  // namespace

std::map<std::string, std::string> PipelineParams::apply(const std::map<std::string, std::string>& values) {
    std::map<std::string, std::string> rest;
    for (const auto& [key, text] : values) {
        if (key == "years") {
            auto r = parse_year_range(text);
            if (!r) throw UsageError("'years' expects A..B, got '" + text + "'");
            years = *r;
        } else if (key == "damping") {
            pagerank.damping = number(key, text);
        } else if (key == "pagerank_tol") {
            pagerank.tol = number(key, text);
        } else if (key == "pagerank_max_iter") {
            pagerank.max_iter = static_cast<int>(integer(key, text));
        } else if (key == "pagerank_weighted") {
            pagerank.weighted = boolean(key, text);
        } else if (key == "orientation") {
            auto o = parse_orientation(text);
            if (!o) throw UsageError("'orientation' expects money-flow or reversed, got '" + text + "'");
            orientation = *o;
        } else if (key == "assortativity_mode") {
            auto m = parse_assortativity_mode(text);
            if (!m) throw UsageError("'assortativity_mode' expects out-in, out-out, in-in or in-out");
            assortativity = *m;
        } else if (key == "top_k") {
            const auto k = integer(key, text);
            if (k < 1) throw UsageError("'top_k' must be at least 1");
            top_k = static_cast<std::size_t>(k);
        } else if (key == "dea_rts") {
            auto r = parse_returns_to_scale(text);
            if (!r) throw UsageError("'dea_rts' expects crs, nirs or vrs, got '" + text + "'");
            rts = *r;
        } else if (key == "lp_tol") {
            lp_tol = number(key, text);
        } else if (key == "zscore_outcome") {
            zscore_outcome = boolean(key, text);
        } else {
            rest.emplace(key, text);
        }
    }
    return rest;
}

void PipelineParams::validate() const {
    if (!(pagerank.damping > 0.0 && pagerank.damping < 1.0)) throw UsageError("damping must lie in (0,1)");
    if (!(pagerank.tol > 0.0)) throw UsageError("pagerank_tol must be positive");
    if (pagerank.max_iter < 1) throw UsageError("pagerank_max_iter must be at least 1");
    if (!(lp_tol > 0.0)) throw UsageError("lp_tol must be positive");
    if (years && years->size() < 1) throw UsageError("years must be a non-empty range");
}

std::vector<std::pair<std::string, std::string>> PipelineParams::to_entries() const {
    return {{"analysis_years", years ? year_text(*years) : "auto"},
            {"damping", csv::format_double(pagerank.damping)},
            {"pagerank_tol", csv::format_double(pagerank.tol)},
            {"pagerank_max_iter", std::to_string(pagerank.max_iter)},
            {"pagerank_weighted", pagerank.weighted ? "true" : "false"},
            {"orientation", std::string(to_string(orientation))},
            {"assortativity_mode", std::string(to_string(assortativity))},
            {"top_k", std::to_string(top_k)},
            {"dea_rts", std::string(to_string(rts))},
            {"lp_tol", csv::format_double(lp_tol)},
            {"zscore_outcome", zscore_outcome ? "true" : "false"},
            {"tercile_rule", "region GDP sorted by (gdp, city_id), cut at 1/3 and 2/3; <3 cities uses national"}};
}

// ---------------------------------------------------------------------------
// Digests, manifests, staging.

namespace {

class Sha256 {
public:
    Sha256() : ctx_(EVP_MD_CTX_new()) {
        if (!ctx_ || EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr) != 1) throw Error("SHA-256 unavailable");
    }
    ~Sha256() { EVP_MD_CTX_free(ctx_); }
    Sha256(const Sha256&) = delete;
    Sha256& operator=(const Sha256&) = delete;

    void update(const void* data, std::size_t n) {
        if (EVP_DigestUpdate(ctx_, data, n) != 1) throw Error("SHA-256 update failed");
    }
    std::string hex() {
        std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
        unsigned int len = 0;
        if (EVP_DigestFinal_ex(ctx_, md.data(), &len) != 1) throw Error("SHA-256 final failed");
        static constexpr char kDigits[] = "0123456789abcdef";
        std::string out;
        for (unsigned int i = 0; i < len; ++i) {
            out += kDigits[md[i] >> 4];
            out += kDigits[md[i] & 0xF];
        }
        return out;
    }

private:
    EVP_MD_CTX* ctx_;
};

std::string utc_now() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

std::string sha256_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    Sha256 h;
    std::array<char, 1 << 16> buf{};
    while (in) {
        in.read(buf.data(), buf.size());
        h.update(buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    return h.hex();
}

std::string sha256_hex(std::string_view bytes) {
    Sha256 h;
    h.update(bytes.data(), bytes.size());
    return h.hex();
}

RunManifest::RunManifest(std::string command) : command_(std::move(command)), started_(utc_now()) {}

void RunManifest::set(std::string key, std::string value) { facts_.emplace_back(std::move(key), std::move(value)); }

void RunManifest::param(const std::vector<std::pair<std::string, std::string>>& entries) {
    params_.insert(params_.end(), entries.begin(), entries.end());
}

void RunManifest::input(const fs::path& path) { inputs_.emplace_back(path.string(), sha256_file(path)); }

std::string RunManifest::config_hash() const {
    std::string canon;
    for (const auto& [k, v] : params_) canon += k + "=" + v + "\n";
    return sha256_hex(canon);
}

void RunManifest::write(const fs::path& dir) const {
    const auto path = dir / "manifest.csv";
    std::ofstream out(path, std::ios::binary);
    csv::Writer w(out);
    w.row({"key", "value"});
    w.row({"tool", "econet"});
    w.row({"tool_version", ECONET_VERSION});
    w.row({"command", command_});
    w.row({"config_hash", config_hash()});
    for (const auto& [k, v] : params_) w.row({"param." + k, v});
    for (const auto& [k, v] : inputs_) w.row({"input_sha256." + k, v});
    for (const auto& [k, v] : facts_) w.row({k, v});
    w.row({"started_utc", started_});
    w.row({"finished_utc", utc_now()});
    if (!out) throw DataError("cannot write " + path.string());
}

StagedDirectory::StagedDirectory(fs::path final_path) : final_(std::move(final_path)) {
    if (final_.filename().empty()) final_ = final_.parent_path();
    const auto parent = final_.has_parent_path() ? final_.parent_path() : fs::path(".");
    fs::create_directories(parent);
    static std::atomic<int> counter{0};
    staging_ = parent / ("." + final_.filename().string() + ".tmp-" + std::to_string(::getpid()) + "-" +
                         std::to_string(counter++));
    fs::remove_all(staging_);
    fs::create_directory(staging_);
}

StagedDirectory::~StagedDirectory() {
    if (!committed_) {
        std::error_code ec;
        fs::remove_all(staging_, ec);
    }
}

void StagedDirectory::commit() {
    if (fs::exists(final_)) fs::remove_all(final_);
    fs::rename(staging_, final_);
    committed_ = true;
}

void run_stage(std::string_view stage, const std::function<void()>& body) {
    const std::string prefix = std::string(stage) + ": ";
    auto already = [&](const char* what) { return std::string_view(what).starts_with(prefix); };
    try {
        body();
    } catch (const UndefinedResult& e) {
        if (already(e.what())) throw;
        throw UndefinedResult(prefix + e.what());
    } catch (const NumericalError& e) {
        if (already(e.what())) throw;
        throw NumericalError(prefix + e.what());
    } catch (const DataError& e) {
        if (already(e.what())) throw;
        throw DataError(prefix + e.what());
    } catch (const UsageError& e) {
        if (already(e.what())) throw;
        throw UsageError(prefix + e.what());
    } catch (const Error& e) {
        if (already(e.what())) throw;
        throw Error(prefix + e.what());
    } catch (const fs::filesystem_error& e) {
        throw DataError(prefix + e.what());
    } catch (const std::invalid_argument& e) {
        throw UsageError(prefix + e.what());
    }
}

// ---------------------------------------------------------------------------
// Loading.

LoadedDataset load_dataset(const fs::path& dir, const std::optional<YearRange>& years) {
    LoadedDataset data;
    const auto cities = dir / "cities.csv";
    const auto firms = dir / "firms.csv";
    const auto txs = dir / "transactions.csv";
    const auto covs = dir / "covariates.csv";
    for (const auto& p : {cities, firms, txs, covs})
        if (!fs::is_regular_file(p)) throw DataError("missing input file " + p.string());
    data.inputs = {cities, firms, txs, covs};

    data.cities = load_cities(cities);
    data.firms = load_firms(firms, data.cities);
    auto load = load_transactions(txs, data.firms, years.value_or(YearRange{0, 9999}));
    data.transaction_report = std::move(load.report);
    data.transactions = filter_public_administration(load.records, data.firms);
    data.public_admin_dropped = load.records.size() - data.transactions.size();
    auto cov = load_covariates(covs, data.cities);
    data.covariates = std::move(cov.panel);
    data.covariate_report = std::move(cov.report);

    if (years) {
        data.years = *years;
    } else {
        if (data.transactions.empty()) throw DataError(txs.string() + ": no usable transactions");
        int lo = std::numeric_limits<int>::max();
        int hi = std::numeric_limits<int>::min();
        for (const auto& t : data.transactions) {
            lo = std::min(lo, t.date.year);
            hi = std::max(hi, t.date.year);
        }
        data.years = {lo, hi};
    }
    return data;
}

std::vector<FlowGraph> dataset_graphs(const LoadedDataset& data, const PipelineParams& params) {
    auto graphs = build_flow_graphs(data.transactions, data.firms, data.years);
    if (params.orientation == Orientation::Reversed)
        for (auto& g : graphs) g = reverse(g);
    return graphs;
}

namespace {

void record_inputs(RunManifest& m, const std::vector<fs::path>& inputs) {
    for (const auto& p : inputs) m.input(p);
}

void record_report(RunManifest& m, const std::string& prefix, const LoadReport& r) {
    m.set(prefix + ".total_rows", std::to_string(r.total_rows));
    m.set(prefix + ".accepted", std::to_string(r.accepted));
    m.set(prefix + ".rejected", std::to_string(r.rejected()));
}

void write_ingest_report(const LoadedDataset& data, const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    csv::Writer w(out);
    w.row({"file", "item", "count"});
    auto emit = [&](const char* file, const LoadReport& r) {
        w.row({file, "total_rows", std::to_string(r.total_rows)});
        w.row({file, "accepted", std::to_string(r.accepted)});
        for (const auto& [reason, n] : r.rejected_by_reason) w.row({file, "rejected: " + reason, std::to_string(n)});
    };
    emit("transactions.csv", data.transaction_report);
    w.row({"transactions.csv", "dropped: public administration payee", std::to_string(data.public_admin_dropped)});
    emit("covariates.csv", data.covariate_report);
    if (!out) throw DataError("cannot write " + path.string());
}

// measures_<year>.csv files in `dir`, ascending by year.
std::map<int, fs::path> measure_files(const fs::path& dir, const std::string& stem) {
    if (!fs::is_directory(dir)) throw DataError("missing measures directory " + dir.string());
    std::map<int, fs::path> out;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const auto name = entry.path().filename().string();
        if (!name.starts_with(stem + "_") || !name.ends_with(".csv")) continue;
        auto year = csv::parse_int(name.substr(stem.size() + 1, name.size() - stem.size() - 5));
        if (year) out[static_cast<int>(*year)] = entry.path();
    }
    if (out.empty()) throw DataError("no " + stem + "_<year>.csv files in " + dir.string());
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Stages.

void stage_synth(const SynthConfig& config, const fs::path& out) {
    RunManifest m("synth");
    m.param(config.to_entries());
    const auto data = generate(config);
    write_dataset(data, out);
    m.set("transactions", std::to_string(data.transactions.size()));
    m.set("ledger_total_cents", std::to_string(data.ledger_total()));
    m.write(out);
}

void stage_build(const fs::path& dataset, const PipelineParams& params, const fs::path& out) {
    RunManifest m("build");
    m.param(params.to_entries());
    const auto data = load_dataset(dataset, params.years);
    record_inputs(m, data.inputs);
    record_report(m, "transactions", data.transaction_report);
    record_report(m, "covariates", data.covariate_report);
    m.set("years", year_text(data.years));
    for (const auto& g : dataset_graphs(data, params)) write_graph_dump(g, out);
    write_ingest_report(data, out / "ingest_report.csv");
    m.write(out);
}

void stage_measures(const fs::path& dataset, const PipelineParams& params, const fs::path& out) {
    RunManifest m("measures");
    m.param(params.to_entries());
    const auto data = load_dataset(dataset, params.years);
    record_inputs(m, data.inputs);
    record_report(m, "transactions", data.transaction_report);
    m.set("years", year_text(data.years));
    for (const auto& g : dataset_graphs(data, params)) {
        auto set = compute_measures(g, params.pagerank);
        if (params.assortativity != AssortativityMode::OutIn) {
            set.global.assortativity.reset();
            try {
                set.global.assortativity = assortativity(g, params.assortativity);
            } catch (const UndefinedResult&) {
            }
        }
        write_measures_csv(set, out);
        m.set("pagerank_converged." + std::to_string(g.period()), set.pagerank_converged ? "true" : "false");
    }
    m.write(out);
}

void stage_rank(const fs::path& measures, std::string_view measure, int year, std::size_t top_k,
                const std::optional<fs::path>& dataset, const fs::path& out) {
    if (std::find(kMeasureNames.begin(), kMeasureNames.end(), measure) == kMeasureNames.end())
        throw UsageError("unknown measure '" + std::string(measure) + "'");
    if (top_k < 1) throw UsageError("top_k must be at least 1");
    RunManifest m("rank");
    m.param({{"measure", std::string(measure)}, {"year", std::to_string(year)}, {"top_k", std::to_string(top_k)}});

    const auto file = measures / ("measures_" + std::to_string(year) + ".csv");
    if (!fs::is_regular_file(file)) throw DataError("missing input file " + file.string());
    m.input(file);
    CityValues values;
    for (const auto& row : read_measures_csv(file))
        if (auto v = measure_value(row, measure)) values[row.city] = *v;
    if (values.empty()) throw UndefinedResult("measure '" + std::string(measure) + "' is undefined for every city");

    std::optional<CityDirectory> cities;
    if (dataset) {
        const auto path = *dataset / "cities.csv";
        cities = load_cities(path);
        m.input(path);
    }

    const auto ranking = rank_measure(values, top_k);
    const double top = ranking.front().value;
    const auto path = out / ("rank_" + std::string(measure) + "_" + std::to_string(year) + ".csv");
    std::ofstream os(path, std::ios::binary);
    csv::Writer w(os);
    w.row({"rank", "city_id", "name", "state", "region", "value", "relative"});
    for (const auto& e : ranking) {
        w.field(std::int64_t{e.rank}).field(raw(e.city));
        const CityInfo* info = cities ? cities->find(e.city) : nullptr;
        if (info)
            w.field(info->name).field(info->state).field(to_string(info->region));
        else
            w.field("").field("").field("");
        w.field(e.value);
        w.field(top > 0.0 ? std::optional<double>(e.value / top) : std::nullopt);
        w.end_row();
    }
    if (!os) throw DataError("cannot write " + path.string());
    m.write(out);
}

void stage_dea(const fs::path& units, const PipelineParams& params, const fs::path& out) {
    RunManifest m("dea");
    m.param({{"dea_rts", std::string(to_string(params.rts))}, {"lp_tol", csv::format_double(params.lp_tol)}});
    if (!fs::is_regular_file(units)) throw DataError("missing input file " + units.string());
    m.input(units);
    const auto scores = dea_output(read_dea_units(units), params.rts, params.lp_tol);
    write_dea_scores(scores, out / "dea_scores.csv");
    std::size_t failed = 0;
    for (const auto& u : scores.units) failed += u.ok() ? 0 : 1;
    m.set("units", std::to_string(scores.units.size()));
    m.set("units_failed", std::to_string(failed));
    m.write(out);
}

namespace {

void fit_all(const PanelDataset& panel, const std::vector<std::string>& outcomes, const PipelineParams& params,
             RunManifest& m, const fs::path& out) {
    write_panel_csv(panel, out / "panel.csv");
    std::vector<FeRegressionFit> fits;
    for (const auto& o : outcomes) {
        run_stage("outcome " + o, [&] {
            fits.push_back(fit_fe_ols(panel, o, {params.zscore_outcome}));
        });
        write_regression_csv(fits.back(), out);
        m.set("cr_factor." + o, csv::format_double(fits.back().cr_factor));
    }
    write_regression_meta(fits, out);
    m.set("r2_kind", "within");
    m.set("cr_factor_rule", "G/(G-1) * (N-1)/(N-K), K = regressors + absorbed region-year groups");
}

}  // namespace

void stage_regress(const fs::path& dataset, const fs::path& measures, const PipelineParams& params,
                   const fs::path& out) {
    RunManifest m("regress");
    m.param(params.to_entries());
    const auto cities_path = dataset / "cities.csv";
    const auto cov_path = dataset / "covariates.csv";
    for (const auto& p : {cities_path, cov_path})
        if (!fs::is_regular_file(p)) throw DataError("missing input file " + p.string());
    const auto cities = load_cities(cities_path);
    const auto cov = load_covariates(cov_path, cities);
    m.input(cities_path);
    m.input(cov_path);

    std::vector<MeasureRow> rows;
    for (const auto& [year, path] : measure_files(measures, "measures")) {
        if (params.years && !params.years->contains(year)) continue;
        m.input(path);
        auto part = read_measures_csv(path);
        rows.insert(rows.end(), part.begin(), part.end());
    }

    std::set<int> years;
    for (const auto& r : rows) years.insert(r.period);
    std::map<int, DeaScores> dea;
    for (int y : years) {
        const auto inst = courts_instance(cov.panel, cities, y);
        if (inst.units.empty()) continue;
        const auto tag = std::to_string(y);
        write_dea_units(inst, out / ("dea_units_" + tag + ".csv"));
        auto scores = dea_output(inst, params.rts, params.lp_tol);
        write_dea_scores(scores, out / ("dea_scores_" + tag + ".csv"));
        dea.emplace(y, std::move(scores));
    }

    const auto hhi = compute_hhi(cov.panel);
    const auto assembly = assemble_panel(rows, cov.panel, hhi, dea, cities);
    m.set("panel.candidate_rows", std::to_string(assembly.candidate_rows));
    m.set("panel.deleted_rows", std::to_string(assembly.deleted_rows));
    for (const auto& [reason, n] : assembly.deleted_by_reason) m.set("panel.deleted." + reason, std::to_string(n));
    fit_all(assembly.panel, kOutcomeNames, params, m, out);
    m.write(out);
}

void stage_regress_panel(const fs::path& panel, const std::vector<std::string>& outcomes,
                         const PipelineParams& params, const fs::path& out) {
    RunManifest m("regress");
    m.param(params.to_entries());
    if (!fs::is_regular_file(panel)) throw DataError("missing input file " + panel.string());
    m.input(panel);
    const auto data = read_panel_csv(panel, outcomes);
    m.set("panel.rows", std::to_string(data.rows()));
    fit_all(data, outcomes, params, m, out);
    m.write(out);
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw std::invalid_argument("fit_line: x and y differ in length");
    if (x.size() < 2) throw UndefinedResult("line fit needs at least two points");
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (!(sxx > 0.0)) throw UndefinedResult("line fit has constant x");
    LineFit f;
    f.n = x.size();
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    return f;
}

namespace {

std::ofstream open_out(const fs::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot write " + path.string());
    return os;
}

std::optional<double> mean_of(const std::vector<double>& v) {
    if (v.empty()) return std::nullopt;
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::map<int, double> smoothed_or_empty(const std::map<int, double>& series) {
    try {
        return smooth_two_year(series);
    } catch (const std::invalid_argument&) {
        return {};
    }
}

std::optional<double> lookup(const std::map<int, double>& m, int year) {
    auto it = m.find(year);
    if (it == m.end()) return std::nullopt;
    return it->second;
}

}  // namespace

void stage_report(const fs::path& dataset, const fs::path& measures, const fs::path& out) {
    RunManifest m("report");
    const auto cities_path = dataset / "cities.csv";
    const auto cov_path = dataset / "covariates.csv";
    for (const auto& p : {cities_path, cov_path})
        if (!fs::is_regular_file(p)) throw DataError("missing input file " + p.string());
    const auto cities = load_cities(cities_path);
    const auto cov = load_covariates(cov_path, cities).panel;
    m.input(cities_path);
    m.input(cov_path);

    std::map<int, std::vector<MeasureRow>> by_year;
    for (const auto& [year, path] : measure_files(measures, "measures")) {
        m.input(path);
        by_year[year] = read_measures_csv(path);
    }
    std::map<int, GlobalMeasures> globals;
    for (const auto& [year, path] : measure_files(measures, "global")) {
        m.input(path);
        globals[year] = read_global_csv(path);
    }
    for (const auto& [year, rows] : by_year)
        for (const auto& r : rows)
            if (!cities.contains(r.city))
                throw DataError("measures_" + std::to_string(year) + ".csv: city " + std::to_string(raw(r.city)) +
                                " is not in cities.csv");

    {
        auto os = open_out(out / "global_series.csv");
        csv::Writer w(os);
        w.row({"year", "density", "assortativity", "diameter"});
        for (const auto& [year, g] : globals) {
            w.field(std::int64_t{year}).field(g.density).field(g.assortativity);
            if (g.diameter)
                w.field(std::int64_t{*g.diameter});
            else
                w.field("");
            w.end_row();
        }
    }

    // Regional share of centrality, smoothed, then scaled so the largest
    // smoothed value over all regions and years is 1.
    {
        std::map<Region, std::map<int, double>> down, up;
        for (const auto& [year, rows] : by_year) {
            for (Region r : kAllRegions) down[r][year] = up[r][year] = 0.0;
            for (const auto& row : rows) {
                const Region r = cities.at(row.city).region;
                down[r][year] += row.pagerank_down;
                up[r][year] += row.pagerank_up;
            }
        }
        std::map<Region, std::map<int, double>> down_s, up_s;
        double down_max = 0.0, up_max = 0.0;
        for (Region r : kAllRegions) {
            down_s[r] = smoothed_or_empty(down[r]);
            up_s[r] = smoothed_or_empty(up[r]);
            for (const auto& [y, v] : down_s[r]) down_max = std::max(down_max, v);
            for (const auto& [y, v] : up_s[r]) up_max = std::max(up_max, v);
        }
        auto scaled = [](std::optional<double> v, double top) -> std::optional<double> {
            if (!v || !(top > 0.0)) return std::nullopt;
            return *v / top;
        };
        auto os = open_out(out / "centrality_by_region.csv");
        csv::Writer w(os);
        w.row({"region", "year", "pagerank_down", "pagerank_up", "pagerank_down_smoothed", "pagerank_up_smoothed",
               "pagerank_down_normalized", "pagerank_up_normalized"});
        for (Region r : kAllRegions) {
            for (const auto& [year, v] : down[r]) {
                const auto ds = lookup(down_s[r], year);
                const auto us = lookup(up_s[r], year);
                w.field(to_string(r)).field(std::int64_t{year}).field(v).field(up[r].at(year));
                w.field(ds).field(us).field(scaled(ds, down_max)).field(scaled(us, up_max)).end_row();
            }
        }
    }

    // Capitals: downstream centrality relative to the most central city of
    // the year, then smoothed.
    {
        std::map<CityId, std::map<int, double>> raw_down, rel_down;
        for (const auto& [year, rows] : by_year) {
            CityValues values;
            for (const auto& row : rows) values[row.city] = row.pagerank_down;
            CityValues rel;
            try {
                rel = normalize_to_max(values);
            } catch (const UndefinedResult&) {
                continue;
            }
            for (const auto& row : rows) {
                if (!cities.at(row.city).capital) continue;
                raw_down[row.city][year] = row.pagerank_down;
                rel_down[row.city][year] = rel.at(row.city);
            }
        }
        auto os = open_out(out / "capital_centrality.csv");
        csv::Writer w(os);
        w.row({"city_id", "name", "state", "region", "year", "pagerank_down", "relative", "relative_smoothed"});
        for (const auto& [city, series] : rel_down) {
            const auto& info = cities.at(city);
            const auto smooth = smoothed_or_empty(series);
            for (const auto& [year, rel] : series)
                w.field(raw(city))
                    .field(info.name)
                    .field(info.state)
                    .field(to_string(info.region))
                    .field(std::int64_t{year})
                    .field(raw_down[city].at(year))
                    .field(rel)
                    .field(lookup(smooth, year))
                    .end_row();
        }
    }

    // Dependence on external customers / suppliers by regional GDP tercile.
    {
        auto os = open_out(out / "dependence_by_tercile.csv");
        csv::Writer w(os);
        w.row({"year", "region", "size_class", "n_cities", "doec_mean", "does_mean", "national_fallback"});
        for (const auto& [year, rows] : by_year) {
            const auto classes = gdp_terciles(cov, cities, year);
            struct Cell {
                std::size_t n = 0;
                std::vector<double> doec, does;
                bool fallback = false;
            };
            std::map<std::pair<Region, SizeClass>, Cell> cells;
            for (const auto& row : rows) {
                auto it = classes.find(row.city);
                if (it == classes.end()) continue;
                auto& c = cells[{cities.at(row.city).region, it->second.size}];
                ++c.n;
                c.fallback = c.fallback || it->second.global_fallback;
                if (row.doec) c.doec.push_back(*row.doec);
                if (row.does) c.does.push_back(*row.does);
            }
            for (const auto& [key, c] : cells)
                w.field(std::int64_t{year})
                    .field(to_string(key.first))
                    .field(to_string(key.second))
                    .field(static_cast<std::int64_t>(c.n))
                    .field(mean_of(c.doec))
                    .field(mean_of(c.does))
                    .field(std::int64_t{c.fallback})
                    .end_row();
        }
    }

    // Downstream centrality against log GDP, with per-year and pooled fits.
    {
        auto os = open_out(out / "scatter_centrality_gdp.csv");
        csv::Writer w(os);
        w.row({"city_id", "year", "region", "capital", "log_gdp", "pagerank_down"});
        std::map<int, std::pair<std::vector<double>, std::vector<double>>> points;
        std::vector<double> all_x, all_y;
        for (const auto& [year, rows] : by_year) {
            for (const auto& row : rows) {
                const auto* c = cov.find(row.city, year);
                if (!c || !c->gdp || *c->gdp <= 0) continue;
                const double lg = std::log(static_cast<double>(*c->gdp) / 100.0);
                const auto& info = cities.at(row.city);
                w.field(raw(row.city))
                    .field(std::int64_t{year})
                    .field(to_string(info.region))
                    .field(std::int64_t{info.capital})
                    .field(lg)
                    .field(row.pagerank_down)
                    .end_row();
                points[year].first.push_back(lg);
                points[year].second.push_back(row.pagerank_down);
                all_x.push_back(lg);
                all_y.push_back(row.pagerank_down);
            }
        }
        auto fos = open_out(out / "scatter_fit.csv");
        csv::Writer fw(fos);
        fw.row({"scope", "n", "slope", "intercept"});
        auto emit = [&](const std::string& scope, const std::vector<double>& x, const std::vector<double>& y) {
            fw.field(scope).field(static_cast<std::int64_t>(x.size()));
            try {
                const auto f = fit_line(x, y);
                fw.field(f.slope).field(f.intercept);
            } catch (const UndefinedResult&) {
                fw.field("").field("");
            }
            fw.end_row();
        };
        for (const auto& [year, xy] : points) emit(std::to_string(year), xy.first, xy.second);
        emit("all", all_x, all_y);
    }
    m.write(out);
}

void stage_run(const SynthConfig& config, const PipelineParams& params, const fs::path& out) {
    RunManifest m("run");
    m.param(config.to_entries());
    m.param(params.to_entries());
    const auto dataset = out / "dataset";
    const auto graphs = out / "graphs";
    const auto measures = out / "measures";
    const auto regression = out / "regression";
    const auto report = out / "report";
    for (const auto& d : {dataset, graphs, measures, regression, report}) fs::create_directory(d);
    run_stage("synth", [&] { stage_synth(config, dataset); });
    run_stage("build", [&] { stage_build(dataset, params, graphs); });
    run_stage("measures", [&] { stage_measures(dataset, params, measures); });
    run_stage("regress", [&] { stage_regress(dataset, measures, params, regression); });
    run_stage("report", [&] { stage_report(dataset, measures, report); });
    m.write(out);
}

}  // namespace econet
