#include "econet/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include "econet/csv.hpp"

namespace econet {

void SynthConfig::validate() const {
    auto fail = [](const std::string& what) { throw UsageError("invalid synth config: " + what); };
    if (n_cities < 5) fail("n_cities must be at least 5");
    if (n_firms < n_cities) fail("n_firms must be at least n_cities");
    if (years.size() < 1) fail("years must be a non-empty range");
    if (!(pareto_alpha > 1.0)) fail("pareto_alpha must exceed 1");
    if (!(gravity_decay >= 0.0)) fail("gravity_decay must be non-negative");
    if (!(intra_city_share >= 0.0 && intra_city_share <= 1.0)) fail("intra_city_share must lie in [0,1]");
    if (!(recession_kill_fraction >= 0.0 && recession_kill_fraction <= 1.0))
        fail("recession_kill_fraction must lie in [0,1]");
    if (!(mean_tx_per_firm_year > 0.0)) fail("mean_tx_per_firm_year must be positive");
    if (!(public_admin_fraction >= 0.0 && public_admin_fraction < 1.0))
        fail("public_admin_fraction must lie in [0,1)");
}

namespace {

double to_double_or_throw(const std::string& key, const std::string& text) {
    auto v = csv::parse_double(text);
    if (!v) throw UsageError("config key '" + key + "' expects a number, got '" + text + "'");
    return *v;
}

std::int64_t to_int_or_throw(const std::string& key, const std::string& text) {
    auto v = csv::parse_int(text);
    if (!v) throw UsageError("config key '" + key + "' expects an integer, got '" + text + "'");
    return *v;
}

std::string fmt(double v) { return csv::format_double(v); }

}  // namespace

std::map<std::string, std::string> SynthConfig::apply(const std::map<std::string, std::string>& values) {
    std::map<std::string, std::string> rest;
    for (const auto& [key, text] : values) {
        if (key == "seed") {
            seed = static_cast<std::uint64_t>(to_int_or_throw(key, text));
        } else if (key == "n_cities") {
            n_cities = static_cast<int>(to_int_or_throw(key, text));
        } else if (key == "n_firms") {
            n_firms = static_cast<int>(to_int_or_throw(key, text));
        } else if (key == "years") {
            auto r = parse_year_range(text);
            if (!r) throw UsageError("config key 'years' expects A..B, got '" + text + "'");
            years = *r;
        } else if (key == "pareto_alpha") {
            pareto_alpha = to_double_or_throw(key, text);
        } else if (key == "gravity_decay") {
            gravity_decay = to_double_or_throw(key, text);
        } else if (key == "intra_city_share") {
            intra_city_share = to_double_or_throw(key, text);
        } else if (key == "recession_year") {
            if (text.empty() || text == "none")
                recession_year.reset();
            else
                recession_year = static_cast<int>(to_int_or_throw(key, text));
        } else if (key == "recession_kill_fraction") {
            recession_kill_fraction = to_double_or_throw(key, text);
        } else if (key == "mean_tx_per_firm_year") {
            mean_tx_per_firm_year = to_double_or_throw(key, text);
        } else if (key == "public_admin_fraction") {
            public_admin_fraction = to_double_or_throw(key, text);
        } else {
            rest.emplace(key, text);
        }
    }
    return rest;
}

std::vector<std::pair<std::string, std::string>> SynthConfig::to_entries() const {
    return {{"seed", std::to_string(seed)},
            {"n_cities", std::to_string(n_cities)},
            {"n_firms", std::to_string(n_firms)},
            {"years", std::to_string(years.first) + ".." + std::to_string(years.last)},
            {"pareto_alpha", fmt(pareto_alpha)},
            {"gravity_decay", fmt(gravity_decay)},
            {"intra_city_share", fmt(intra_city_share)},
            {"recession_year", recession_year ? std::to_string(*recession_year) : "none"},
            {"recession_kill_fraction", fmt(recession_kill_fraction)},
            {"mean_tx_per_firm_year", fmt(mean_tx_per_firm_year)},
            {"public_admin_fraction", fmt(public_admin_fraction)}};
}

std::map<std::string, std::string> read_key_value_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file " + path.string());
    std::map<std::string, std::string> out;
    std::string line;
    int n = 0;
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return std::string{};
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        ++n;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw UsageError(path.string() + ":" + std::to_string(n) + ": expected key=value");
        out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return out;
}

Cents SynthDataset::ledger_total() const {
    Cents total = 0;
    for (const auto& t : transactions) total += t.amount;
    return total;
}

CityDirectory SynthDataset::city_directory() const {
    CityDirectory dir;
    for (const auto& c : cities) dir.add(c.id, c.info);
    return dir;
}

FirmDirectory SynthDataset::firm_directory() const {
    FirmDirectory dir;
    for (const auto& f : firms) dir.add(f.id, {f.city, f.public_admin});
    return dir;
}

CovariatePanel SynthDataset::covariate_panel() const {
    CovariatePanel panel;
    for (const auto& row : covariates) panel.add(row);
    return panel;
}

namespace {

// Number of states per region, in kAllRegions order.
constexpr int kStatesPerRegion[] = {7, 9, 4, 4, 3};

// Walker-free cumulative sampler; weights are fixed once built.
class Discrete {
public:
    Discrete() = default;
    explicit Discrete(const std::vector<double>& weights) : cum_(weights.size()) {
        std::partial_sum(weights.begin(), weights.end(), cum_.begin());
    }
    bool empty() const { return cum_.empty() || !(cum_.back() > 0.0); }
    std::size_t operator()(std::mt19937_64& rng) const {
        std::uniform_real_distribution<double> u(0.0, cum_.back());
        const double r = u(rng);
        auto it = std::upper_bound(cum_.begin(), cum_.end(), r);
        if (it == cum_.end()) --it;
        return static_cast<std::size_t>(it - cum_.begin());
    }

private:
    std::vector<double> cum_;
};

Date random_date(int year, std::mt19937_64& rng) {
    static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    std::uniform_int_distribution<int> month(1, 12);
    Date d{year, month(rng), 1};
    std::uniform_int_distribution<int> day(1, kDays[d.month - 1]);
    d.day = day(rng);
    return d;
}

}  // namespace

SynthDataset generate(const SynthConfig& config) {
    config.validate();
    std::mt19937_64 rng(config.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);

    SynthDataset data;
    data.config = config;

    // Cities: round-robin over regions, then over the region's states.
    std::vector<double> city_weight;
    std::array<int, 5> per_region{};
    for (int c = 0; c < config.n_cities; ++c) {
        const int r = c % 5;
        const int k = per_region[static_cast<std::size_t>(r)]++;
        const Region region = kAllRegions[r];
        const int state = k % kStatesPerRegion[r];
        SynthCity city;
        city.id = CityId{c + 1};
        city.info.region = region;
        city.info.state = std::string(to_string(region)).substr(0, 2) + "-" + std::to_string(state + 1);
        city.info.capital = k < kStatesPerRegion[r];
        city.info.name = "City " + std::to_string(c + 1);
        city.x = r + unit(rng);
        city.y = unit(rng);
        data.cities.push_back(city);
        city_weight.push_back(std::exp(normal(rng)) * (city.info.capital ? 3.0 : 1.0));
    }

    // Firms: Pareto sizes, one per city first so every city is populated.
    const Discrete city_draw(city_weight);
    for (int f = 0; f < config.n_firms; ++f) {
        SynthFirm firm;
        firm.id = FirmId{f + 1};
        firm.size = std::pow(1.0 - unit(rng), -1.0 / config.pareto_alpha);
        firm.city = f < config.n_cities ? data.cities[static_cast<std::size_t>(f)].id
                                        : data.cities[city_draw(rng)].id;
        firm.public_admin = f >= config.n_cities && unit(rng) < config.public_admin_fraction;
        data.firms.push_back(firm);
    }

    if (config.recession_year && config.recession_kill_fraction > 0.0) {
        std::vector<std::size_t> order(data.firms.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (data.firms[a].size != data.firms[b].size) return data.firms[a].size < data.firms[b].size;
            return a < b;
        });
        const auto kill = static_cast<std::size_t>(
            std::floor(config.recession_kill_fraction * static_cast<double>(data.firms.size())));
        for (std::size_t k = 0; k < kill; ++k) data.firms[order[k]].death_year = config.recession_year;
    }

    const std::size_t nc = data.cities.size();
    std::vector<std::vector<double>> distance(nc, std::vector<double>(nc, 0.0));
    for (std::size_t a = 0; a < nc; ++a)
        for (std::size_t b = 0; b < nc; ++b)
            distance[a][b] = std::hypot(data.cities[a].x - data.cities[b].x, data.cities[a].y - data.cities[b].y);

    auto city_index = [](CityId id) { return static_cast<std::size_t>(raw(id) - 1); };
    for (int year = config.years.first; year <= config.years.last; ++year) {
        auto alive = [&](const SynthFirm& f) { return !f.death_year || year < *f.death_year; };

        // Per-city samplers over live firms, and live firm mass per city.
        std::vector<std::vector<std::size_t>> members(nc);
        std::vector<std::vector<double>> member_size(nc);
        std::vector<double> mass(nc, 0.0);
        for (std::size_t i = 0; i < data.firms.size(); ++i) {
            const auto& f = data.firms[i];
            if (!alive(f)) continue;
            const auto c = city_index(f.city);
            members[c].push_back(i);
            member_size[c].push_back(f.size);
            mass[c] += f.size;
        }
        // Survivors take over the demand of dead firms: the activity rate is
        // scaled by the mean size of live firms.
        std::size_t live = 0;
        for (const auto& m : members) live += m.size();
        const double live_mean = std::accumulate(mass.begin(), mass.end(), 0.0) / static_cast<double>(live);
        std::vector<Discrete> within(nc);
        for (std::size_t c = 0; c < nc; ++c) within[c] = Discrete(member_size[c]);
        std::vector<Discrete> outward(nc);
        for (std::size_t c = 0; c < nc; ++c) {
            std::vector<double> w(nc, 0.0);
            for (std::size_t d = 0; d < nc; ++d)
                if (d != c) w[d] = mass[d] * std::exp(-config.gravity_decay * distance[c][d]);
            outward[c] = Discrete(w);
        }

        for (std::size_t i = 0; i < data.firms.size(); ++i) {
            const auto& payer = data.firms[i];
            if (!alive(payer)) continue;
            const auto home = city_index(payer.city);
            std::poisson_distribution<int> count(config.mean_tx_per_firm_year * payer.size / live_mean);
            const int k = count(rng);
            for (int t = 0; t < k; ++t) {
                std::size_t target_city = home;
                const bool internal = unit(rng) < config.intra_city_share && members[home].size() > 1;
                if (!internal) {
                    if (outward[home].empty()) continue;
                    target_city = outward[home](rng);
                }
                std::size_t payee = members[target_city][within[target_city](rng)];
                if (payee == i) {
                    // Redraw once inside the home city; skip if the firm is alone.
                    payee = members[target_city][within[target_city](rng)];
                    if (payee == i) continue;
                }
                const double scale = std::sqrt(payer.size * data.firms[payee].size);
                const auto amount = static_cast<Cents>(std::llround(50000.0 * scale * std::exp(normal(rng)))) + 1;
                data.transactions.push_back({random_date(year, rng), payer.id, data.firms[payee].id, amount});
            }
        }

        // Covariates for this year. Court data is drawn per state and copied to
        // each of its cities.
        std::map<std::string, std::array<std::int64_t, 3>> courts;
        std::map<std::string, int> state_cities;
        for (const auto& c : data.cities) ++state_cities[c.info.state];
        for (const auto& [state, count] : state_cities) {
            const auto backlog = static_cast<std::int64_t>(std::llround(20000.0 * count * (0.6 + 0.8 * unit(rng))));
            const auto spend = static_cast<std::int64_t>(
                std::llround(static_cast<double>(backlog) * 150000.0 * (0.6 + 0.8 * unit(rng))));
            const auto done =
                static_cast<std::int64_t>(std::llround(static_cast<double>(backlog) * (0.2 + 0.7 * unit(rng)))) + 1;
            courts[state] = {backlog, spend, done};
        }

        const double growth = std::pow(1.03, year - config.years.first);
        for (std::size_t c = 0; c < nc; ++c) {
            const auto& city = data.cities[c];
            double firm_mass = 0.0;
            for (const auto& f : data.firms)
                if (f.city == city.id) firm_mass += alive(f) ? f.size : 0.3 * f.size;
            CovariateRow row;
            row.city = city.id;
            row.year = year;
            const double gdp = 1e10 * firm_mass * growth * std::exp(0.05 * normal(rng));
            row.gdp = static_cast<Cents>(std::llround(gdp)) + 1;
            row.exports_over_gdp = 0.25 * unit(rng);
            row.credit_over_gdp = 0.1 + 0.8 * unit(rng);
            row.gini = std::clamp(0.45 + 0.1 * unit(rng) + 0.02 * normal(rng), 0.0, 1.0);
            row.hdi = std::clamp(0.55 + 0.03 * std::log(firm_mass) + 0.03 * normal(rng), 0.0, 1.0);
            const auto& court = courts.at(city.info.state);
            row.backlog = court[0];
            row.expenditures = court[1];
            row.completed_cases = court[2];

            const double credit_total = *row.credit_over_gdp * static_cast<double>(*row.gdp);
            std::array<double, kCreditSectors> cw{};
            for (auto& w : cw) w = std::pow(unit(rng), 2.0) + 1e-3;
            const double cw_sum = cw[0] + cw[1] + cw[2];
            for (std::size_t s = 0; s < kCreditSectors; ++s)
                row.sector_credit[s] = static_cast<Cents>(std::llround(credit_total * cw[s] / cw_sum));

            const double jobs_total = 50.0 + 200.0 * firm_mass;
            std::array<double, kJobSectors> jw{};
            for (auto& w : jw) w = std::pow(unit(rng), 2.0) + 1e-3;
            const double jw_sum = std::accumulate(jw.begin(), jw.end(), 0.0);
            for (std::size_t s = 0; s < kJobSectors; ++s)
                row.sector_jobs[s] = static_cast<std::int64_t>(std::llround(jobs_total * jw[s] / jw_sum));
            data.covariates.push_back(row);
        }
    }
    return data;
}

namespace {

void check(const std::ofstream& out, const std::filesystem::path& path) {
    if (!out) throw DataError("cannot write " + path.string());
}

template <typename T>
void opt_field(csv::Writer& w, const std::optional<T>& v) {
    if (!v)
        w.field(std::string_view{});
    else if constexpr (std::is_integral_v<T>)
        w.field(static_cast<std::int64_t>(*v));
    else
        w.field(*v);
}

void header(csv::Writer& w, const std::vector<std::string_view>& cols) {
    for (auto c : cols) w.field(c);
    w.end_row();
}

}  // namespace

void write_dataset(const SynthDataset& data, const std::filesystem::path& dir) {
    {
        const auto path = dir / "cities.csv";
        std::ofstream out(path, std::ios::binary);
        csv::Writer w(out);
        header(w, schema::kCities);
        for (const auto& c : data.cities)
            w.field(raw(c.id))
                .field(c.info.name)
                .field(c.info.state)
                .field(to_string(c.info.region))
                .field(std::int64_t{c.info.capital})
                .end_row();
        check(out, path);
    }
    {
        const auto path = dir / "firms.csv";
        std::ofstream out(path, std::ios::binary);
        csv::Writer w(out);
        header(w, schema::kFirms);
        for (const auto& f : data.firms)
            w.field(raw(f.id)).field(raw(f.city)).field(std::int64_t{f.public_admin}).end_row();
        check(out, path);
    }
    {
        const auto path = dir / "transactions.csv";
        std::ofstream out(path, std::ios::binary);
        csv::Writer w(out);
        header(w, schema::kTransactions);
        for (const auto& t : data.transactions)
            w.field(format_iso_date(t.date)).field(raw(t.payer)).field(raw(t.payee)).field(t.amount).end_row();
        check(out, path);
    }
    {
        const auto path = dir / "covariates.csv";
        std::ofstream out(path, std::ios::binary);
        csv::Writer w(out);
        header(w, schema::kCovariates);
        for (const auto& r : data.covariates) {
            w.field(raw(r.city)).field(std::int64_t{r.year});
            opt_field(w, r.gdp);
            opt_field(w, r.exports_over_gdp);
            opt_field(w, r.credit_over_gdp);
            opt_field(w, r.gini);
            opt_field(w, r.hdi);
            opt_field(w, r.backlog);
            opt_field(w, r.expenditures);
            opt_field(w, r.completed_cases);
            for (const auto& v : r.sector_credit) opt_field(w, v);
            for (const auto& v : r.sector_jobs) opt_field(w, v);
            w.end_row();
        }
        check(out, path);
    }
    {
        const auto path = dir / "synth_manifest.csv";
        std::ofstream out(path, std::ios::binary);
        csv::Writer w(out);
        w.row({"key", "value"});
        for (const auto& [k, v] : data.config.to_entries()) w.row({k, v});
        w.row({"transactions", std::to_string(data.transactions.size())});
        w.row({"ledger_total_cents", std::to_string(data.ledger_total())});
        w.row({"firms", std::to_string(data.firms.size())});
        w.row({"cities", std::to_string(data.cities.size())});
        w.row({"covariate_rows", std::to_string(data.covariates.size())});
        check(out, path);
    }
}

PanelDataset generate_known_beta_panel(const KnownBetaConfig& config) {
    if (config.n_cities < 2 || config.n_years < 1) throw UsageError("known-beta panel needs >= 2 cities and >= 1 year");
    for (double b : config.beta)
        if (!std::isfinite(b)) throw UsageError("known-beta panel needs a finite beta");
    if (config.beta.empty()) throw UsageError("known-beta panel needs at least one coefficient");

    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const auto k = static_cast<Eigen::Index>(config.beta.size());

    std::map<std::pair<int, int>, double> effects;
    for (int t = 0; t < config.n_years; ++t)
        for (int r = 0; r < 5; ++r) effects[{t, r}] = 3.0 * normal(rng);

    PanelDataset p;
    p.outcome_names = {"y"};
    for (Eigen::Index j = 0; j < k; ++j) p.regressor_names.push_back("x" + std::to_string(j + 1));
    const auto n = static_cast<Eigen::Index>(config.n_cities) * config.n_years;
    p.outcomes.resize(n, 1);
    p.regressors.resize(n, k);
    Eigen::Index i = 0;
    for (int t = 0; t < config.n_years; ++t) {
        for (int c = 0; c < config.n_cities; ++c, ++i) {
            const int r = c % 5;
            p.keys.push_back({CityId{c + 1}, 2000 + t, kAllRegions[r]});
            double y = effects.at({t, r});
            for (Eigen::Index j = 0; j < k; ++j) {
                p.regressors(i, j) = normal(rng);
                y += config.beta[static_cast<std::size_t>(j)] * p.regressors(i, j);
            }
            p.outcomes(i, 0) = y + config.noise_sd * normal(rng);
        }
    }
    return p;
}

void write_known_beta_panel(const KnownBetaConfig& config, const std::filesystem::path& dir) {
    write_panel_csv(generate_known_beta_panel(config), dir / "panel.csv");
    const auto path = dir / "synth_manifest.csv";
    std::ofstream out(path, std::ios::binary);
    csv::Writer w(out);
    w.row({"key", "value"});
    w.row({"seed", std::to_string(config.seed)});
    w.row({"noise_sd", fmt(config.noise_sd)});
    w.row({"n_cities", std::to_string(config.n_cities)});
    w.row({"n_years", std::to_string(config.n_years)});
    for (std::size_t j = 0; j < config.beta.size(); ++j)
        w.row({"true_beta_x" + std::to_string(j + 1), fmt(config.beta[j])});
    check(out, path);
}

}  // namespace econet
