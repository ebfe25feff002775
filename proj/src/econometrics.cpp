#include "econet/econometrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <set>
#include <tuple>

#include "econet/csv.hpp"

namespace econet {

std::size_t PanelDataset::outcome_index(std::string_view name) const {
    for (std::size_t i = 0; i < outcome_names.size(); ++i)
        if (outcome_names[i] == name) return i;
    throw UsageError("unknown outcome '" + std::string(name) + "'");
}

void PanelDataset::validate() const {
    const auto n = static_cast<Eigen::Index>(keys.size());
    if (outcomes.rows() != n || regressors.rows() != n ||
        outcomes.cols() != static_cast<Eigen::Index>(outcome_names.size()) ||
        regressors.cols() != static_cast<Eigen::Index>(regressor_names.size()))
        throw DataError("panel matrices disagree with their keys or column names");
    if (!outcomes.allFinite() || !regressors.allFinite()) throw DataError("panel contains non-finite cells");
}

std::vector<double> zscore(std::span<const double> values, std::string_view variable) {
    if (values.size() < 2)
        throw UndefinedResult("cannot standardize " + std::string(variable) + ": fewer than two values");
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
    if (!(sd > 0.0)) throw UndefinedResult("cannot standardize " + std::string(variable) + ": zero variance");
    std::vector<double> out;
    out.reserve(values.size());
    for (double v : values) out.push_back((v - mean) / sd);
    return out;
}

GroupIndex group_index(const std::vector<PanelKey>& keys) {
    std::map<std::pair<int, int>, std::size_t> ids;
    for (const auto& k : keys) ids.emplace(std::make_pair(k.year, static_cast<int>(k.region)), 0);
    std::size_t next = 0;
    for (auto& [key, id] : ids) id = next++;
    GroupIndex g;
    g.count = ids.size();
    g.of_row.reserve(keys.size());
    for (const auto& k : keys) g.of_row.push_back(ids.at({k.year, static_cast<int>(k.region)}));
    return g;
}

Eigen::MatrixXd demean_within(const Eigen::MatrixXd& m, const GroupIndex& groups) {
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(groups.count), m.cols());
    std::vector<double> counts(groups.count, 0.0);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        const auto g = static_cast<Eigen::Index>(groups.of_row[static_cast<std::size_t>(i)]);
        sums.row(g) += m.row(i);
        counts[static_cast<std::size_t>(g)] += 1.0;
    }
    Eigen::MatrixXd out = m;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        const auto g = groups.of_row[static_cast<std::size_t>(i)];
        out.row(i) -= sums.row(static_cast<Eigen::Index>(g)) / counts[g];
    }
    return out;
}

DemeanedPanel within_demean(const PanelDataset& panel) {
    panel.validate();
    DemeanedPanel d;
    d.groups = group_index(panel.keys);
    d.outcomes = demean_within(panel.outcomes, d.groups);
    d.regressors = demean_within(panel.regressors, d.groups);

    std::vector<std::size_t> size(d.groups.count, 0);
    for (auto g : d.groups.of_row) ++size[g];
    d.singleton.resize(panel.rows());
    for (std::size_t i = 0; i < panel.rows(); ++i) {
        d.singleton[i] = size[d.groups.of_row[i]] == 1;
        if (d.singleton[i]) {
            // Exact zeros rather than x - x rounding.
            d.outcomes.row(static_cast<Eigen::Index>(i)).setZero();
            d.regressors.row(static_cast<Eigen::Index>(i)).setZero();
            ++d.singleton_rows;
        }
    }
    return d;
}

namespace {

std::string join_names(const std::vector<std::string>& names, const std::set<Eigen::Index>& cols) {
    std::string out;
    for (auto c : cols) {
        if (!out.empty()) out += ", ";
        out += names[static_cast<std::size_t>(c)];
    }
    return out;
}

// Columns taking part in an exact linear dependence, found on the
// column-normalized design.
std::set<Eigen::Index> collinear_columns(const Eigen::MatrixXd& x) {
    std::set<Eigen::Index> bad;
    Eigen::MatrixXd xn = x;
    std::vector<Eigen::Index> live;
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        const double norm = x.col(j).norm();
        if (norm == 0.0) {
            bad.insert(j);
        } else {
            xn.col(j) /= norm;
            live.push_back(j);
        }
    }
    if (live.empty()) return bad;

    Eigen::MatrixXd sub(x.rows(), static_cast<Eigen::Index>(live.size()));
    for (std::size_t k = 0; k < live.size(); ++k) sub.col(static_cast<Eigen::Index>(k)) = xn.col(live[k]);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(sub);
    qr.setThreshold(1e-10);
    const auto rank = qr.rank();
    if (rank == sub.cols()) return bad;

    const auto& perm = qr.colsPermutation().indices();
    Eigen::MatrixXd basis(sub.rows(), rank);
    for (Eigen::Index k = 0; k < rank; ++k) basis.col(k) = sub.col(perm(k));
    Eigen::HouseholderQR<Eigen::MatrixXd> bqr(basis);
    for (Eigen::Index k = rank; k < sub.cols(); ++k) {
        const Eigen::VectorXd coef = bqr.solve(sub.col(perm(k)));
        bad.insert(live[static_cast<std::size_t>(perm(k))]);
        for (Eigen::Index b = 0; b < rank; ++b)
            if (std::abs(coef(b)) > 1e-6) bad.insert(live[static_cast<std::size_t>(perm(b))]);
    }
    return bad;
}

}  // namespace

FeRegressionFit fit_demeaned(const Eigen::VectorXd& y, const Eigen::MatrixXd& x,
                             std::span<const CityId> clusters, std::size_t absorbed,
                             const std::vector<std::string>& names) {
    const auto n = x.rows();
    const auto k = x.cols();
    if (y.size() != n || static_cast<Eigen::Index>(clusters.size()) != n ||
        static_cast<Eigen::Index>(names.size()) != k)
        throw std::invalid_argument("fit_demeaned: inconsistent dimensions");
    if (k == 0) throw std::invalid_argument("fit_demeaned: no regressors");

    if (auto bad = collinear_columns(x); !bad.empty())
        throw NumericalError("design matrix is rank deficient; collinear columns: " + join_names(names, bad));

    std::map<CityId, std::vector<Eigen::Index>> by_cluster;
    for (Eigen::Index i = 0; i < n; ++i) by_cluster[clusters[static_cast<std::size_t>(i)]].push_back(i);
    const auto g = static_cast<double>(by_cluster.size());
    if (by_cluster.size() < 2) throw NumericalError("clustered variance needs at least two clusters");
    const double dof_k = static_cast<double>(k) + static_cast<double>(absorbed);
    if (static_cast<double>(n) <= dof_k)
        throw NumericalError("no residual degrees of freedom (N = " + std::to_string(n) + ")");

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    FeRegressionFit fit;
    fit.regressors = names;
    fit.beta = qr.solve(y);
    fit.residuals = y - x * fit.beta;

    const Eigen::MatrixXd r = qr.matrixR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
    const Eigen::MatrixXd r_inv = r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(k, k));
    const Eigen::MatrixXd bread_perm = r_inv * r_inv.transpose();
    const auto& perm = qr.colsPermutation();
    const Eigen::MatrixXd bread = perm * bread_perm * perm.transpose();

    Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(k, k);
    for (const auto& [city, rows] : by_cluster) {
        Eigen::VectorXd score = Eigen::VectorXd::Zero(k);
        for (auto i : rows) score += x.row(i).transpose() * fit.residuals(i);
        meat += score * score.transpose();
    }

    const double nd = static_cast<double>(n);
    fit.cr_factor = g / (g - 1.0) * (nd - 1.0) / (nd - dof_k);
    fit.vcov = fit.cr_factor * bread * meat * bread;
    fit.se_cluster = fit.vcov.diagonal().cwiseMax(0.0).cwiseSqrt();
    fit.t_stat = fit.beta.cwiseQuotient(fit.se_cluster);

    fit.n_obs = static_cast<std::size_t>(n);
    fit.n_groups = absorbed;
    fit.n_clusters = by_cluster.size();
    const double sst = y.squaredNorm();
    if (!(sst > 0.0)) throw UndefinedResult("outcome has no within-group variation");
    fit.r2_within = std::clamp(1.0 - fit.residuals.squaredNorm() / sst, 0.0, 1.0);
    return fit;
}

FeRegressionFit fit_fe_ols(const PanelDataset& panel, std::string_view outcome, const FitOptions& options) {
    panel.validate();
    const auto col = static_cast<Eigen::Index>(panel.outcome_index(outcome));
    Eigen::VectorXd y = panel.outcomes.col(col);
    if (options.zscore_outcome) {
        const auto z = zscore(std::span<const double>(y.data(), static_cast<std::size_t>(y.size())), outcome);
        y = Eigen::Map<const Eigen::VectorXd>(z.data(), static_cast<Eigen::Index>(z.size()));
    }

    const auto groups = group_index(panel.keys);
    const Eigen::VectorXd y_dm = demean_within(y, groups);
    const Eigen::MatrixXd x_dm = demean_within(panel.regressors, groups);
    std::vector<CityId> clusters;
    clusters.reserve(panel.rows());
    for (const auto& k : panel.keys) clusters.push_back(k.city);

    auto fit = fit_demeaned(y_dm, x_dm, clusters, groups.count, panel.regressor_names);
    fit.outcome = std::string(outcome);
    fit.outcome_zscored = options.zscore_outcome;
    return fit;
}

DeaInstance courts_instance(const CovariatePanel& covariates, const CityDirectory& cities, int year) {
    struct Court {
        double backlog, spend, done;
    };
    std::map<std::string, Court> states;
    for (const auto& [id, info] : cities) {
        const auto* row = covariates.find(id, year);
        if (!row || !row->backlog || !row->expenditures || !row->completed_cases) continue;
        const Court c{static_cast<double>(*row->backlog), static_cast<double>(*row->expenditures),
                      static_cast<double>(*row->completed_cases)};
        auto [it, fresh] = states.emplace(info.state, c);
        if (!fresh && (it->second.backlog != c.backlog || it->second.spend != c.spend || it->second.done != c.done))
            throw DataError("court data for state '" + info.state + "' differs between cities in " +
                            std::to_string(year));
    }
    DeaInstance inst;
    for (const auto& [state, c] : states) {
        if (!(c.backlog > 0.0) || !(c.spend > 0.0) || !(c.done > 0.0)) continue;
        inst.units.push_back(state);
        inst.inputs.push_back({c.backlog, c.spend});
        inst.outputs.push_back({c.done});
    }
    return inst;
}

PanelAssembly assemble_panel(const std::vector<MeasureRow>& measures, const CovariatePanel& covariates,
                             const std::vector<HhiRow>& hhi, const std::map<int, DeaScores>& dea_by_year,
                             const CityDirectory& cities) {
    std::map<std::pair<CityId, int>, const HhiRow*> hhi_index;
    for (const auto& h : hhi) hhi_index[{h.city, h.year}] = &h;

    std::vector<const MeasureRow*> order;
    order.reserve(measures.size());
    for (const auto& m : measures) order.push_back(&m);
    std::sort(order.begin(), order.end(), [](const MeasureRow* a, const MeasureRow* b) {
        return std::tie(a->period, a->city) < std::tie(b->period, b->city);
    });

    PanelAssembly out;
    out.candidate_rows = order.size();
    std::vector<PanelKey> keys;
    std::vector<std::array<double, 6>> ys;
    std::vector<std::array<double, 10>> xs;

    for (const MeasureRow* m : order) {
        std::vector<std::string> reasons;
        auto need = [&](const auto& opt, const char* name) {
            if (!opt) reasons.push_back(std::string("missing ") + name);
        };

        const auto* city = cities.find(m->city);
        if (!city) {
            ++out.deleted_rows;
            ++out.deleted_by_reason["unknown city"];
            continue;
        }
        const auto* cov = covariates.find(m->city, m->period);
        if (!cov) {
            ++out.deleted_rows;
            ++out.deleted_by_reason["missing covariates"];
            continue;
        }
        need(cov->gdp, "gdp");
        if (cov->gdp && *cov->gdp <= 0) reasons.emplace_back("non-positive gdp");
        need(cov->exports_over_gdp, "exports_over_gdp");
        need(cov->credit_over_gdp, "credit_over_gdp");
        need(cov->gini, "gini");
        need(m->doec, "doec");
        need(m->does, "does");
        const auto hit = hhi_index.find({m->city, m->period});
        const HhiRow* h = hit == hhi_index.end() ? nullptr : hit->second;
        std::optional<double> hb = h ? h->hhi_bank_credit : std::nullopt;
        std::optional<double> hj = h ? h->hhi_jobs : std::nullopt;
        need(hb, "hhi_bank");
        need(hj, "hhi_jobs");
        need(cov->hdi, "hdi");
        std::optional<double> courts;
        if (auto d = dea_by_year.find(m->period); d != dea_by_year.end())
            if (const auto* s = d->second.find(city->state); s && s->ok()) courts = s->efficiency;
        need(courts, "courts_efficiency");

        if (!reasons.empty()) {
            ++out.deleted_rows;
            for (const auto& r : reasons) ++out.deleted_by_reason[r];
            continue;
        }
        keys.push_back({m->city, m->period, city->region});
        ys.push_back({m->pagerank_down, m->pagerank_up, static_cast<double>(m->in_degree),
                      static_cast<double>(m->out_degree), static_cast<double>(m->total_received) / 100.0,
                      static_cast<double>(m->total_paid) / 100.0});
        xs.push_back({std::log(static_cast<double>(*cov->gdp) / 100.0), *cov->exports_over_gdp,
                      *cov->credit_over_gdp, *cov->gini, *m->doec, *m->does, *h->hhi_bank_credit,
                      *h->hhi_jobs, *cov->hdi, *courts});
    }

    auto& p = out.panel;
    p.outcome_names = kOutcomeNames;
    p.regressor_names = kRegressorNames;
    p.keys = std::move(keys);
    const auto n = static_cast<Eigen::Index>(p.keys.size());
    p.outcomes.resize(n, 6);
    p.regressors.resize(n, 10);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < 6; ++j) p.outcomes(i, j) = ys[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        for (Eigen::Index j = 0; j < 10; ++j) p.regressors(i, j) = xs[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
    return out;
}

void write_panel_csv(const PanelDataset& panel, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    csv::Writer w(out);
    w.field("city_id").field("year").field("region");
    for (const auto& n : panel.outcome_names) w.field(n);
    for (const auto& n : panel.regressor_names) w.field(n);
    w.end_row();
    for (std::size_t i = 0; i < panel.rows(); ++i) {
        const auto& k = panel.keys[i];
        w.field(raw(k.city)).field(std::int64_t{k.year}).field(to_string(k.region));
        const auto r = static_cast<Eigen::Index>(i);
        for (Eigen::Index j = 0; j < panel.outcomes.cols(); ++j) w.field(panel.outcomes(r, j));
        for (Eigen::Index j = 0; j < panel.regressors.cols(); ++j) w.field(panel.regressors(r, j));
        w.end_row();
    }
    if (!out) throw DataError("cannot write " + path.string());
}

PanelDataset read_panel_csv(const std::filesystem::path& path, const std::vector<std::string>& outcomes) {
    auto reader = csv::Reader::open(path);
    std::vector<std::string> header;
    if (!reader.next(header) || header.size() < 4 || header[0] != "city_id" || header[1] != "year" ||
        header[2] != "region")
        throw DataError(path.string() + ": panel header must start with city_id,year,region");

    PanelDataset p;
    std::vector<Eigen::Index> out_cols, reg_cols;
    for (std::size_t j = 3; j < header.size(); ++j) {
        const bool is_outcome = std::find(outcomes.begin(), outcomes.end(), header[j]) != outcomes.end();
        (is_outcome ? p.outcome_names : p.regressor_names).push_back(header[j]);
        (is_outcome ? out_cols : reg_cols).push_back(static_cast<Eigen::Index>(j));
    }
    if (p.outcome_names.size() != outcomes.size())
        throw DataError(path.string() + ": panel lacks one of the requested outcome columns");

    std::vector<std::vector<double>> cells;
    std::vector<std::string> f;
    while (reader.next(f)) {
        const auto where = path.string() + ":" + std::to_string(reader.line()) + ": ";
        if (f.size() != header.size()) throw DataError(where + "wrong column count");
        auto city = csv::parse_int(f[0]);
        auto year = csv::parse_int(f[1]);
        auto region = parse_region(f[2]);
        if (!city || !year || !region) throw DataError(where + "malformed key");
        std::vector<double> row;
        for (std::size_t j = 3; j < f.size(); ++j) {
            auto v = csv::parse_double(f[j]);
            if (!v) throw DataError(where + "missing or malformed value in column " + header[j]);
            row.push_back(*v);
        }
        p.keys.push_back({CityId{*city}, static_cast<int>(*year), *region});
        cells.push_back(std::move(row));
    }
    const auto n = static_cast<Eigen::Index>(cells.size());
    p.outcomes.resize(n, static_cast<Eigen::Index>(out_cols.size()));
    p.regressors.resize(n, static_cast<Eigen::Index>(reg_cols.size()));
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& row = cells[static_cast<std::size_t>(i)];
        for (std::size_t j = 0; j < out_cols.size(); ++j)
            p.outcomes(i, static_cast<Eigen::Index>(j)) = row[static_cast<std::size_t>(out_cols[j] - 3)];
        for (std::size_t j = 0; j < reg_cols.size(); ++j)
            p.regressors(i, static_cast<Eigen::Index>(j)) = row[static_cast<std::size_t>(reg_cols[j] - 3)];
    }
    return p;
}

void write_regression_csv(const FeRegressionFit& fit, const std::filesystem::path& dir) {
    const auto path = dir / ("regression_" + fit.outcome + ".csv");
    std::ofstream out(path, std::ios::binary);
    csv::Writer w(out);
    w.row({"regressor", "beta", "se_cluster", "t_stat"});
    for (std::size_t j = 0; j < fit.regressors.size(); ++j) {
        const auto i = static_cast<Eigen::Index>(j);
        w.field(fit.regressors[j]).field(fit.beta(i)).field(fit.se_cluster(i)).field(fit.t_stat(i)).end_row();
    }
    if (!out) throw DataError("cannot write " + path.string());
}

void write_regression_meta(const std::vector<FeRegressionFit>& fits, const std::filesystem::path& dir) {
    const auto path = dir / "regression_meta.csv";
    std::ofstream out(path, std::ios::binary);
    csv::Writer w(out);
    w.row({"outcome", "n_obs", "n_groups", "n_clusters", "r2"});
    for (const auto& f : fits)
        w.field(f.outcome)
            .field(static_cast<std::int64_t>(f.n_obs))
            .field(static_cast<std::int64_t>(f.n_groups))
            .field(static_cast<std::int64_t>(f.n_clusters))
            .field(f.r2_within)
            .end_row();
    if (!out) throw DataError("cannot write " + path.string());
}

}  // namespace econet
