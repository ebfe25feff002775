#include "econet/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace econet {

std::string_view to_string(LpStatus s) {
    switch (s) {
        case LpStatus::Optimal: return "optimal";
        case LpStatus::Infeasible: return "infeasible";
        case LpStatus::Unbounded: return "unbounded";
        case LpStatus::IterationLimit: return "iteration_limit";
        case LpStatus::NumericalFailure: return "numerical_failure";
    }
    return "?";
}

void LinearProgram::add_constraint(std::vector<double> row, ConstraintSense sense, double b) {
    rows.push_back(std::move(row));
    senses.push_back(sense);
    rhs.push_back(b);
}

void LinearProgram::validate() const {
    if (objective.empty()) throw std::invalid_argument("LP has no variables");
    if (rows.size() != senses.size() || rows.size() != rhs.size())
        throw std::invalid_argument("LP constraint arrays disagree in length");
    for (double c : objective)
        if (!std::isfinite(c)) throw std::invalid_argument("LP objective is not finite");
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != objective.size())
            throw std::invalid_argument("LP row " + std::to_string(i) + " has the wrong width");
        for (double a : rows[i])
            if (!std::isfinite(a)) throw std::invalid_argument("LP matrix is not finite");
        if (!std::isfinite(rhs[i])) throw std::invalid_argument("LP right-hand side is not finite");
    }
}

namespace {

constexpr double kPivotEps = 1e-11;

// Dense tableau in maximization form. Row m holds the reduced costs
// r_j = c_B' B^-1 A_j - c_j; the last column holds the right-hand side.
class Tableau {
public:
    Tableau(std::size_t rows, std::size_t cols)
        : m_(rows), n_(cols), data_((rows + 1) * (cols + 1), 0.0), basis_(rows, 0) {}

    double& at(std::size_t i, std::size_t j) { return data_[i * (n_ + 1) + j]; }
    double at(std::size_t i, std::size_t j) const { return data_[i * (n_ + 1) + j]; }
    double& rhs(std::size_t i) { return at(i, n_); }
    double& cost(std::size_t j) { return at(m_, j); }
    double objective() const { return at(m_, n_); }

    std::size_t rows() const { return m_; }
    std::size_t cols() const { return n_; }
    std::vector<std::size_t>& basis() { return basis_; }

    void pivot(std::size_t p, std::size_t q) {
        const double inv = 1.0 / at(p, q);
        for (std::size_t j = 0; j <= n_; ++j) at(p, j) *= inv;
        at(p, q) = 1.0;
        for (std::size_t i = 0; i <= m_; ++i) {
            if (i == p) continue;
            const double f = at(i, q);
            if (f == 0.0) continue;
            for (std::size_t j = 0; j <= n_; ++j) at(i, j) -= f * at(p, j);
            at(i, q) = 0.0;
        }
        basis_[p] = q;
    }

    // Rebuilds the reduced-cost row for a maximization objective `c`.
    void set_objective(const std::vector<double>& c) {
        for (std::size_t j = 0; j <= n_; ++j) {
            double acc = j < n_ ? -c[j] : 0.0;
            for (std::size_t i = 0; i < m_; ++i) acc += c[basis_[i]] * at(i, j);
            at(m_, j) = acc;
        }
    }

private:
    std::size_t m_, n_;
    std::vector<double> data_;
    std::vector<std::size_t> basis_;
};

enum class RunResult { Optimal, Unbounded, IterationLimit };

// Bland's rule: lowest-index improving column, and among tied ratios the
// lowest-index basic variable leaves.
RunResult run_simplex(Tableau& t, std::size_t allowed_cols, int max_iter, int& iterations) {
    for (;;) {
        std::size_t q = allowed_cols;
        for (std::size_t j = 0; j < allowed_cols; ++j)
            if (t.cost(j) < -kPivotEps) {
                q = j;
                break;
            }
        if (q == allowed_cols) return RunResult::Optimal;
        if (iterations >= max_iter) return RunResult::IterationLimit;

        std::size_t p = t.rows();
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < t.rows(); ++i) {
            const double a = t.at(i, q);
            if (a <= kPivotEps) continue;
            const double ratio = t.rhs(i) / a;
            if (p == t.rows() || ratio < best - kPivotEps) {
                best = ratio;
                p = i;
            } else if (ratio <= best + kPivotEps && t.basis()[i] < t.basis()[p]) {
                best = std::min(best, ratio);
                p = i;
            }
        }
        if (p == t.rows()) return RunResult::Unbounded;
        t.pivot(p, q);
        ++iterations;
    }
}

double max_violation(const LinearProgram& lp, const std::vector<double>& x) {
    double worst = 0.0;
    for (double v : x) worst = std::max(worst, -v);
    for (std::size_t i = 0; i < lp.rows.size(); ++i) {
        double ax = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j) ax += lp.rows[i][j] * x[j];
        const double d = ax - lp.rhs[i];
        switch (lp.senses[i]) {
            case ConstraintSense::LessEqual: worst = std::max(worst, d); break;
            case ConstraintSense::GreaterEqual: worst = std::max(worst, -d); break;
            case ConstraintSense::Equal: worst = std::max(worst, std::abs(d)); break;
        }
    }
    return worst;
}

}  // namespace

LpSolution solve_lp(const LinearProgram& lp, double tol, int max_iter) {
    lp.validate();
    const std::size_t n = lp.variables();
    const std::size_t m = lp.constraints();

    // Normalize every row to a non-negative right-hand side.
    std::vector<std::vector<double>> a = lp.rows;
    std::vector<double> b = lp.rhs;
    std::vector<ConstraintSense> sense = lp.senses;
    for (std::size_t i = 0; i < m; ++i) {
        if (b[i] >= 0.0) continue;
        for (double& v : a[i]) v = -v;
        b[i] = -b[i];
        if (sense[i] == ConstraintSense::LessEqual)
            sense[i] = ConstraintSense::GreaterEqual;
        else if (sense[i] == ConstraintSense::GreaterEqual)
            sense[i] = ConstraintSense::LessEqual;
    }

    // Column layout: originals | slack/surplus | artificials.
    std::size_t n_slack = 0, n_art = 0;
    for (auto s : sense) {
        if (s != ConstraintSense::Equal) ++n_slack;
        if (s != ConstraintSense::LessEqual) ++n_art;
    }
    const std::size_t first_art = n + n_slack;
    const std::size_t cols = first_art + n_art;

    Tableau t(m, cols);
    std::size_t slack = n, art = first_art;
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) t.at(i, j) = a[i][j];
        t.rhs(i) = b[i];
        switch (sense[i]) {
            case ConstraintSense::LessEqual:
                t.at(i, slack) = 1.0;
                t.basis()[i] = slack++;
                break;
            case ConstraintSense::GreaterEqual:
                t.at(i, slack++) = -1.0;
                t.at(i, art) = 1.0;
                t.basis()[i] = art++;
                break;
            case ConstraintSense::Equal:
                t.at(i, art) = 1.0;
                t.basis()[i] = art++;
                break;
        }
    }

    LpSolution sol;
    int iterations = 0;

    if (n_art > 0) {
        std::vector<double> phase1(cols, 0.0);
        for (std::size_t j = first_art; j < cols; ++j) phase1[j] = -1.0;
        t.set_objective(phase1);
        const auto r = run_simplex(t, cols, max_iter, iterations);
        sol.iterations = iterations;
        if (r == RunResult::IterationLimit) {
            sol.status = LpStatus::IterationLimit;
            return sol;
        }
        double scale = 1.0;
        for (double v : b) scale = std::max(scale, std::abs(v));
        if (t.objective() < -tol * scale) {
            sol.status = LpStatus::Infeasible;
            return sol;
        }
        // Drive zero-valued artificials out of the basis where possible; rows
        // that cannot pivot are redundant and stay inert.
        for (std::size_t i = 0; i < m; ++i) {
            if (t.basis()[i] < first_art) continue;
            for (std::size_t j = 0; j < first_art; ++j)
                if (std::abs(t.at(i, j)) > 1e-9) {
                    t.pivot(i, j);
                    break;
                }
        }
    }

    std::vector<double> phase2(cols, 0.0);
    for (std::size_t j = 0; j < n; ++j) phase2[j] = lp.maximize ? lp.objective[j] : -lp.objective[j];
    t.set_objective(phase2);
    const auto r = run_simplex(t, first_art, max_iter, iterations);
    sol.iterations = iterations;
    if (r == RunResult::IterationLimit) {
        sol.status = LpStatus::IterationLimit;
        return sol;
    }
    if (r == RunResult::Unbounded) {
        sol.status = LpStatus::Unbounded;
        return sol;
    }

    sol.x.assign(n, 0.0);
    for (std::size_t i = 0; i < m; ++i)
        if (t.basis()[i] < n) sol.x[t.basis()[i]] = std::max(0.0, t.rhs(i));
    sol.value = 0.0;
    for (std::size_t j = 0; j < n; ++j) sol.value += lp.objective[j] * sol.x[j];
    sol.max_residual = max_violation(lp, sol.x);
    sol.status = sol.max_residual <= tol ? LpStatus::Optimal : LpStatus::NumericalFailure;
    return sol;
}

}  // namespace econet
