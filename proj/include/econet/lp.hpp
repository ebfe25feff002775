#pragma once

#include <string_view>
#include <vector>

namespace econet {

enum class ConstraintSense { LessEqual, GreaterEqual, Equal };

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit, NumericalFailure };

std::string_view to_string(LpStatus s);

// Optimizes c'x subject to A x (<=, >=, =) b and x >= 0.
struct LinearProgram {
    bool maximize = true;
    std::vector<double> objective;
    std::vector<std::vector<double>> rows;
    std::vector<ConstraintSense> senses;
    std::vector<double> rhs;

    std::size_t variables() const { return objective.size(); }
    std::size_t constraints() const { return rows.size(); }

    void add_constraint(std::vector<double> row, ConstraintSense sense, double b);

    // Throws std::invalid_argument when dimensions disagree or a value is not finite.
    void validate() const;
};

struct LpSolution {
    LpStatus status = LpStatus::NumericalFailure;
    double value = 0.0;
    std::vector<double> x;
    int iterations = 0;
    double max_residual = 0.0;  // worst constraint or bound violation at x

    bool optimal() const { return status == LpStatus::Optimal; }
};

// Two-phase primal simplex on a dense tableau with Bland's rule, so it
// cannot cycle. An optimal answer is only reported if every constraint and
// bound holds within `tol` at the returned x; otherwise the status is
// NumericalFailure. Exceeding `max_iter` pivots gives IterationLimit.
LpSolution solve_lp(const LinearProgram& lp, double tol = 1e-9, int max_iter = 100000);

}  // namespace econet
