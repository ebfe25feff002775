#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "econet/lp.hpp"

namespace econet {

enum class ReturnsToScale { Constant, NonIncreasing, Variable };

std::string_view to_string(ReturnsToScale rts);
std::optional<ReturnsToScale> parse_returns_to_scale(std::string_view text);

// Decision-making units with one input vector and one output vector each.
// For courts the inputs are (backlog, expenditures) and the output is the
// number of completed cases.
struct DeaInstance {
    std::vector<std::string> units;
    std::vector<std::vector<double>> inputs;   // [unit][input]
    std::vector<std::vector<double>> outputs;  // [unit][output]

    // Throws DataError: at least one unit, consistent widths, strictly
    // positive inputs, non-negative outputs with one positive per unit.
    void validate() const;
};

struct DeaUnitScore {
    std::string unit;
    double phi = 0.0;         // output expansion factor, >= 1
    double efficiency = 0.0;  // 1 / phi, in (0, 1]
    LpStatus status = LpStatus::NumericalFailure;

    bool ok() const { return status == LpStatus::Optimal; }
};

struct DeaScores {
    ReturnsToScale rts = ReturnsToScale::NonIncreasing;
    std::vector<DeaUnitScore> units;

    const DeaUnitScore* find(std::string_view unit) const;
};

// Output-oriented envelopment LP for unit `o` over variables (lambda_1..n, phi):
//   max phi  s.t.  sum_j lambda_j x_kj <= x_ko      for every input k
//                  phi y_ro - sum_j lambda_j y_rj <= 0  for every output r
//                  sum_j lambda_j <= 1 (NIRS), = 1 (VRS), free (CRS)
LinearProgram dea_program(const DeaInstance& inst, std::size_t o, ReturnsToScale rts);

// Solves one LP per unit. Columns are rescaled by their maximum first (the
// scores are unit-invariant). A failed LP marks that unit only.
DeaScores dea_output(const DeaInstance& inst, ReturnsToScale rts = ReturnsToScale::NonIncreasing,
                     double tol = 1e-9);

inline DeaScores dea_output_nirs(const DeaInstance& inst) {
    return dea_output(inst, ReturnsToScale::NonIncreasing);
}

// dea_units.csv: unit_id,backlog,expenditures_cents,completed_cases
DeaInstance read_dea_units(const std::filesystem::path& path);
void write_dea_units(const DeaInstance& inst, const std::filesystem::path& path);

// dea_scores.csv: unit_id,phi,efficiency,status
void write_dea_scores(const DeaScores& scores, const std::filesystem::path& path);

}  // namespace econet
