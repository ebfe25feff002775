#include "econet/dea.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "econet/csv.hpp"
#include "econet/types.hpp"

namespace econet {

std::string_view to_string(ReturnsToScale rts) {
    switch (rts) {
        case ReturnsToScale::Constant: return "crs";
        case ReturnsToScale::NonIncreasing: return "nirs";
        case ReturnsToScale::Variable: return "vrs";
    }
    return "?";
}

std::optional<ReturnsToScale> parse_returns_to_scale(std::string_view text) {
    if (text == "crs") return ReturnsToScale::Constant;
    if (text == "nirs") return ReturnsToScale::NonIncreasing;
    if (text == "vrs") return ReturnsToScale::Variable;
    return std::nullopt;
}

void DeaInstance::validate() const {
    if (units.empty()) throw DataError("DEA instance has no units");
    if (inputs.size() != units.size() || outputs.size() != units.size())
        throw DataError("DEA instance arrays disagree in length");
    const auto n_in = inputs.front().size();
    const auto n_out = outputs.front().size();
    if (n_in == 0 || n_out == 0) throw DataError("DEA instance needs at least one input and one output");
    for (std::size_t j = 0; j < units.size(); ++j) {
        if (inputs[j].size() != n_in || outputs[j].size() != n_out)
            throw DataError("DEA unit " + units[j] + " has the wrong number of inputs or outputs");
        for (double x : inputs[j])
            if (!(x > 0.0) || !std::isfinite(x))
                throw DataError("DEA unit " + units[j] + " has a non-positive input");
        bool positive = false;
        for (double y : outputs[j]) {
            if (!(y >= 0.0) || !std::isfinite(y))
                throw DataError("DEA unit " + units[j] + " has a negative output");
            positive = positive || y > 0.0;
        }
        if (!positive) throw DataError("DEA unit " + units[j] + " has no positive output");
    }
}

const DeaUnitScore* DeaScores::find(std::string_view unit) const {
    for (const auto& u : units)
        if (u.unit == unit) return &u;
    return nullptr;
}

LinearProgram dea_program(const DeaInstance& inst, std::size_t o, ReturnsToScale rts) {
    const std::size_t n = inst.units.size();
    const std::size_t phi = n;
    LinearProgram lp;
    lp.maximize = true;
    lp.objective.assign(n + 1, 0.0);
    lp.objective[phi] = 1.0;

    for (std::size_t k = 0; k < inst.inputs[o].size(); ++k) {
        std::vector<double> row(n + 1, 0.0);
        for (std::size_t j = 0; j < n; ++j) row[j] = inst.inputs[j][k];
        lp.add_constraint(std::move(row), ConstraintSense::LessEqual, inst.inputs[o][k]);
    }
    for (std::size_t r = 0; r < inst.outputs[o].size(); ++r) {
        std::vector<double> row(n + 1, 0.0);
        for (std::size_t j = 0; j < n; ++j) row[j] = -inst.outputs[j][r];
        row[phi] = inst.outputs[o][r];
        lp.add_constraint(std::move(row), ConstraintSense::LessEqual, 0.0);
    }
    if (rts != ReturnsToScale::Constant) {
        std::vector<double> row(n + 1, 1.0);
        row[phi] = 0.0;
        lp.add_constraint(std::move(row),
                          rts == ReturnsToScale::Variable ? ConstraintSense::Equal : ConstraintSense::LessEqual,
                          1.0);
    }
    return lp;
}

DeaScores dea_output(const DeaInstance& inst, ReturnsToScale rts, double tol) {
    inst.validate();

    DeaInstance scaled = inst;
    auto rescale = [](std::vector<std::vector<double>>& m) {
        for (std::size_t k = 0; k < m.front().size(); ++k) {
            double top = 0.0;
            for (const auto& row : m) top = std::max(top, row[k]);
            if (top > 0.0)
                for (auto& row : m) row[k] /= top;
        }
    };
    rescale(scaled.inputs);
    rescale(scaled.outputs);

    DeaScores scores;
    scores.rts = rts;
    for (std::size_t o = 0; o < inst.units.size(); ++o) {
        DeaUnitScore s;
        s.unit = inst.units[o];
        const auto sol = solve_lp(dea_program(scaled, o, rts), tol);
        s.status = sol.status;
        if (sol.optimal()) {
            // lambda = e_o is always feasible, so phi >= 1; snap rounding noise.
            s.phi = sol.value - 1.0 < 1e-10 ? 1.0 : sol.value;
            s.efficiency = 1.0 / s.phi;
        } else {
            s.phi = std::numeric_limits<double>::quiet_NaN();
            s.efficiency = std::numeric_limits<double>::quiet_NaN();
        }
        scores.units.push_back(std::move(s));
    }
    return scores;
}

DeaInstance read_dea_units(const std::filesystem::path& path) {
    auto reader = csv::Reader::open(path);
    csv::expect_header(reader, {"unit_id", "backlog", "expenditures_cents", "completed_cases"}, path);
    DeaInstance inst;
    std::vector<std::string> f;
    while (reader.next(f)) {
        const auto where = path.string() + ":" + std::to_string(reader.line()) + ": ";
        if (f.size() != 4) throw DataError(where + "wrong column count");
        auto backlog = csv::parse_double(f[1]);
        auto spend = csv::parse_double(f[2]);
        auto done = csv::parse_double(f[3]);
        if (!backlog || !spend || !done) throw DataError(where + "non-numeric value");
        if (std::find(inst.units.begin(), inst.units.end(), f[0]) != inst.units.end())
            throw DataError(where + "duplicate unit '" + f[0] + "'");
        inst.units.push_back(f[0]);
        inst.inputs.push_back({*backlog, *spend});
        inst.outputs.push_back({*done});
    }
    return inst;
}

void write_dea_units(const DeaInstance& inst, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    csv::Writer w(out);
    w.row({"unit_id", "backlog", "expenditures_cents", "completed_cases"});
    for (std::size_t j = 0; j < inst.units.size(); ++j)
        w.field(inst.units[j]).field(inst.inputs[j][0]).field(inst.inputs[j][1]).field(inst.outputs[j][0]).end_row();
    if (!out) throw DataError("cannot write " + path.string());
}

void write_dea_scores(const DeaScores& scores, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    csv::Writer w(out);
    w.row({"unit_id", "phi", "efficiency", "status"});
    for (const auto& s : scores.units)
        w.field(s.unit).field(s.phi).field(s.efficiency).field(to_string(s.status)).end_row();
    if (!out) throw DataError("cannot write " + path.string());
}

}  // namespace econet
