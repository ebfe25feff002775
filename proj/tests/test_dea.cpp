#include <doctest.h>

#include <random>

#include "econet/dea.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace econet;

namespace {

DeaInstance random_instance(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> count(1, 5);
    std::uniform_real_distribution<double> backlog(100.0, 10000.0);
    std::uniform_real_distribution<double> spend(1e5, 1e9);
    std::uniform_real_distribution<double> done(10.0, 5000.0);
    DeaInstance inst;
    const int n = count(rng);
    for (int j = 0; j < n; ++j) {
        inst.units.push_back("u" + std::to_string(j));
        inst.inputs.push_back({backlog(rng), spend(rng)});
        inst.outputs.push_back({done(rng)});
    }
    return inst;
}

}  // namespace

TEST_CASE("planted three-unit example") {
    DeaInstance inst;
    inst.units = {"A", "B", "C"};
    inst.inputs = {{1, 1}, {2, 1}, {1, 1}};
    inst.outputs = {{2}, {2}, {1}};
    const auto s = dea_output_nirs(inst);
    CHECK(s.find("A")->efficiency == doctest::Approx(1.0));
    CHECK(s.find("C")->efficiency == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(s.find("C")->phi == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(s.find("B")->efficiency == doctest::Approx(1.0));
    CHECK(s.find("Z") == nullptr);
}

TEST_CASE("returns-to-scale variants are ordered") {
    // Unit 2 is twice unit 1: CRS sees them as equal, VRS lets small units
    // off the hook.
    DeaInstance inst;
    inst.units = {"s", "b", "m"};
    inst.inputs = {{1, 1}, {2, 2}, {1.5, 1.5}};
    inst.outputs = {{1}, {3}, {1.2}};
    const auto crs = dea_output(inst, ReturnsToScale::Constant);
    const auto nirs = dea_output(inst, ReturnsToScale::NonIncreasing);
    const auto vrs = dea_output(inst, ReturnsToScale::Variable);
    for (std::size_t j = 0; j < inst.units.size(); ++j) {
        CHECK(crs.units[j].efficiency <= nirs.units[j].efficiency + 1e-12);
        CHECK(nirs.units[j].efficiency <= vrs.units[j].efficiency + 1e-12);
    }
    CHECK(crs.units[0].efficiency == doctest::Approx(2.0 / 3.0));
    CHECK(vrs.units[0].efficiency == doctest::Approx(1.0));
}

TEST_CASE("random instances match the vertex-enumeration oracle") {
    std::mt19937_64 rng(99);
    for (int rep = 0; rep < 30; ++rep) {
        const auto inst = random_instance(rng);
        for (auto rts : {ReturnsToScale::NonIncreasing, ReturnsToScale::Constant, ReturnsToScale::Variable}) {
            const auto s = dea_output(inst, rts);
            bool any_efficient = false;
            for (std::size_t o = 0; o < inst.units.size(); ++o) {
                REQUIRE(s.units[o].ok());
                const auto phi = oracle::lp_vertex_max(dea_program(inst, o, rts));
                REQUIRE(phi);
                CHECK(std::abs(s.units[o].efficiency - 1.0 / *phi) < 1e-7);
                CHECK(s.units[o].phi >= 1.0);
                CHECK(s.units[o].efficiency <= 1.0);
                any_efficient = any_efficient || s.units[o].efficiency == 1.0;
            }
            CHECK(any_efficient);
        }
    }
}

TEST_CASE("scores are invariant to input column rescaling") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> scale(1e-4, 1e4);
    for (int rep = 0; rep < 30; ++rep) {
        const auto inst = random_instance(rng);
        auto scaled = inst;
        const double a = scale(rng), b = scale(rng), c = scale(rng);
        for (auto& x : scaled.inputs) {
            x[0] *= a;
            x[1] *= b;
        }
        for (auto& y : scaled.outputs) y[0] *= c;
        const auto s1 = dea_output_nirs(inst);
        const auto s2 = dea_output_nirs(scaled);
        for (std::size_t j = 0; j < inst.units.size(); ++j)
            CHECK(std::abs(s1.units[j].efficiency - s2.units[j].efficiency) < 1e-9);
    }
}

TEST_CASE("invalid instances") {
    DeaInstance inst;
    CHECK_THROWS_AS(dea_output_nirs(inst), DataError);
    inst.units = {"a"};
    inst.inputs = {{0.0, 1.0}};
    inst.outputs = {{1.0}};
    CHECK_THROWS_AS(dea_output_nirs(inst), DataError);
    inst.inputs = {{1.0, 1.0}};
    inst.outputs = {{0.0}};
    CHECK_THROWS_AS(dea_output_nirs(inst), DataError);
    inst.outputs = {{2.0}};
    CHECK(dea_output_nirs(inst).units[0].efficiency == 1.0);
}

TEST_CASE("unit and score files") {
    const auto dir = oracle::fresh_dir("dea_files");
    fixture::write_text(dir / "units.csv",
                        "unit_id,backlog,expenditures_cents,completed_cases\nA,1,1,2\nB,2,1,2\nC,1,1,1\n");
    const auto inst = read_dea_units(dir / "units.csv");
    CHECK(inst.units == std::vector<std::string>{"A", "B", "C"});
    write_dea_scores(dea_output_nirs(inst), dir / "scores.csv");
    CHECK(fixture::read_text(dir / "scores.csv") ==
          "unit_id,phi,efficiency,status\nA,1,1,optimal\nB,1,1,optimal\nC,2,0.5,optimal\n");
    fixture::write_text(dir / "dup.csv", "unit_id,backlog,expenditures_cents,completed_cases\nA,1,1,2\nA,2,1,2\n");
    CHECK_THROWS_AS(read_dea_units(dir / "dup.csv"), DataError);
    CHECK(parse_returns_to_scale("vrs") == ReturnsToScale::Variable);
    CHECK_FALSE(parse_returns_to_scale("drs"));
}
