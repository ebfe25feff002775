// econet: city supply-chain network analytics from wire-transfer records.

#include <CLI11.hpp>

#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "econet/pipeline.hpp"

namespace fs = std::filesystem;
using namespace econet;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

// Config file values overlaid with whichever flags were given.
struct Settings {
    std::string config;
    std::map<std::string, std::string> flags;

    void flag(CLI::App* app, const std::string& name, const std::string& key, const std::string& help) {
        app->add_option_function<std::string>(
            name, [this, key](const std::string& v) { flags[key] = v; }, help);
    }

    std::pair<SynthConfig, PipelineParams> resolve() const {
        std::map<std::string, std::string> values;
        if (!config.empty()) values = read_key_value_file(config);
        for (const auto& [k, v] : flags) values[k] = v;
        SynthConfig synth;
        PipelineParams params;
        const auto synth_rest = synth.apply(values);
        const auto params_rest = params.apply(values);
        for (const auto& [key, value] : synth_rest)
            if (params_rest.count(key)) throw UsageError("unknown configuration key '" + key + "'");
        synth.validate();
        params.validate();
        return {synth, params};
    }
};

void common_flags(CLI::App* app, Settings& s) {
    app->add_option("--config", s.config, "key=value configuration file")->check(CLI::ExistingFile);
    s.flag(app, "--years", "years", "study window A..B");
    s.flag(app, "--damping", "damping", "PageRank damping factor");
    s.flag(app, "--orientation", "orientation", "money-flow or reversed");
    s.flag(app, "--top-k", "top_k", "ranking length");
    s.flag(app, "--assortativity", "assortativity_mode", "out-in, out-out, in-in or in-out");
    s.flag(app, "--rts", "dea_rts", "DEA returns to scale: crs, nirs or vrs");
    s.flag(app, "--seed", "seed", "generator seed");
}

// Stages into a sibling temp directory and renames on success.
void staged(const std::string& stage, const fs::path& out, const std::function<void(const fs::path&)>& body) {
    run_stage(stage, [&] {
        StagedDirectory dir(out);
        body(dir.path());
        dir.commit();
    });
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"City supply-chain network analytics from wire-transfer records"};
    app.require_subcommand(1);
    app.set_version_flag("--version", ECONET_VERSION);

    Settings settings;
    std::string out, data, measures, units, panel, measure, run_dir;
    std::vector<std::string> outcomes;
    std::vector<double> beta{2.0, -1.0};
    double noise_sd = 0.0;
    int year = 0, n_years = 10, n_cities = 500;
    bool known_beta = false;

    auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
    common_flags(synth, settings);
    synth->add_option("--out", out, "output dataset directory")->required();
    synth->add_flag("--known-beta", known_beta, "write a planted-coefficient regression panel instead");
    synth->add_option("--beta", beta, "planted coefficients (with --known-beta)")->delimiter(',');
    synth->add_option("--noise-sd", noise_sd, "outcome noise (with --known-beta)");
    synth->add_option("--panel-cities", n_cities, "cities in the planted panel");
    synth->add_option("--panel-years", n_years, "years in the planted panel");

    auto* build = app.add_subcommand("build", "aggregate transactions into yearly city graphs");
    common_flags(build, settings);
    build->add_option("--data", data, "dataset directory")->required();
    build->add_option("--out", out, "output directory")->required();

    auto* meas = app.add_subcommand("measures", "compute network and dependence measures");
    common_flags(meas, settings);
    meas->add_option("--data", data, "dataset directory")->required();
    meas->add_option("--out", out, "output directory")->required();

    auto* rank = app.add_subcommand("rank", "rank cities by one measure");
    common_flags(rank, settings);
    rank->add_option("--measures", measures, "measures directory")->required();
    rank->add_option("--measure", measure, "measure name")->required();
    rank->add_option("--year", year, "year")->required();
    rank->add_option("--data", data, "dataset directory (adds city names)");
    rank->add_option("--out", out, "output directory")->required();

    auto* dea = app.add_subcommand("dea", "output-oriented DEA efficiency scores");
    common_flags(dea, settings);
    dea->add_option("--units", units, "dea_units.csv")->required();
    dea->add_option("--out", out, "output directory")->required();

    auto* regress = app.add_subcommand("regress", "region-year fixed-effects regressions");
    common_flags(regress, settings);
    regress->add_option("--data", data, "dataset directory");
    regress->add_option("--measures", measures, "measures directory");
    regress->add_option("--panel", panel, "pre-assembled panel.csv");
    regress->add_option("--outcomes", outcomes, "outcome columns of --panel")->delimiter(',');
    regress->add_option("--out", out, "output directory")->required();

    auto* report = app.add_subcommand("report", "plot-ready series from a run directory");
    common_flags(report, settings);
    report->add_option("run", run_dir, "run directory holding dataset/ and measures/")->required();
    report->add_option("--out", out, "output directory (default RUN/report)");

    auto* run = app.add_subcommand("run", "synth, build, measures, regress and report in one go");
    common_flags(run, settings);
    run->add_option("--out", out, "run directory")->required();

    std::string stage = "econet";
    try {
        app.parse(argc, argv);
        const auto resolved = settings.resolve();
        const SynthConfig& synth_cfg = resolved.first;
        const PipelineParams& params = resolved.second;

        if (synth->parsed()) {
            stage = "synth";
            if (known_beta) {
                KnownBetaConfig kb;
                kb.seed = synth_cfg.seed;
                kb.beta = beta;
                kb.noise_sd = noise_sd;
                kb.n_cities = n_cities;
                kb.n_years = n_years;
                staged(stage, out, [&](const fs::path& dir) {
                    write_known_beta_panel(kb, dir);
                    RunManifest m("synth --known-beta");
                    m.param({{"seed", std::to_string(kb.seed)}});
                    m.write(dir);
                });
            } else {
                staged(stage, out, [&](const fs::path& dir) { stage_synth(synth_cfg, dir); });
            }
        } else if (build->parsed()) {
            stage = "build";
            staged(stage, out, [&](const fs::path& dir) { stage_build(data, params, dir); });
        } else if (meas->parsed()) {
            stage = "measures";
            staged(stage, out, [&](const fs::path& dir) { stage_measures(data, params, dir); });
        } else if (rank->parsed()) {
            stage = "rank";
            std::optional<fs::path> names;
            if (!data.empty()) names = data;
            staged(stage, out, [&](const fs::path& dir) {
                stage_rank(measures, measure, year, params.top_k, names, dir);
            });
        } else if (dea->parsed()) {
            stage = "dea";
            staged(stage, out, [&](const fs::path& dir) { stage_dea(units, params, dir); });
        } else if (regress->parsed()) {
            stage = "regress";
            if (!panel.empty()) {
                if (!data.empty() || !measures.empty())
                    throw UsageError("--panel cannot be combined with --data/--measures");
                if (outcomes.empty()) outcomes = kOutcomeNames;
                staged(stage, out, [&](const fs::path& dir) { stage_regress_panel(panel, outcomes, params, dir); });
            } else {
                if (data.empty() || measures.empty())
                    throw UsageError("regress needs --data and --measures, or --panel");
                staged(stage, out, [&](const fs::path& dir) { stage_regress(data, measures, params, dir); });
            }
        } else if (report->parsed()) {
            stage = "report";
            const fs::path root = run_dir;
            const fs::path target = out.empty() ? root / "report" : fs::path(out);
            staged(stage, target, [&](const fs::path& dir) {
                stage_report(root / "dataset", root / "measures", dir);
            });
        } else if (run->parsed()) {
            stage = "run";
            staged(stage, out, [&](const fs::path& dir) { stage_run(synth_cfg, params, dir); });
        }
        return kOk;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "econet: usage: " << e.what() << "\n";
        return kUsage;
    } catch (const UsageError& e) {
        std::cerr << "econet: " << e.what() << "\n";
        return kUsage;
    } catch (const NumericalError& e) {
        std::cerr << "econet: " << e.what() << "\n";
        return kNumerical;
    } catch (const std::exception& e) {
        std::cerr << "econet: " << e.what() << "\n";
        return kData;
    }
}
