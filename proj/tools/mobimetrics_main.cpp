// mobimetrics -- pipeline orchestrator. Every stage is a subcommand; anything
// that affects numbers comes from a config file, flags only select stages,
// paths, and the thread count. Exit codes: 0 success, 1 validation/runtime
// error, 2 usage error.

#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "mobimetrics/pipeline.hpp"
#include "mobimetrics/synth.hpp"
#include "mobimetrics/version.hpp"

namespace {

struct StageArgs {
    std::string config_path;
    std::string out_dir = ".";
    unsigned threads = 1;
};

void add_common(CLI::App* cmd, StageArgs& args) {
    cmd->add_option("--config", args.config_path, "config file")->required();
    cmd->add_option("--out", args.out_dir, "output directory");
    cmd->add_option("--threads", args.threads, "worker threads (results are independent of this)")
        ->check(CLI::Range(1u, 64u));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mobimetrics: mobility-trace economic index pipeline"};
    app.set_version_flag("--version", std::string(mobimetrics::kVersion));
    app.require_subcommand(1);

    StageArgs args;
    CLI::App* synth_cmd = app.add_subcommand("synth", "generate a synthetic world with ground truth");
    CLI::App* ingest_cmd = app.add_subcommand("ingest", "parse and validate inputs, emit reject report");
    CLI::App* cohort_cmd = app.add_subcommand("cohort", "13-month continuous-user cohorts per report month");
    CLI::App* presence_cmd = app.add_subcommand("presence", "per-user AOI presence matrix and counts");
    CLI::App* index_cmd = app.add_subcommand("index", "employment, consumer and consumption trends indices");
    CLI::App* fit_cmd = app.add_subcommand("fit", "foot-traffic regression report per venue");
    CLI::App* nowcast_cmd = app.add_subcommand("nowcast", "rolling out-of-sample box-office forecast");
    CLI::App* detect_cmd = app.add_subcommand("detect", "forecast-residual fraud detection");
    for (CLI::App* cmd : {synth_cmd, ingest_cmd, cohort_cmd, presence_cmd, index_cmd, fit_cmd, nowcast_cmd,
                          detect_cmd})
        add_common(cmd, args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    using namespace mobimetrics;
    try {
        if (synth_cmd->parsed()) {
            const auto cfg = synth::WorldConfig::from_config(ConfigFile::load(args.config_path));
            const auto truth = synth::generate_world(cfg, args.out_dir);
            std::printf("world written to %s (%zu positioning lines, %zu query lines)\n", args.out_dir.c_str(),
                        truth.positioning_lines, truth.query_lines);
            return 0;
        }
        const auto cfg = pipeline::PipelineConfig::load(args.config_path);
        nlohmann::ordered_json summary;
        if (ingest_cmd->parsed()) summary = pipeline::run_ingest(cfg, args.out_dir);
        else if (cohort_cmd->parsed()) summary = pipeline::run_cohort(cfg, args.out_dir);
        else if (presence_cmd->parsed()) summary = pipeline::run_presence(cfg, args.out_dir, args.threads);
        else if (index_cmd->parsed()) summary = pipeline::run_index(cfg, args.out_dir, args.threads);
        else if (fit_cmd->parsed()) summary = pipeline::run_fit(cfg, args.out_dir);
        else if (nowcast_cmd->parsed()) summary = pipeline::run_nowcast(cfg, args.out_dir);
        else if (detect_cmd->parsed()) summary = pipeline::run_detect(cfg, args.out_dir);
        // console line stays short; the full documents are the output files
        summary.erase("venues");
        summary.erase("daily");
        std::printf("%s\n", summary.dump().c_str());
        return 0;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
