// featbench: config-driven feature-selection benchmark runner.
//
// Subcommands:
//   run     --config <json> [--seed N] [--format markdown|csv] [--out path]
//           [--threads N] [--dump-scores dir] [--dump-models dir]
//   synth   --spec <json> --out <csv>
//   extract --images <dir> --config <json> --out <csv>
//
// Exit codes: 0 success, 2 config error, 3 data error, 1 anything else.

#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "featbench/featbench.hpp"

namespace {

void write_text(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw featbench::DataError("cannot write " + path);
    out << text;
}

int cmd_run(const std::string& config_path, bool seed_set, std::uint64_t seed,
            const std::string& format, const std::string& out_path, unsigned threads,
            const std::string& dump_scores, const std::string& dump_models) {
    featbench::PipelineConfig cfg = featbench::load_config(config_path);
    if (seed_set) cfg.seed = seed;
    if (format == "markdown")
        cfg.report.format = featbench::ReportFormat::markdown;
    else if (format == "csv")
        cfg.report.format = featbench::ReportFormat::csv;
    else if (!format.empty())
        throw featbench::ConfigError("config: --format must be 'markdown' or 'csv'");

    featbench::RunOptions opts;
    opts.threads = threads;
    opts.dump_scores_dir = dump_scores;
    opts.dump_models_dir = dump_models;
    const featbench::BenchReport report = featbench::run_pipeline(cfg, opts);
    write_text(out_path, featbench::emit_report(report, cfg.report.format));
    return 0;
}

int cmd_synth(const std::string& spec_path, const std::string& out_path) {
    std::ifstream in(spec_path);
    if (!in) throw featbench::ConfigError("config: cannot open " + spec_path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw featbench::ConfigError("config: " + spec_path + ": " + e.what());
    }
    // The spec file is the synth object of a pipeline data block, minus the
    // type tag; a global seed default of 0 applies when the file sets none.
    j["type"] = "synth";
    const featbench::DataConfig data = featbench::cfg::parse_data(j, "$");
    featbench::SynthSpec spec = data.synth;
    const featbench::SynthResult result = featbench::synth_generate(spec);
    featbench::save_csv(result.data, out_path);
    return 0;
}

int cmd_extract(const std::string& images_dir, const std::string& config_path,
                const std::string& out_path) {
    std::ifstream in(config_path);
    if (!in) throw featbench::ConfigError("config: cannot open " + config_path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw featbench::ConfigError("config: " + config_path + ": " + e.what());
    }
    // Accepts either a full pipeline config holding an images data block or
    // the bare extraction block (glcm/gabor keys only). --images always
    // names the directory.
    nlohmann::json block;
    std::string at = "$";
    if (j.is_object() && j.contains("data")) {
        block = j["data"];
        at = "$.data";
        if (!block.is_object() || block.value("type", "") != "images")
            throw featbench::ConfigError("config: $.data: extract needs an images data source");
    } else {
        block = j;
        block["type"] = "images";
    }
    block["dir"] = images_dir;
    const featbench::DataConfig data = featbench::cfg::parse_data(block, at);
    const featbench::Dataset extracted = featbench::load_image_dataset(data);
    featbench::save_csv(extracted, out_path);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"feature-selection benchmark harness"};
    app.require_subcommand(1);

    std::string config_path, out_path, format, spec_path, images_dir;
    std::string dump_scores, dump_models;
    std::uint64_t seed = 0;
    unsigned threads = 1;

    CLI::App* run = app.add_subcommand("run", "run the benchmark grid from a config file");
    run->add_option("--config", config_path, "pipeline config JSON")->required();
    CLI::Option* seed_opt = run->add_option("--seed", seed, "override the config's global seed");
    run->add_option("--format", format, "report format: markdown or csv");
    run->add_option("--out", out_path, "write the report here instead of stdout");
    run->add_option("--threads", threads, "grid cells per parallel batch");
    run->add_option("--dump-scores", dump_scores, "directory for selector score/ranking dumps");
    run->add_option("--dump-models", dump_models, "directory for trained model text dumps");

    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic labeled CSV");
    synth->add_option("--spec", spec_path, "synth spec JSON")->required();
    CLI::Option* synth_out = synth->add_option("--out", out_path, "output CSV path");
    synth_out->required();

    CLI::App* extract = app.add_subcommand("extract", "extract texture features from PGM images");
    extract->add_option("--images", images_dir, "directory laid out as <dir>/<class>/*.pgm")
        ->required();
    extract->add_option("--config", config_path, "extraction config JSON")->required();
    extract->add_option("--out", out_path, "output CSV path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed())
            return cmd_run(config_path, seed_opt->count() > 0, seed, format, out_path, threads,
                           dump_scores, dump_models);
        if (synth->parsed()) return cmd_synth(spec_path, out_path);
        if (extract->parsed()) return cmd_extract(images_dir, config_path, out_path);
    } catch (const featbench::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const featbench::DataError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
