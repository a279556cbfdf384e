#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bodygen/pipeline.hpp"

namespace {

bodygen::RunConfig load_config(const std::string& config_path) {
    bodygen::RunConfig cfg;
    if (config_path.empty()) return cfg;
    std::ifstream in(config_path);
    if (!in) throw std::runtime_error("cannot open config file " + config_path);
    nlohmann::json j;
    in >> j;
    bodygen::from_json(j, cfg);
    return cfg;
}

int run_generate_command(const std::string& config_path, std::optional<std::uint64_t> seed,
                         std::optional<std::string> out_dir, std::optional<int> sequences,
                         std::optional<int> workers) {
    bodygen::RunConfig cfg;
    try {
        cfg = load_config(config_path);
        if (seed) cfg.master_seed = *seed;
        if (out_dir) cfg.output_dir = *out_dir;
        if (sequences) cfg.sequence_count = *sequences;
        if (workers) cfg.workers = *workers;
        cfg.validate();
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    }

    const bodygen::RunResult result = bodygen::run_generate(cfg);
    int ok = 0;
    for (const auto& s : result.sequences) {
        if (s.ok) {
            ++ok;
            std::cout << bodygen::sequence_dir_name(s.sequence_id) << ": " << s.actors_placed << " actors ("
                      << s.actors_skipped << " skipped), " << s.cameras_placed << " cameras, " << s.records_kept
                      << "/" << s.records_total << " records kept\n";
        } else {
            std::cout << bodygen::sequence_dir_name(s.sequence_id) << ": FAILED: " << s.error << "\n";
        }
    }
    std::cout << ok << "/" << result.sequences.size() << " sequences completed\n";
    return result.failed() > 0 ? 2 : 0;
}

int run_validate_command(const std::vector<std::string>& scene_paths) {
    bool any_violation = false;
    for (const auto& path : scene_paths) {
        try {
            const auto violations = bodygen::validate_scene_file(path);
            if (violations.empty()) {
                std::cout << path << ": ok\n";
            } else {
                any_violation = true;
                std::cout << path << ": " << violations.size() << " violation(s)\n";
                for (const auto& v : violations) std::cout << "  - " << v << "\n";
            }
        } catch (const std::exception& e) {
            std::cerr << path << ": error: " << e.what() << "\n";
            return 1;
        }
    }
    return any_violation ? 2 : 0;
}

int run_fit_report_command(const std::string& sequence_dir) {
    try {
        const auto summary = bodygen::fit_report(sequence_dir);
        nlohmann::json j{{"actor_count", summary.actor_count},
                         {"frame_count", summary.frame_count},
                         {"mean_mpjpe", summary.mean_mpjpe},
                         {"max_mpjpe", summary.max_mpjpe},
                         {"all_converged", summary.all_converged}};
        std::cout << j.dump(2) << "\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "fit-report error: " << e.what() << "\n";
        return 1;
    }
}

int run_sample_command(const std::string& config_path, std::optional<std::uint64_t> seed,
                       std::optional<int> sequences) {
    bodygen::RunConfig cfg;
    try {
        cfg = load_config(config_path);
        if (seed) cfg.master_seed = *seed;
        if (sequences) cfg.sequence_count = *sequences;
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    }

    bodygen::AssetCatalog catalog;
    if (!cfg.catalog_file.empty()) {
        std::ifstream in(cfg.catalog_file);
        if (!in) {
            std::cerr << "config error: cannot open catalog file " << cfg.catalog_file << "\n";
            return 1;
        }
        nlohmann::json j;
        in >> j;
        bodygen::from_json(j, catalog);
    }
    const int scene_count = cfg.scene_files.empty() ? 1 : static_cast<int>(cfg.scene_files.size());
    nlohmann::json out = nlohmann::json::array();
    for (int k = 0; k < cfg.sequence_count; ++k) {
        bodygen::Rng rng = bodygen::Rng::stream(cfg.master_seed, static_cast<std::uint64_t>(k));
        const auto spec = bodygen::sample_sequence_spec(rng, catalog, cfg.motion_library_size, scene_count,
                                                        cfg.fps, cfg.camera_count);
        nlohmann::json sj;
        bodygen::to_json(sj, spec);
        sj["sequence_id"] = k;
        out.push_back(std::move(sj));
    }
    std::cout << out.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"bodygen: layered-actor synthetic sequence generator"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<int> sequences;
    std::optional<int> workers;

    auto* generate = app.add_subcommand("generate", "run the batch pipeline");
    generate->add_option("--config", config_path, "JSON run configuration");
    generate->add_option("--seed", seed, "master seed (overrides config)");
    generate->add_option("--out", out_dir, "output directory (overrides config)");
    generate->add_option("--sequences", sequences, "sequence count (overrides config)");
    generate->add_option("--workers", workers, "worker thread count (overrides config)");

    std::vector<std::string> scene_paths;
    auto* validate = app.add_subcommand("validate", "validate scene files");
    validate->add_option("scenes", scene_paths, "scene JSON files")->required();

    std::string sequence_dir;
    auto* fit_report = app.add_subcommand("fit-report", "aggregate fit residuals of a sequence directory");
    fit_report->add_option("dir", sequence_dir, "sequence directory")->required();

    auto* sample = app.add_subcommand("sample", "dry-run: print sampled sequence specs");
    sample->add_option("--config", config_path, "JSON run configuration");
    sample->add_option("--seed", seed, "master seed (overrides config)");
    sample->add_option("--sequences", sequences, "sequence count (overrides config)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (generate->parsed()) return run_generate_command(config_path, seed, out_dir, sequences, workers);
        if (validate->parsed()) return run_validate_command(scene_paths);
        if (fit_report->parsed()) return run_fit_report_command(sequence_dir);
        if (sample->parsed()) return run_sample_command(config_path, seed, sequences);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
