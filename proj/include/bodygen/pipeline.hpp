#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bodygen/annotation.hpp"
#include "bodygen/assets.hpp"
#include "bodygen/body_model.hpp"
#include "bodygen/camera.hpp"
#include "bodygen/fitting.hpp"
#include "bodygen/scene.hpp"

namespace bodygen {

struct RunConfig {
    std::uint64_t master_seed = 0;
    int sequence_count = 1;
    std::string output_dir = "out";
    int workers = 1;

    std::vector<std::string> scene_files;  // empty -> built-in flat scene
    std::string catalog_file;              // empty -> default catalog
    std::string source_model_file;         // empty -> built-in 24-joint body
    std::string fit_model_file;            // empty -> built-in 21-joint body

    PlacementConfig placement;
    CameraConstraints camera;
    FitConfig fit;

    double fov_deg = 60.0;
    int image_width = 256;
    int image_height = 256;
    double fps = 30.0;
    int camera_count = 4;
    double shape_sigma = 0.5;
    int motion_library_size = 8;
    double capsule_radius = kDefaultCapsuleRadius;
    double box_margin = 0.05;       // expansion of per-frame actor boxes
    double bbox_margin = 0.05;      // 2D keypoint box margin fraction
    int occlusion_sample_frames = 8;

    void validate() const;
};

struct SequenceOutcome {
    int sequence_id = 0;
    bool ok = false;
    std::string error;
    int actors_placed = 0;
    int actors_skipped = 0;
    int cameras_placed = 0;
    int records_total = 0;
    int records_kept = 0;
};

struct RunResult {
    std::vector<SequenceOutcome> sequences;
    int failed() const {
        int n = 0;
        for (const auto& s : sequences) n += s.ok ? 0 : 1;
        return n;
    }
};

// Runs the whole batch: sample -> retarget -> place actors -> place cameras
// -> world poses -> refit -> emit annotations/masks/depth + manifest, one
// directory per sequence. Fully determined by (config, master seed).
RunResult run_generate(const RunConfig& config);

// Schema and consistency check of a scene file; returns human-readable
// violations (empty = clean). Throws on unreadable or ill-formed files.
std::vector<std::string> validate_scene_file(const std::string& path);

struct FitReportSummary {
    int actor_count = 0;
    int frame_count = 0;
    double mean_mpjpe = 0.0;
    double max_mpjpe = 0.0;
    bool all_converged = true;
};

// Aggregates the per-actor fit blocks of a completed sequence directory.
FitReportSummary fit_report(const std::string& sequence_dir);

// Directory name for sequence k, e.g. "seq_00003".
std::string sequence_dir_name(int sequence_id);

void to_json(nlohmann::json& j, const RunConfig& c);
void from_json(const nlohmann::json& j, RunConfig& c);

}  // namespace bodygen
