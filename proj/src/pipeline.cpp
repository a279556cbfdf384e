#include "bodygen/pipeline.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "bodygen/sha256.hpp"

namespace fs = std::filesystem;

namespace bodygen {

void RunConfig::validate() const {
    if (sequence_count < 1) throw std::invalid_argument("RunConfig: sequence_count must be >= 1");
    if (workers < 1) throw std::invalid_argument("RunConfig: workers must be >= 1");
    if (output_dir.empty()) throw std::invalid_argument("RunConfig: output_dir must be set");
    if (image_width <= 0 || image_height <= 0) throw std::invalid_argument("RunConfig: bad resolution");
    if (!(fps > 0.0)) throw std::invalid_argument("RunConfig: fps must be positive");
    if (!(fov_deg > 0.0) || !(fov_deg < 180.0)) throw std::invalid_argument("RunConfig: fov_deg out of range");
    if (camera_count < 1) throw std::invalid_argument("RunConfig: camera_count must be >= 1");
    if (shape_sigma < 0.0) throw std::invalid_argument("RunConfig: shape_sigma must be non-negative");
    if (motion_library_size < 1) throw std::invalid_argument("RunConfig: motion library must be non-empty");
    if (!(capsule_radius > 0.0)) throw std::invalid_argument("RunConfig: capsule_radius must be positive");
    if (box_margin < 0.0 || bbox_margin < 0.0) throw std::invalid_argument("RunConfig: margins must be >= 0");
    if (occlusion_sample_frames < 1) throw std::invalid_argument("RunConfig: occlusion_sample_frames >= 1");
    placement.validate();
    camera.validate();
    fit.validate();
    for (const auto& path : scene_files) {
        if (!fs::exists(path)) throw std::invalid_argument("RunConfig: scene file not found: " + path);
    }
    for (const std::string* path : {&catalog_file, &source_model_file, &fit_model_file}) {
        if (!path->empty() && !fs::exists(*path)) {
            throw std::invalid_argument("RunConfig: file not found: " + *path);
        }
    }
}

std::string sequence_dir_name(int sequence_id) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "seq_%05d", sequence_id);
    return buf;
}

namespace {

nlohmann::json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    nlohmann::json j;
    in >> j;
    return j;
}

SceneLayout builtin_scene() {
    SceneLayout scene;
    scene.bounds = {-10.0, -10.0, 10.0, 10.0};
    scene.objects = {{3.0, 2.0, 1.5, 1.0}, {-4.0, -3.0, 2.0, 1.5}, {0.0, -5.5, 1.0, 3.0}, {-2.0, 5.5, 2.5, 1.2}};
    scene.heightfield = Heightfield::constant(0.0);
    return scene;
}

struct SharedAssets {
    LbsBodyModel source_model;
    LbsBodyModel fit_model;
    AssetCatalog catalog;
    std::vector<SceneLayout> scenes;
    std::vector<MotionClip> motion_library;
    CorrespondenceMap fit_correspondence;
};

SharedAssets load_shared(const RunConfig& cfg) {
    SharedAssets shared;
    shared.source_model =
        cfg.source_model_file.empty() ? builtin_body_24() : load_json_file(cfg.source_model_file).get<LbsBodyModel>();
    shared.fit_model =
        cfg.fit_model_file.empty() ? builtin_body_21() : load_json_file(cfg.fit_model_file).get<LbsBodyModel>();
    if (cfg.catalog_file.empty()) {
        shared.catalog = AssetCatalog{};
    } else {
        shared.catalog = load_json_file(cfg.catalog_file).get<AssetCatalog>();
    }
    if (cfg.scene_files.empty()) {
        shared.scenes.push_back(builtin_scene());
    } else {
        for (const auto& path : cfg.scene_files) shared.scenes.push_back(load_json_file(path).get<SceneLayout>());
    }

    // Library clips are long enough for the maximum sequence duration and get
    // truncated per sequence; seeds derive from the master seed only.
    const int clip_frames = static_cast<int>(std::lround(10.0 * cfg.fps)) + 1;
    const std::uint64_t library_seed = hash_tag(mix64(cfg.master_seed), "motion-library");
    for (int i = 0; i < cfg.motion_library_size; ++i) {
        shared.motion_library.push_back(synthesize_motion_clip(
            shared.source_model.skeleton, cfg.fps, clip_frames, hash_combine(library_seed, static_cast<std::uint64_t>(i))));
    }

    shared.fit_correspondence = correspond_joints_by_name(shared.fit_model, shared.source_model);
    if (shared.fit_correspondence.joints.empty()) {
        throw std::runtime_error("fit model shares no joint names with the source model");
    }
    return shared;
}

MotionClip cut_to_frames(const MotionClip& clip, int frame_count) {
    MotionClip out;
    out.fps = clip.fps;
    out.frames.reserve(static_cast<std::size_t>(frame_count));
    const int n = clip.frame_count();
    for (int f = 0; f < frame_count; ++f) out.frames.push_back(clip.frames[static_cast<std::size_t>(f % n)]);
    return out;
}

struct ActorRuntime {
    int actor_id = 0;  // 1-based; doubles as the mask instance id
    int clip_id = 0;
    Eigen::VectorXd beta;
    Skeleton skeleton;
    double yaw = 0.0;
    Transform placement;
    Footprint footprint;
    std::vector<PoseFrame> world_poses;
    std::vector<std::vector<Vec3>> world_joints;
};

std::string write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
    out.close();
    return sha256_hex(text);
}

SequenceOutcome generate_sequence(const RunConfig& cfg, const SharedAssets& shared, int seq_id) {
    SequenceOutcome outcome;
    outcome.sequence_id = seq_id;

    const fs::path seq_dir = fs::path(cfg.output_dir) / sequence_dir_name(seq_id);
    fs::create_directories(seq_dir);

    Rng rng = Rng::stream(cfg.master_seed, static_cast<std::uint64_t>(seq_id));
    const SequenceSpec spec = sample_sequence_spec(rng, shared.catalog, cfg.motion_library_size,
                                                   static_cast<int>(shared.scenes.size()), cfg.fps,
                                                   cfg.camera_count);
    const int frame_count = std::max(1, static_cast<int>(std::lround(spec.duration_s * spec.fps)));

    SceneLayout scene = shared.scenes[static_cast<std::size_t>(spec.scene_id)];
    const CameraIntrinsics intrinsics = CameraIntrinsics::with_fov(
        cfg.fov_deg * 0.017453292519943295, cfg.image_width, cfg.image_height);

    nlohmann::json manifest;
    manifest["sequence_id"] = seq_id;
    to_json(manifest["spec"], spec);
    manifest["frame_count"] = frame_count;
    auto& actor_log = manifest["actors"] = nlohmann::json::array();

    // ---- actors: sample shape, retarget, place ----
    std::vector<ActorRuntime> actors;
    for (std::size_t a = 0; a < spec.actors.size(); ++a) {
        const int clip_id = spec.actors[a].clip_id;
        const Eigen::VectorXd beta = sample_shape(rng, shared.source_model.shape_count(), cfg.shape_sigma);
        const Skeleton target_skeleton = shaped_skeleton(shared.source_model, beta);
        const MotionClip source_clip = cut_to_frames(shared.motion_library[static_cast<std::size_t>(clip_id)],
                                                     frame_count);
        const BoneMap bone_map = map_bones_by_name(shared.source_model.skeleton, target_skeleton);
        const MotionClip retargeted = retarget_clip(shared.source_model.skeleton, source_clip,
                                                    target_skeleton, bone_map);

        const double yaw = rng.uniform(0.0, 6.283185307179586);
        const Transform yaw_only{Rotation::from_axis_angle(Vec3::UnitZ(), yaw), Vec3::Zero()};
        const std::vector<Footprint> boxes = actor_frame_boxes(target_skeleton, retargeted, cfg.box_margin, yaw_only);
        const Footprint swept = swept_footprint(boxes);

        const auto spot = place_actor(scene, swept.l, swept.w, cfg.placement, rng);
        nlohmann::json aj;
        aj["spec_index"] = a;
        aj["clip_id"] = clip_id;
        aj["beta"] = std::vector<double>(beta.data(), beta.data() + beta.size());
        if (!spot) {
            aj["placed"] = false;
            aj["note"] = "no collision-free cell; actor skipped";
            actor_log.push_back(std::move(aj));
            ++outcome.actors_skipped;
            continue;
        }

        ActorRuntime actor;
        actor.actor_id = static_cast<int>(actors.size()) + 1;
        actor.clip_id = clip_id;
        actor.beta = beta;
        actor.skeleton = target_skeleton;
        actor.yaw = yaw;
        actor.placement = Transform{yaw_only.rotation, Vec3(spot->x - swept.x, spot->y - swept.y, spot->z)};
        actor.footprint = scene.placed_actors.back();
        actor.world_poses.reserve(static_cast<std::size_t>(frame_count));
        actor.world_joints.reserve(static_cast<std::size_t>(frame_count));
        for (const PoseFrame& frame : retargeted.frames) {
            WorldPose wp = to_world_pose(beta, frame, actor.placement);
            actor.world_joints.push_back(fk_joint_positions(actor.skeleton, wp.theta_w));
            actor.world_poses.push_back(std::move(wp.theta_w));
        }

        aj["placed"] = true;
        aj["actor_id"] = actor.actor_id;
        aj["yaw"] = yaw;
        aj["position"] = {spot->x, spot->y, spot->z};
        to_json(aj["footprint"], actor.footprint);
        actor_log.push_back(std::move(aj));
        actors.push_back(std::move(actor));
        ++outcome.actors_placed;
    }

    // ---- object volumes and per-frame capsule proxies ----
    std::vector<Box3> object_volumes;
    for (const Footprint& o : scene.objects) {
        const double ground = ground_height(scene, o.x, o.y);
        object_volumes.push_back({Vec3(o.x_min(), o.y_min(), ground),
                                  Vec3(o.x_max(), o.y_max(), ground + cfg.camera.object_height)});
    }

    const auto proxies_at = [&](int frame) {
        std::vector<CapsuleProxy> out;
        out.reserve(actors.size());
        for (const ActorRuntime& actor : actors) {
            out.push_back(make_capsule_proxy(actor.skeleton, actor.world_joints[static_cast<std::size_t>(frame)],
                                             actor.actor_id, cfg.capsule_radius));
        }
        return out;
    };

    // ---- cameras ----
    std::vector<CameraRig> cameras;
    if (!actors.empty()) {
        const int n_samples = std::min(cfg.occlusion_sample_frames, frame_count);
        std::vector<int> sample_frames;
        for (int s = 0; s < n_samples; ++s) {
            sample_frames.push_back(n_samples == 1 ? 0 : (s * (frame_count - 1)) / (n_samples - 1));
        }

        CameraPlacementInput input;
        input.occluder_boxes = object_volumes;
        input.penetration_obstacles = object_volumes;
        for (int f : sample_frames) input.frames.push_back(proxies_at(f));
        for (std::size_t a = 0; a < actors.size(); ++a) {
            Vec3 mean_root = Vec3::Zero();
            Box3 envelope;
            envelope.min = Vec3::Constant(std::numeric_limits<double>::infinity());
            envelope.max = -envelope.min;
            for (std::size_t s = 0; s < input.frames.size(); ++s) {
                mean_root += actors[a].world_joints[static_cast<std::size_t>(sample_frames[s])][0];
                const Box3 box = bounding_box(input.frames[s][a]);
                envelope.min = envelope.min.cwiseMin(box.min);
                envelope.max = envelope.max.cwiseMax(box.max);
            }
            mean_root /= static_cast<double>(input.frames.size());
            input.subject_roots.push_back(mean_root);
            input.penetration_obstacles.push_back(envelope);
        }

        CameraPlacementResult placed = place_cameras(input, spec.camera_count, intrinsics, cfg.camera, rng);
        cameras = std::move(placed.cameras);
        manifest["camera_placement"] = {{"attempts", placed.attempts},
                                        {"requested", spec.camera_count},
                                        {"placed", cameras.size()}};
        if (!placed.diagnostic.empty()) manifest["camera_placement"]["diagnostic"] = placed.diagnostic;
    }
    outcome.cameras_placed = static_cast<int>(cameras.size());

    // ---- annotation-model refit ----
    auto& fit_log = manifest["fit_reports"] = nlohmann::json::array();
    for (const ActorRuntime& actor : actors) {
        const Eigen::VectorXd beta_fit =
            fit_shape_tpose(shared.source_model, actor.beta, shared.fit_model, shared.fit_correspondence, cfg.fit);
        std::vector<std::vector<JointTarget>> track(static_cast<std::size_t>(frame_count));
        for (int f = 0; f < frame_count; ++f) {
            for (const auto& [fit_j, src_j] : shared.fit_correspondence.joints) {
                track[static_cast<std::size_t>(f)].push_back(
                    {fit_j, actor.world_joints[static_cast<std::size_t>(f)][static_cast<std::size_t>(src_j)]});
            }
        }
        // Frame 0 starts from the actor's own first pose mapped onto the fit
        // skeleton by bone name; later frames warm-start from the previous fit.
        PoseFrame init0 = PoseFrame::rest(shared.fit_model.joint_count());
        init0.root_translation = actor.world_poses[0].root_translation;
        for (int b = 0; b < shared.fit_model.skeleton.bone_count(); ++b) {
            const int s = actor.skeleton.find_bone(shared.fit_model.skeleton.bones[static_cast<std::size_t>(b)].name);
            if (s >= 0) {
                init0.local_rotations[static_cast<std::size_t>(b)] =
                    actor.world_poses[0].local_rotations[static_cast<std::size_t>(s)];
            }
        }
        const SequenceFitReport report = fit_pose_sequence(shared.fit_model, beta_fit, track, cfg.fit, &init0);
        nlohmann::json rj;
        to_json(rj, report);
        rj["actor_id"] = actor.actor_id;
        fit_log.push_back(std::move(rj));
    }

    // ---- annotation records ----
    std::vector<AnnotationRecord> records;
    for (int f = 0; f < frame_count; ++f) {
        const std::vector<CapsuleProxy> frame_proxies = actors.empty() ? std::vector<CapsuleProxy>{} : proxies_at(f);
        for (std::size_t a = 0; a < actors.size(); ++a) {
            const ActorRuntime& actor = actors[a];
            std::vector<Vec3> joints_q;
            joints_q.reserve(actor.world_joints[static_cast<std::size_t>(f)].size());
            for (const Vec3& p : actor.world_joints[static_cast<std::size_t>(f)]) {
                joints_q.emplace_back(quantize9(p.x()), quantize9(p.y()), quantize9(p.z()));
            }
            for (std::size_t c = 0; c < cameras.size(); ++c) {
                AnnotationRecord rec;
                rec.sequence_id = seq_id;
                rec.frame_index = f;
                rec.actor_id = actor.actor_id;
                rec.camera_id = static_cast<int>(c);
                rec.beta = actor.beta;
                rec.theta_w = actor.world_poses[static_cast<std::size_t>(f)];
                rec.joints_3d = joints_q;
                rec.keypoints_2d = keypoints_2d(cameras[c], joints_q);
                for (Keypoint& kp : rec.keypoints_2d) {
                    kp.u = quantize9(kp.u);
                    kp.v = quantize9(kp.v);
                }
                auto bbox = bbox_from_keypoints(rec.keypoints_2d, cfg.bbox_margin, cfg.image_width, cfg.image_height);
                if (bbox) {
                    bbox->x_min = quantize9(bbox->x_min);
                    bbox->y_min = quantize9(bbox->y_min);
                    bbox->x_max = quantize9(bbox->x_max);
                    bbox->y_max = quantize9(bbox->y_max);
                }
                rec.bbox = bbox;

                BlockerSet blockers;
                blockers.boxes = object_volumes;
                for (std::size_t o = 0; o < frame_proxies.size(); ++o) {
                    if (o == a) continue;
                    blockers.capsules.insert(blockers.capsules.end(), frame_proxies[o].capsules.begin(),
                                             frame_proxies[o].capsules.end());
                }
                rec.occlusion =
                    quantize9(occlusion_ratio(cameras[c].position(), frame_proxies[a], blockers,
                                              cfg.camera.n_rays, rng));
                records.push_back(std::move(rec));
            }
        }
    }
    outcome.records_total = static_cast<int>(records.size());
    records = filter_occluded(std::move(records), cfg.camera.max_occlusion);
    outcome.records_kept = static_cast<int>(records.size());
    manifest["records_total"] = outcome.records_total;
    manifest["records_kept"] = outcome.records_kept;

    // ---- emit files ----
    auto& digests = manifest["digests"] = nlohmann::json::object();

    std::string ndjson_text;
    for (const AnnotationRecord& r : records) {
        ndjson_text += annotation_to_ndjson_line(r);
        ndjson_text += '\n';
    }
    digests["annotations.ndjson"] = write_text_file((seq_dir / "annotations.ndjson").string(), ndjson_text);

    nlohmann::json cameras_json = nlohmann::json::array();
    for (const CameraRig& rig : cameras) {
        nlohmann::json cj;
        to_json(cj, rig);
        cameras_json.push_back(std::move(cj));
    }
    digests["cameras.json"] = write_text_file((seq_dir / "cameras.json").string(), cameras_json.dump(2) + "\n");

    for (std::size_t c = 0; c < cameras.size(); ++c) {
        const fs::path cam_dir = seq_dir / ("cam" + std::to_string(c));
        fs::create_directories(cam_dir);
        for (int f = 0; f < frame_count; ++f) {
            const ProxyMaps maps = render_proxy_maps(cameras[c], actors.empty() ? std::vector<CapsuleProxy>{}
                                                                                : proxies_at(f),
                                                     object_volumes, cfg.image_width, cfg.image_height);
            char frame_name[32];
            std::snprintf(frame_name, sizeof frame_name, "frame%04d", f);
            const std::string mask_rel = "cam" + std::to_string(c) + "/" + frame_name + "_mask.pgm";
            const std::string depth_rel = "cam" + std::to_string(c) + "/" + frame_name + "_depth.pfm";
            write_pgm((seq_dir / mask_rel).string(), maps);
            write_pfm((seq_dir / depth_rel).string(), maps);
            digests[mask_rel] = sha256_file_hex((seq_dir / mask_rel).string());
            digests[depth_rel] = sha256_file_hex((seq_dir / depth_rel).string());
        }
    }

    write_text_file((seq_dir / "manifest.json").string(), manifest.dump(2) + "\n");

    outcome.ok = true;
    return outcome;
}

}  // namespace

RunResult run_generate(const RunConfig& config) {
    config.validate();
    const SharedAssets shared = load_shared(config);
    fs::create_directories(config.output_dir);

    RunResult result;
    result.sequences.resize(static_cast<std::size_t>(config.sequence_count));

    std::atomic<int> next{0};
    std::mutex failure_mutex;
    const int n_workers = std::min(config.workers, config.sequence_count);

    const auto worker = [&]() {
        while (true) {
            const int k = next.fetch_add(1);
            if (k >= config.sequence_count) break;
            SequenceOutcome outcome;
            outcome.sequence_id = k;
            try {
                outcome = generate_sequence(config, shared, k);
            } catch (const std::exception& e) {
                outcome.ok = false;
                outcome.error = e.what();
                // Crash isolation: leave a minimal manifest naming the failure.
                try {
                    const fs::path seq_dir = fs::path(config.output_dir) / sequence_dir_name(k);
                    fs::create_directories(seq_dir);
                    nlohmann::json j{{"sequence_id", k}, {"error", e.what()}};
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    std::ofstream(seq_dir / "manifest.json") << j.dump(2) << "\n";
                } catch (...) {
                }
            }
            result.sequences[static_cast<std::size_t>(k)] = std::move(outcome);
        }
    };

    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(n_workers));
        for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return result;
}

std::vector<std::string> validate_scene_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("validate_scene_file: cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string("validate_scene_file: ill-formed JSON: ") + e.what());
    }

    std::vector<std::string> violations;
    const auto has = [&](const char* key) { return j.contains(key); };
    if (!has("bounds") || !j["bounds"].is_array() || j["bounds"].size() != 4) {
        violations.push_back("bounds: expected [xmin, ymin, xmax, ymax]");
        return violations;
    }
    const double xmin = j["bounds"].at(0).get<double>();
    const double ymin = j["bounds"].at(1).get<double>();
    const double xmax = j["bounds"].at(2).get<double>();
    const double ymax = j["bounds"].at(3).get<double>();
    Bounds2d bounds{xmin, ymin, xmax, ymax};
    if (!(xmax > xmin) || !(ymax > ymin)) violations.push_back("bounds: empty area");

    if (!has("objects") || !j["objects"].is_array()) {
        violations.push_back("objects: expected an array of footprints");
    } else {
        int index = 0;
        for (const auto& oj : j["objects"]) {
            try {
                const auto f = oj.get<Footprint>();
                if (!bounds.contains(f)) {
                    violations.push_back("objects[" + std::to_string(index) + "]: outside bounds");
                }
            } catch (const std::exception& e) {
                violations.push_back("objects[" + std::to_string(index) + "]: " + e.what());
            }
            ++index;
        }
    }

    if (!has("heightfield")) {
        violations.push_back("heightfield: missing");
    } else {
        const auto& h = j["heightfield"];
        if (h.contains("constant")) {
            if (!h["constant"].is_number() || !std::isfinite(h["constant"].get<double>())) {
                violations.push_back("heightfield: constant must be a finite number");
            }
        } else if (h.contains("values")) {
            if (!h.contains("origin") || !h.contains("cell")) {
                violations.push_back("heightfield: gridded form needs origin and cell");
            } else if (!(h["cell"].get<double>() > 0.0)) {
                violations.push_back("heightfield: cell size must be positive");
            }
            std::size_t row_len = 0;
            bool first = true;
            for (const auto& row : h["values"]) {
                if (first) {
                    row_len = row.size();
                    first = false;
                } else if (row.size() != row_len) {
                    violations.push_back("heightfield: ragged rows");
                    break;
                }
                for (const auto& v : row) {
                    if (!v.is_number() || !std::isfinite(v.get<double>())) {
                        violations.push_back("heightfield: non-finite height value");
                        break;
                    }
                }
            }
        } else {
            violations.push_back("heightfield: expected {constant} or {origin, cell, values}");
        }
    }
    return violations;
}

FitReportSummary fit_report(const std::string& sequence_dir) {
    const fs::path manifest_path = fs::path(sequence_dir) / "manifest.json";
    if (!fs::exists(manifest_path)) {
        throw std::runtime_error("fit_report: missing manifest in " + sequence_dir);
    }
    const nlohmann::json manifest = load_json_file(manifest_path.string());
    if (!manifest.contains("fit_reports")) {
        throw std::runtime_error("fit_report: manifest has no fit data (failed or empty sequence)");
    }
    FitReportSummary summary;
    double sum = 0.0;
    for (const auto& rj : manifest["fit_reports"]) {
        ++summary.actor_count;
        for (const auto& fj : rj.at("frames")) {
            const double mpjpe = fj.at("residual_mpjpe").get<double>();
            if (!std::isfinite(mpjpe)) throw std::runtime_error("fit_report: non-finite residual");
            sum += mpjpe;
            summary.max_mpjpe = std::max(summary.max_mpjpe, mpjpe);
            summary.all_converged = summary.all_converged && fj.at("converged").get<bool>();
            ++summary.frame_count;
        }
    }
    if (summary.frame_count > 0) summary.mean_mpjpe = sum / summary.frame_count;
    return summary;
}

void to_json(nlohmann::json& j, const RunConfig& c) {
    j = nlohmann::json::object();
    j["master_seed"] = c.master_seed;
    j["sequence_count"] = c.sequence_count;
    j["output_dir"] = c.output_dir;
    j["workers"] = c.workers;
    j["scene_files"] = c.scene_files;
    j["catalog_file"] = c.catalog_file;
    j["source_model_file"] = c.source_model_file;
    j["fit_model_file"] = c.fit_model_file;
    j["placement"] = {{"grid_step", c.placement.grid_step},
                      {"dispersal_radius", c.placement.dispersal_radius},
                      {"seed", c.placement.seed}};
    j["camera"] = {{"lambda", c.camera.lambda},
                   {"l_max", c.camera.l_max},
                   {"pitch_min_deg", c.camera.pitch_min * 57.29577951308232},
                   {"pitch_max_deg", c.camera.pitch_max * 57.29577951308232},
                   {"max_occlusion", c.camera.max_occlusion},
                   {"n_rays", c.camera.n_rays},
                   {"attempt_budget", c.camera.attempt_budget},
                   {"object_height", c.camera.object_height}};
    j["fit"] = {{"max_iterations", c.fit.max_iterations},
                {"convergence_tol", c.fit.convergence_tol},
                {"step_damping", c.fit.step_damping},
                {"joint_weight", c.fit.joint_weight},
                {"vertex_weight", c.fit.vertex_weight},
                {"pose_prior_weight", c.fit.pose_prior_weight}};
    j["fov_deg"] = c.fov_deg;
    j["image_width"] = c.image_width;
    j["image_height"] = c.image_height;
    j["fps"] = c.fps;
    j["camera_count"] = c.camera_count;
    j["shape_sigma"] = c.shape_sigma;
    j["motion_library_size"] = c.motion_library_size;
    j["capsule_radius"] = c.capsule_radius;
    j["box_margin"] = c.box_margin;
    j["bbox_margin"] = c.bbox_margin;
    j["occlusion_sample_frames"] = c.occlusion_sample_frames;
}

void from_json(const nlohmann::json& j, RunConfig& c) {
    RunConfig d;
    c.master_seed = j.value("master_seed", d.master_seed);
    c.sequence_count = j.value("sequence_count", d.sequence_count);
    c.output_dir = j.value("output_dir", d.output_dir);
    c.workers = j.value("workers", d.workers);
    c.scene_files = j.value("scene_files", d.scene_files);
    c.catalog_file = j.value("catalog_file", d.catalog_file);
    c.source_model_file = j.value("source_model_file", d.source_model_file);
    c.fit_model_file = j.value("fit_model_file", d.fit_model_file);
    if (j.contains("placement")) {
        const auto& p = j["placement"];
        c.placement.grid_step = p.value("grid_step", d.placement.grid_step);
        c.placement.dispersal_radius = p.value("dispersal_radius", d.placement.dispersal_radius);
        c.placement.seed = p.value("seed", d.placement.seed);
    }
    if (j.contains("camera")) {
        const auto& cam = j["camera"];
        c.camera.lambda = cam.value("lambda", d.camera.lambda);
        c.camera.l_max = cam.value("l_max", d.camera.l_max);
        c.camera.pitch_min = cam.value("pitch_min_deg", d.camera.pitch_min * 57.29577951308232) / 57.29577951308232;
        c.camera.pitch_max = cam.value("pitch_max_deg", d.camera.pitch_max * 57.29577951308232) / 57.29577951308232;
        c.camera.max_occlusion = cam.value("max_occlusion", d.camera.max_occlusion);
        c.camera.n_rays = cam.value("n_rays", d.camera.n_rays);
        c.camera.attempt_budget = cam.value("attempt_budget", d.camera.attempt_budget);
        c.camera.object_height = cam.value("object_height", d.camera.object_height);
    }
    if (j.contains("fit")) {
        const auto& f = j["fit"];
        c.fit.max_iterations = f.value("max_iterations", d.fit.max_iterations);
        c.fit.convergence_tol = f.value("convergence_tol", d.fit.convergence_tol);
        c.fit.step_damping = f.value("step_damping", d.fit.step_damping);
        c.fit.joint_weight = f.value("joint_weight", d.fit.joint_weight);
        c.fit.vertex_weight = f.value("vertex_weight", d.fit.vertex_weight);
        c.fit.pose_prior_weight = f.value("pose_prior_weight", d.fit.pose_prior_weight);
    }
    c.fov_deg = j.value("fov_deg", d.fov_deg);
    c.image_width = j.value("image_width", d.image_width);
    c.image_height = j.value("image_height", d.image_height);
    c.fps = j.value("fps", d.fps);
    c.camera_count = j.value("camera_count", d.camera_count);
    c.shape_sigma = j.value("shape_sigma", d.shape_sigma);
    c.motion_library_size = j.value("motion_library_size", d.motion_library_size);
    c.capsule_radius = j.value("capsule_radius", d.capsule_radius);
    c.box_margin = j.value("box_margin", d.box_margin);
    c.bbox_margin = j.value("bbox_margin", d.bbox_margin);
    c.occlusion_sample_frames = j.value("occlusion_sample_frames", d.occlusion_sample_frames);
}

}  // namespace bodygen
