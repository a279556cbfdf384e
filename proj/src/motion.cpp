#include "bodygen/motion.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_set>

#include "bodygen/rng.hpp"

namespace bodygen {

void MotionClip::validate(const Skeleton& skeleton) const {
    if (frames.empty()) throw std::invalid_argument("MotionClip: no frames");
    if (!(fps > 0.0)) throw std::invalid_argument("MotionClip: fps must be positive");
    for (const PoseFrame& f : frames) {
        if (static_cast<int>(f.local_rotations.size()) != skeleton.bone_count()) {
            throw std::invalid_argument("MotionClip: frame bone count does not match skeleton");
        }
    }
    for (const Rotation& r : frames.front().local_rotations) {
        if (!r.approx_equal(Rotation::identity(), 1e-9)) {
            throw std::invalid_argument("MotionClip: frame 0 must be the T-pose (identity locals)");
        }
    }
}

void BoneMap::validate(const Skeleton& source, const Skeleton& target) const {
    std::unordered_set<int> src_seen, tgt_seen;
    bool roots_paired = false;
    bool pelvis_paired = false;
    for (const auto& [s, t] : pairs) {
        if (s < 0 || s >= source.bone_count() || t < 0 || t >= target.bone_count()) {
            throw std::invalid_argument("BoneMap: bone index out of range");
        }
        if (!src_seen.insert(s).second || !tgt_seen.insert(t).second) {
            throw std::invalid_argument("BoneMap: mapping must be injective on both sides");
        }
        const bool s_root = source.bones[static_cast<std::size_t>(s)].parent < 0;
        const bool t_root = target.bones[static_cast<std::size_t>(t)].parent < 0;
        if (s_root != t_root) throw std::invalid_argument("BoneMap: roots must map to roots");
        if (s_root) roots_paired = true;
        if (s == source.pelvis_index && t == target.pelvis_index) pelvis_paired = true;
        if ((s == source.pelvis_index) != (t == target.pelvis_index)) {
            throw std::invalid_argument("BoneMap: pelvis must map to pelvis");
        }
    }
    if (!roots_paired) throw std::invalid_argument("BoneMap: root pair missing");
    if (!pelvis_paired) throw std::invalid_argument("BoneMap: pelvis pair missing");
}

BoneMap map_bones_by_name(const Skeleton& source, const Skeleton& target) {
    BoneMap map;
    for (int s = 0; s < source.bone_count(); ++s) {
        const int t = target.find_bone(source.bones[static_cast<std::size_t>(s)].name);
        if (t >= 0) map.pairs.emplace_back(s, t);
    }
    map.validate(source, target);
    return map;
}

Rotation relative_motion(const Rotation& global_t, const Rotation& global_tpose) {
    return global_t * global_tpose.inverse();
}

Vec3 scale_root_translation(const Vec3& t_src, double h_pelvis, double h_pelvis_src) {
    if (!(h_pelvis > 0.0) || !(h_pelvis_src > 0.0)) {
        throw std::invalid_argument("scale_root_translation: pelvis heights must be positive");
    }
    return (h_pelvis / h_pelvis_src) * t_src;
}

MotionClip retarget_clip(const Skeleton& source, const MotionClip& clip, const Skeleton& target,
                         const BoneMap& map) {
    clip.validate(source);
    map.validate(source, target);

    const double ratio_num = target.pelvis_height();
    const double ratio_den = source.pelvis_height();

    // T-pose model-space rotations on both sides. The target T-pose is by
    // definition all-identity locals; the source side comes from frame 0.
    const std::vector<Rotation> src_tpose_globals = fk_global_rotations(source, clip.tpose_frame());
    std::vector<int> target_of_source(static_cast<std::size_t>(source.bone_count()), -1);
    for (const auto& [s, t] : map.pairs) target_of_source[static_cast<std::size_t>(s)] = t;

    MotionClip out;
    out.fps = clip.fps;
    out.frames.reserve(clip.frames.size());

    std::vector<Rotation> tgt_globals(static_cast<std::size_t>(target.bone_count()));
    std::vector<char> assigned(static_cast<std::size_t>(target.bone_count()), 0);

    for (const PoseFrame& frame : clip.frames) {
        const std::vector<Rotation> src_globals = fk_global_rotations(source, frame);

        std::fill(assigned.begin(), assigned.end(), 0);
        for (const auto& [s, t] : map.pairs) {
            const auto si = static_cast<std::size_t>(s);
            // Target T-pose globals are identity, so the retargeted
            // model-space rotation is the source motion relative to its
            // own T-pose.
            tgt_globals[static_cast<std::size_t>(t)] =
                relative_motion(src_globals[si], src_tpose_globals[si]);
            assigned[static_cast<std::size_t>(t)] = 1;
        }

        PoseFrame out_frame;
        out_frame.root_translation = scale_root_translation(frame.root_translation, ratio_num, ratio_den);
        out_frame.local_rotations.resize(static_cast<std::size_t>(target.bone_count()));
        for (std::size_t i = 0; i < out_frame.local_rotations.size(); ++i) {
            const int p = target.bones[i].parent;
            if (assigned[i]) {
                // Invert the FK recursion to recover the parent-space local.
                out_frame.local_rotations[i] =
                    p < 0 ? tgt_globals[i] : tgt_globals[static_cast<std::size_t>(p)].inverse() * tgt_globals[i];
            } else {
                out_frame.local_rotations[i] = Rotation::identity();
                tgt_globals[i] = p < 0 ? Rotation::identity() : tgt_globals[static_cast<std::size_t>(p)];
            }
        }
        out.frames.push_back(std::move(out_frame));
    }
    return out;
}

WorldPose to_world_pose(const Eigen::VectorXd& beta, const PoseFrame& pose, const Transform& placement) {
    WorldPose world;
    world.beta = beta;
    world.theta_w = pose;
    if (pose.local_rotations.empty()) throw std::invalid_argument("to_world_pose: empty pose");
    world.theta_w.local_rotations[0] = placement.rotation * pose.local_rotations[0];
    world.theta_w.root_translation = placement.apply(pose.root_translation);
    return world;
}

MotionClip synthesize_motion_clip(const Skeleton& skeleton, double fps, int frame_count,
                                  std::uint64_t seed, double max_swing_rad, double travel_speed) {
    if (frame_count < 1) throw std::invalid_argument("synthesize_motion_clip: need at least one frame");
    if (!(fps > 0.0)) throw std::invalid_argument("synthesize_motion_clip: fps must be positive");

    Rng rng(seed);
    const int n = skeleton.bone_count();

    struct Swing {
        Vec3 axis;
        double amplitude;
        double frequency;
    };
    std::vector<Swing> swings;
    swings.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        Vec3 axis(rng.normal(), rng.normal(), rng.normal());
        if (axis.norm() < 1e-6) axis = Vec3::UnitX();
        axis.normalize();
        swings.push_back({axis, rng.uniform(0.15, 1.0) * max_swing_rad, rng.uniform(0.3, 1.2)});
    }
    const double heading = rng.uniform(0.0, 6.283185307179586);
    const Vec3 travel(std::cos(heading), std::sin(heading), 0.0);
    const double speed = rng.uniform(0.2, 1.0) * travel_speed;
    const double bob = rng.uniform(0.0, 0.03);

    MotionClip clip;
    clip.fps = fps;
    clip.frames.reserve(static_cast<std::size_t>(frame_count));
    for (int f = 0; f < frame_count; ++f) {
        const double t = static_cast<double>(f) / fps;
        PoseFrame frame;
        frame.local_rotations.reserve(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            const Swing& s = swings[static_cast<std::size_t>(i)];
            const double angle = s.amplitude * std::sin(6.283185307179586 * s.frequency * t);
            frame.local_rotations.push_back(Rotation::from_axis_angle(s.axis, angle));
        }
        // Zero at t = 0 so frame 0 stays the T-pose.
        frame.root_translation = travel * (speed * t) + Vec3(0, 0, bob * (1.0 - std::cos(6.283185307179586 * t)));
        clip.frames.push_back(std::move(frame));
    }
    return clip;
}

void to_json(nlohmann::json& j, const MotionClip& c) {
    j = nlohmann::json::object();
    j["fps"] = c.fps;
    auto& frames = j["frames"] = nlohmann::json::array();
    for (const PoseFrame& f : c.frames) {
        nlohmann::json fj;
        to_json(fj, f);
        frames.push_back(std::move(fj));
    }
}

void from_json(const nlohmann::json& j, MotionClip& c) {
    c.fps = j.at("fps").get<double>();
    c.frames.clear();
    for (const auto& fj : j.at("frames")) {
        PoseFrame f;
        from_json(fj, f);
        c.frames.push_back(std::move(f));
    }
}

}  // namespace bodygen
