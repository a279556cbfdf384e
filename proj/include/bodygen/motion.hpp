#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "bodygen/skeleton.hpp"

namespace bodygen {

// Motion clip whose frame 0 is the T-pose (all local rotations identity).
struct MotionClip {
    double fps = 30.0;
    std::vector<PoseFrame> frames;

    int frame_count() const { return static_cast<int>(frames.size()); }
    const PoseFrame& tpose_frame() const { return frames.front(); }

    void validate(const Skeleton& skeleton) const;
};

// Explicit source->target bone pairing. Injective on both sides; must pair
// the two roots and the two pelvises.
struct BoneMap {
    std::vector<std::pair<int, int>> pairs;

    void validate(const Skeleton& source, const Skeleton& target) const;
};

// Pairs bones whose names match; roots/pelvises still have to line up.
BoneMap map_bones_by_name(const Skeleton& source, const Skeleton& target);

// World-space annotation pose: shape coefficients plus the pose whose root
// carries the scene placement.
struct WorldPose {
    Eigen::VectorXd beta;
    PoseFrame theta_w;
};

// Model-space motion relative to the T-pose frame: global_t * global_tpose^-1.
Rotation relative_motion(const Rotation& global_t, const Rotation& global_tpose);

// Root translation scaled by the pelvis height ratio of target over source.
Vec3 scale_root_translation(const Vec3& t_src, double h_pelvis, double h_pelvis_src);

// Transfers a clip between structurally similar skeletons by equating
// T-pose-relative model-space rotations; unmapped target bones keep identity
// locals, and the root translation is scaled by the pelvis height ratio.
MotionClip retarget_clip(const Skeleton& source, const MotionClip& clip, const Skeleton& target,
                         const BoneMap& map);

// Applies a world placement to a pose: the root rotation/translation absorb
// the transform, non-root locals are untouched.
WorldPose to_world_pose(const Eigen::VectorXd& beta, const PoseFrame& pose, const Transform& placement);

// Seeded stand-in for a mocap library: smooth sinusoidal joint swings that
// start from the T-pose. max_swing_rad bounds every bone's excursion.
MotionClip synthesize_motion_clip(const Skeleton& skeleton, double fps, int frame_count,
                                  std::uint64_t seed, double max_swing_rad = 0.6,
                                  double travel_speed = 0.5);

void to_json(nlohmann::json& j, const MotionClip& c);
void from_json(const nlohmann::json& j, MotionClip& c);

}  // namespace bodygen
