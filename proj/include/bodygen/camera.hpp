#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bodygen/rng.hpp"
#include "bodygen/rotation.hpp"
#include "bodygen/skeleton.hpp"

namespace bodygen {

struct CameraIntrinsics {
    double fov_alpha = 1.0471975511965976;  // horizontal field of view, radians
    int image_width = 256;
    int image_height = 256;
    double cx = 128.0, cy = 128.0;  // principal point, defaults to the center

    double focal() const { return (image_width / 2.0) / std::tan(0.5 * fov_alpha); }
    static CameraIntrinsics with_fov(double fov_alpha, int width, int height);
    void validate() const;
};

// Camera-to-world pose; the look direction is -z of the camera frame.
struct CameraRig {
    CameraIntrinsics intrinsics;
    Transform pose;

    Vec3 position() const { return pose.translation; }
    Vec3 look_direction() const { return pose.rotation.rotate(Vec3(0, 0, -1)); }
};

struct CameraConstraints {
    double lambda = 1.1;
    double l_max = 10.0;
    double pitch_min = -0.5235987755982988;  // -30 deg
    double pitch_max = 0.17453292519943295;  //  10 deg
    double max_occlusion = 0.7;
    int n_rays = 256;
    int attempt_budget = 10000;  // rejection-sampling attempts per camera
    double object_height = 2.0;  // extrusion height of ground footprints

    void validate() const;
};

struct Capsule {
    Vec3 a = Vec3::Zero();
    Vec3 b = Vec3::Zero();
    double radius = 0.08;
};

// One capsule per bone segment at a posed frame.
struct CapsuleProxy {
    int actor_id = 0;
    std::vector<Capsule> capsules;
};

inline constexpr double kDefaultCapsuleRadius = 0.08;

CapsuleProxy make_capsule_proxy(const Skeleton& skeleton, const std::vector<Vec3>& posed_joints,
                                int actor_id, double radius = kDefaultCapsuleRadius);

struct Box3 {
    Vec3 min = Vec3::Zero();
    Vec3 max = Vec3::Zero();
    bool contains(const Vec3& p) const {
        return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
    }
};

Box3 bounding_box(const CapsuleProxy& proxy);

// (L_min, L_max) with L_min = (lambda / sin(alpha/2)) * max_i |p_i - mean|.
std::pair<double, double> distance_bounds(const std::vector<Vec3>& subject_roots, double fov_alpha,
                                          double lambda, double l_max);

// Nearest intersection distance beyond 1e-9, or nullopt on a miss. The
// direction is normalized internally.
std::optional<double> ray_capsule_intersect(const Vec3& origin, const Vec3& direction, const Capsule& capsule);
std::optional<double> ray_box_intersect(const Vec3& origin, const Vec3& direction, const Box3& box);

struct BlockerSet {
    std::vector<Capsule> capsules;
    std::vector<Box3> boxes;
};

// Fraction of rays from the camera toward area-stratified surface points of
// the target that some blocker interrupts strictly before the target hit.
double occlusion_ratio(const Vec3& camera_position, const CapsuleProxy& target, const BlockerSet& blockers,
                       int n_rays, Rng& rng);

// Camera-to-world transform at `position` aiming the -z axis at `target`.
Transform look_at(const Vec3& position, const Vec3& target, const Vec3& up = Vec3::UnitZ());

// Elevation angle of the look direction, positive looking up.
double pitch_of(const Vec3& look_direction);

struct CameraPlacementInput {
    std::vector<Vec3> subject_roots;                   // one representative point per subject
    std::vector<Box3> penetration_obstacles;           // object volumes + actor envelopes
    std::vector<Box3> occluder_boxes;                  // object volumes only
    std::vector<std::vector<CapsuleProxy>> frames;     // sampled frames; frames[f][subject]
};

struct CameraPlacementResult {
    std::vector<CameraRig> cameras;
    int attempts = 0;
    std::string diagnostic;  // non-empty when fewer than requested were feasible
};

// Rejection-samples camera positions on the shell [L_min, L_max] around the
// subjects' mean inside the pitch band, rejecting penetration and cameras
// whose mean occlusion over the sampled frames exceeds the limit for any
// subject. Accepted cameras aim at the subjects' mean.
CameraPlacementResult place_cameras(const CameraPlacementInput& input, int n_cameras,
                                    const CameraIntrinsics& intrinsics, const CameraConstraints& constraints,
                                    Rng& rng);

void to_json(nlohmann::json& j, const CameraIntrinsics& c);
void from_json(const nlohmann::json& j, CameraIntrinsics& c);
void to_json(nlohmann::json& j, const CameraRig& r);
void from_json(const nlohmann::json& j, CameraRig& r);

}  // namespace bodygen
