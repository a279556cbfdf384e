#include "bodygen/camera.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace bodygen {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kGolden = 0.6180339887498948482;  // 1/phi, azimuth stride
constexpr double kRayEps = 1e-9;
}  // namespace

CameraIntrinsics CameraIntrinsics::with_fov(double fov_alpha, int width, int height) {
    CameraIntrinsics c;
    c.fov_alpha = fov_alpha;
    c.image_width = width;
    c.image_height = height;
    c.cx = width / 2.0;
    c.cy = height / 2.0;
    c.validate();
    return c;
}

void CameraIntrinsics::validate() const {
    if (!(fov_alpha > 0.0) || !(fov_alpha < 3.141592653589793)) {
        throw std::invalid_argument("CameraIntrinsics: fov must lie in (0, pi)");
    }
    if (image_width <= 0 || image_height <= 0) {
        throw std::invalid_argument("CameraIntrinsics: image dimensions must be positive");
    }
}

void CameraConstraints::validate() const {
    if (!(lambda > 0.0)) throw std::invalid_argument("CameraConstraints: lambda must be positive");
    if (!(l_max > 0.0)) throw std::invalid_argument("CameraConstraints: L_max must be positive");
    if (pitch_min > pitch_max) throw std::invalid_argument("CameraConstraints: pitch range inverted");
    if (max_occlusion < 0.0 || max_occlusion > 1.0) {
        throw std::invalid_argument("CameraConstraints: max_occlusion must lie in [0, 1]");
    }
    if (n_rays < 1) throw std::invalid_argument("CameraConstraints: n_rays must be >= 1");
    if (attempt_budget < 1) throw std::invalid_argument("CameraConstraints: attempt budget must be >= 1");
}

CapsuleProxy make_capsule_proxy(const Skeleton& skeleton, const std::vector<Vec3>& posed_joints,
                                int actor_id, double radius) {
    if (!(radius > 0.0)) throw std::invalid_argument("make_capsule_proxy: radius must be positive");
    if (posed_joints.size() != skeleton.bones.size()) {
        throw std::invalid_argument("make_capsule_proxy: joint count mismatch");
    }
    CapsuleProxy proxy;
    proxy.actor_id = actor_id;
    for (std::size_t i = 0; i < skeleton.bones.size(); ++i) {
        const int p = skeleton.bones[i].parent;
        if (p < 0) continue;
        proxy.capsules.push_back({posed_joints[static_cast<std::size_t>(p)], posed_joints[i], radius});
    }
    return proxy;
}

Box3 bounding_box(const CapsuleProxy& proxy) {
    Box3 box;
    box.min = Vec3::Constant(std::numeric_limits<double>::infinity());
    box.max = -box.min;
    for (const Capsule& c : proxy.capsules) {
        box.min = box.min.cwiseMin(c.a.cwiseMin(c.b) - Vec3::Constant(c.radius));
        box.max = box.max.cwiseMax(c.a.cwiseMax(c.b) + Vec3::Constant(c.radius));
    }
    return box;
}

std::pair<double, double> distance_bounds(const std::vector<Vec3>& subject_roots, double fov_alpha,
                                          double lambda, double l_max) {
    if (subject_roots.empty()) throw std::invalid_argument("distance_bounds: no subjects");
    if (!(fov_alpha > 0.0) || !(fov_alpha < 3.141592653589793)) {
        throw std::invalid_argument("distance_bounds: fov must lie in (0, pi)");
    }
    Vec3 mean = Vec3::Zero();
    for (const Vec3& p : subject_roots) mean += p;
    mean /= static_cast<double>(subject_roots.size());
    double max_dev = 0.0;
    for (const Vec3& p : subject_roots) max_dev = std::max(max_dev, (p - mean).norm());
    const double l_min = lambda / std::sin(0.5 * fov_alpha) * max_dev;
    return {l_min, l_max};
}

std::optional<double> ray_capsule_intersect(const Vec3& origin, const Vec3& direction, const Capsule& capsule) {
    const double dir_norm = direction.norm();
    if (!(dir_norm > 0.0)) throw std::invalid_argument("ray_capsule_intersect: zero direction");
    const Vec3 n = direction / dir_norm;

    double best = std::numeric_limits<double>::infinity();
    const auto consider = [&best](double t) {
        if (t > kRayEps && t < best) best = t;
    };

    // Sphere caps at both segment ends.
    const auto sphere = [&](const Vec3& center) {
        const Vec3 m = origin - center;
        const double b = m.dot(n);
        const double c = m.squaredNorm() - capsule.radius * capsule.radius;
        const double disc = b * b - c;
        if (disc < 0.0) return;
        const double s = std::sqrt(disc);
        consider(-b - s);
        consider(-b + s);
    };
    sphere(capsule.a);
    sphere(capsule.b);

    const Vec3 axis = capsule.b - capsule.a;
    const double axis_len2 = axis.squaredNorm();
    if (axis_len2 > 1e-18) {
        // Infinite cylinder in the components orthogonal to the axis,
        // accepted only within the segment's axial span.
        const Vec3 m = origin - capsule.a;
        const double md = m.dot(axis);
        const double nd = n.dot(axis);
        const double a_q = axis_len2 - nd * nd;
        if (std::abs(a_q) > 1e-18) {
            const double b_q = axis_len2 * m.dot(n) - md * nd;
            const double c_q = axis_len2 * (m.squaredNorm() - capsule.radius * capsule.radius) - md * md;
            const double disc = b_q * b_q - a_q * c_q;
            if (disc >= 0.0) {
                const double s = std::sqrt(disc);
                for (const double t : {(-b_q - s) / a_q, (-b_q + s) / a_q}) {
                    const double axial = md + t * nd;
                    if (axial >= 0.0 && axial <= axis_len2) consider(t);
                }
            }
        }
    }

    if (!std::isfinite(best)) return std::nullopt;
    return best;
}

std::optional<double> ray_box_intersect(const Vec3& origin, const Vec3& direction, const Box3& box) {
    const double dir_norm = direction.norm();
    if (!(dir_norm > 0.0)) throw std::invalid_argument("ray_box_intersect: zero direction");
    const Vec3 n = direction / dir_norm;

    double t_enter = -std::numeric_limits<double>::infinity();
    double t_exit = std::numeric_limits<double>::infinity();
    for (int axis = 0; axis < 3; ++axis) {
        if (std::abs(n[axis]) < 1e-300) {
            if (origin[axis] < box.min[axis] || origin[axis] > box.max[axis]) return std::nullopt;
            continue;
        }
        double t0 = (box.min[axis] - origin[axis]) / n[axis];
        double t1 = (box.max[axis] - origin[axis]) / n[axis];
        if (t0 > t1) std::swap(t0, t1);
        t_enter = std::max(t_enter, t0);
        t_exit = std::min(t_exit, t1);
        if (t_enter > t_exit) return std::nullopt;
    }
    if (t_enter > kRayEps) return t_enter;
    if (t_exit > kRayEps) return t_exit;  // origin inside the box
    return std::nullopt;
}

namespace {

struct SurfacePatch {
    const Capsule* capsule;
    double cylinder_area;
    double cap_area;
    double total_area;
};

// Deterministic area-stratified surface point for parameter (u, theta).
Vec3 surface_point(const SurfacePatch& patch, double u, double theta) {
    const Capsule& c = *patch.capsule;
    Vec3 axis = c.b - c.a;
    double len = axis.norm();
    Vec3 ax = len > 1e-12 ? Vec3(axis / len) : Vec3::UnitZ();
    Vec3 n1 = ax.cross(Vec3::UnitX());
    if (n1.norm() < 1e-6) n1 = ax.cross(Vec3::UnitY());
    n1.normalize();
    const Vec3 n2 = ax.cross(n1);
    const Vec3 radial = std::cos(theta) * n1 + std::sin(theta) * n2;

    const double area = u * patch.total_area;
    if (area < patch.cylinder_area) {
        const double f = patch.cylinder_area > 0.0 ? area / patch.cylinder_area : 0.0;
        return c.a + f * (c.b - c.a) + c.radius * radial;
    }
    // Both hemisphere caps together sample like one full sphere.
    const double v = (area - patch.cylinder_area) / patch.cap_area;  // in [0, 1)
    const double h = 2.0 * v - 1.0;  // signed axial component: negative = cap at a
    const Vec3 center = h < 0.0 ? c.a : c.b;
    const double ring = std::sqrt(std::max(0.0, 1.0 - h * h));
    return center + c.radius * (h * ax + ring * radial);
}

}  // namespace

double occlusion_ratio(const Vec3& camera_position, const CapsuleProxy& target, const BlockerSet& blockers,
                       int n_rays, Rng& rng) {
    if (n_rays < 1) throw std::invalid_argument("occlusion_ratio: n_rays must be >= 1");

    std::vector<SurfacePatch> patches;
    patches.reserve(target.capsules.size());
    double total = 0.0;
    for (const Capsule& c : target.capsules) {
        const double len = (c.b - c.a).norm();
        const double side = kTwoPi * c.radius * len;
        const double caps = 2.0 * kTwoPi * c.radius * c.radius;
        patches.push_back({&c, side, caps, side + caps});
        total += side + caps;
    }
    if (!(total > 0.0)) throw std::invalid_argument("occlusion_ratio: degenerate target (zero surface area)");

    std::vector<double> cumulative(patches.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < patches.size(); ++i) {
        acc += patches[i].total_area;
        cumulative[i] = acc;
    }

    // Stratified over the area dimension, golden-ratio azimuths, with a
    // random rotation per call so the estimate stays seed-driven.
    const double u_offset = rng.uniform();
    const double theta_offset = rng.uniform();

    int blocked = 0;
    for (int i = 0; i < n_rays; ++i) {
        const double u = std::fmod((i + 0.5) / n_rays + u_offset, 1.0);
        const double theta = kTwoPi * std::fmod(i * kGolden + theta_offset, 1.0);

        const double pick = u * total;
        std::size_t idx = static_cast<std::size_t>(
            std::lower_bound(cumulative.begin(), cumulative.end(), pick) - cumulative.begin());
        if (idx >= patches.size()) idx = patches.size() - 1;
        const double base = idx == 0 ? 0.0 : cumulative[idx - 1];
        const double local_u = std::clamp((pick - base) / patches[idx].total_area, 0.0, 1.0 - 1e-15);

        const Vec3 point = surface_point(patches[idx], local_u, theta);
        const Vec3 dir = point - camera_position;
        const double dist = dir.norm();
        if (!(dist > 1e-12)) continue;  // camera on the surface; counts as visible

        double target_hit = dist;
        for (const Capsule& c : target.capsules) {
            if (const auto t = ray_capsule_intersect(camera_position, dir, c)) {
                target_hit = std::min(target_hit, *t);
            }
        }
        bool hit_blocker = false;
        for (const Capsule& c : blockers.capsules) {
            if (const auto t = ray_capsule_intersect(camera_position, dir, c); t && *t < target_hit) {
                hit_blocker = true;
                break;
            }
        }
        if (!hit_blocker) {
            for (const Box3& b : blockers.boxes) {
                if (const auto t = ray_box_intersect(camera_position, dir, b); t && *t < target_hit) {
                    hit_blocker = true;
                    break;
                }
            }
        }
        if (hit_blocker) ++blocked;
    }
    return static_cast<double>(blocked) / static_cast<double>(n_rays);
}

Transform look_at(const Vec3& position, const Vec3& target, const Vec3& up) {
    Vec3 forward = target - position;
    if (forward.norm() < 1e-12) forward = -Vec3::UnitY();
    forward.normalize();
    Vec3 right = forward.cross(up);
    if (right.norm() < 1e-9) right = forward.cross(Vec3::UnitX());
    if (right.norm() < 1e-9) right = forward.cross(Vec3::UnitY());
    right.normalize();
    const Vec3 cam_up = right.cross(forward);

    Mat3 m;
    m.col(0) = right;
    m.col(1) = cam_up;
    m.col(2) = -forward;
    return {Rotation::from_matrix(m), position};
}

double pitch_of(const Vec3& look_direction) {
    const double n = look_direction.norm();
    if (!(n > 0.0)) throw std::invalid_argument("pitch_of: zero direction");
    return std::asin(std::clamp(look_direction.z() / n, -1.0, 1.0));
}

CameraPlacementResult place_cameras(const CameraPlacementInput& input, int n_cameras,
                                    const CameraIntrinsics& intrinsics, const CameraConstraints& constraints,
                                    Rng& rng) {
    if (n_cameras < 1) throw std::invalid_argument("place_cameras: n_cameras must be >= 1");
    intrinsics.validate();
    constraints.validate();
    if (input.subject_roots.empty()) throw std::invalid_argument("place_cameras: no subjects");

    const auto [l_min, l_max] =
        distance_bounds(input.subject_roots, intrinsics.fov_alpha, constraints.lambda, constraints.l_max);

    CameraPlacementResult result;
    if (l_min > l_max) {
        result.diagnostic = "L_min exceeds L_max; subjects too dispersed for the configured camera shell";
        return result;
    }

    Vec3 mean = Vec3::Zero();
    for (const Vec3& p : input.subject_roots) mean += p;
    mean /= static_cast<double>(input.subject_roots.size());

    // The camera sits at mean + d*u; pitch = asin(-u.z).
    const double uz_lo = -std::sin(constraints.pitch_max);
    const double uz_hi = -std::sin(constraints.pitch_min);

    const int n_subjects = static_cast<int>(input.subject_roots.size());

    for (int cam = 0; cam < n_cameras; ++cam) {
        bool placed = false;
        for (int attempt = 0; attempt < constraints.attempt_budget && !placed; ++attempt) {
            ++result.attempts;
            const double uz = rng.uniform(uz_lo, uz_hi);
            const double azimuth = rng.uniform(0.0, kTwoPi);
            const double ring = std::sqrt(std::max(0.0, 1.0 - uz * uz));
            const Vec3 u(ring * std::cos(azimuth), ring * std::sin(azimuth), uz);
            const double d = rng.uniform(l_min, l_max);
            const Vec3 position = mean + d * u;

            bool ok = true;
            for (const Box3& box : input.penetration_obstacles) {
                if (box.contains(position)) {
                    ok = false;
                    break;
                }
            }
            if (!ok) continue;

            const Transform pose = look_at(position, mean);
            const double pitch = pitch_of(pose.rotation.rotate(Vec3(0, 0, -1)));
            if (pitch < constraints.pitch_min - 1e-9 || pitch > constraints.pitch_max + 1e-9) continue;

            // Mean occlusion over the sampled frames, per subject.
            for (int s = 0; s < n_subjects && ok; ++s) {
                double sum = 0.0;
                for (const auto& frame : input.frames) {
                    BlockerSet blockers;
                    blockers.boxes = input.occluder_boxes;
                    for (int o = 0; o < static_cast<int>(frame.size()); ++o) {
                        if (o == s) continue;
                        const auto& caps = frame[static_cast<std::size_t>(o)].capsules;
                        blockers.capsules.insert(blockers.capsules.end(), caps.begin(), caps.end());
                    }
                    sum += occlusion_ratio(position, frame[static_cast<std::size_t>(s)], blockers,
                                           constraints.n_rays, rng);
                }
                const double mean_occl = input.frames.empty() ? 0.0 : sum / static_cast<double>(input.frames.size());
                if (mean_occl > constraints.max_occlusion) ok = false;
            }
            if (!ok) continue;

            result.cameras.push_back({intrinsics, pose});
            placed = true;
        }
        if (!placed) {
            result.diagnostic = "placement exhaustion: only " + std::to_string(result.cameras.size()) +
                                " of " + std::to_string(n_cameras) + " cameras feasible within the budget";
            break;
        }
    }
    return result;
}

void to_json(nlohmann::json& j, const CameraIntrinsics& c) {
    j = {{"fov_alpha", c.fov_alpha}, {"width", c.image_width}, {"height", c.image_height},
         {"cx", c.cx},               {"cy", c.cy}};
}

void from_json(const nlohmann::json& j, CameraIntrinsics& c) {
    c.fov_alpha = j.at("fov_alpha").get<double>();
    c.image_width = j.at("width").get<int>();
    c.image_height = j.at("height").get<int>();
    c.cx = j.value("cx", c.image_width / 2.0);
    c.cy = j.value("cy", c.image_height / 2.0);
    c.validate();
}

void to_json(nlohmann::json& j, const CameraRig& r) {
    j = nlohmann::json::object();
    to_json(j["intrinsics"], r.intrinsics);
    const Mat3 m = r.pose.rotation.to_matrix();
    std::vector<double> mat(16, 0.0);
    for (int row = 0; row < 3; ++row) {
        for (int col = 0; col < 3; ++col) mat[static_cast<std::size_t>(4 * row + col)] = m(row, col);
        mat[static_cast<std::size_t>(4 * row + 3)] = r.pose.translation[row];
    }
    mat[15] = 1.0;
    j["camera_to_world"] = mat;
    j["quaternion"] = {r.pose.rotation.w(), r.pose.rotation.x(), r.pose.rotation.y(), r.pose.rotation.z()};
    j["translation"] = {r.pose.translation.x(), r.pose.translation.y(), r.pose.translation.z()};
}

void from_json(const nlohmann::json& j, CameraRig& r) {
    from_json(j.at("intrinsics"), r.intrinsics);
    const auto& q = j.at("quaternion");
    r.pose.rotation = Rotation(q.at(0).get<double>(), q.at(1).get<double>(), q.at(2).get<double>(),
                               q.at(3).get<double>());
    const auto& t = j.at("translation");
    r.pose.translation = Vec3(t.at(0).get<double>(), t.at(1).get<double>(), t.at(2).get<double>());
}

}  // namespace bodygen
