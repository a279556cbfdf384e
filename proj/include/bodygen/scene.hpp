#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bodygen/motion.hpp"
#include "bodygen/rng.hpp"
#include "bodygen/skeleton.hpp"

namespace bodygen {

// Ground-projected axis-aligned box: center (x, y), extents (l, w).
struct Footprint {
    double x = 0, y = 0, l = 1, w = 1;

    double x_min() const { return x - 0.5 * l; }
    double x_max() const { return x + 0.5 * l; }
    double y_min() const { return y - 0.5 * w; }
    double y_max() const { return y + 0.5 * w; }

    void validate() const;
};

// Overlapping area I(a, b): zero exactly when the interiors are disjoint.
double overlap_area(const Footprint& a, const Footprint& b);

// Smallest axis-aligned box enveloping every per-frame box.
Footprint swept_footprint(const std::vector<Footprint>& per_frame_boxes);

// Gridded ground elevation, bilinear between nodes; queries clamp to the
// covered extent. A 1x1 grid behaves as a constant field.
struct Heightfield {
    double origin_x = 0, origin_y = 0;
    double cell = 1.0;
    int nx = 1, ny = 1;
    std::vector<double> values{0.0};  // row-major, y-major rows

    static Heightfield constant(double z);
    double sample(double x, double y) const;
    void validate() const;
};

struct Bounds2d {
    double x_min = 0, y_min = 0, x_max = 0, y_max = 0;
    bool contains(double x, double y) const { return x >= x_min && x <= x_max && y >= y_min && y <= y_max; }
    bool contains(const Footprint& f) const {
        return f.x_min() >= x_min && f.x_max() <= x_max && f.y_min() >= y_min && f.y_max() <= y_max;
    }
};

struct SceneLayout {
    Bounds2d bounds;
    std::vector<Footprint> objects;
    std::vector<Footprint> placed_actors;
    Heightfield heightfield = Heightfield::constant(0.0);

    void validate() const;
};

struct PlacementConfig {
    double grid_step = 0.25;
    double dispersal_radius = 5.0;  // max distance to the centroid of placed actors
    std::uint64_t seed = 0;

    void validate() const;
};

// Ground height at (x, y); throws std::out_of_range outside the scene bounds.
double ground_height(const SceneLayout& scene, double x, double y);

struct Placement {
    double x = 0, y = 0, z = 0;
};

// Candidate cell centers for a box of the given extents: the grid anchored at
// the bounds origin with the configured step, restricted to in-bounds boxes.
std::vector<std::pair<double, double>> placement_grid(const Bounds2d& bounds, double l, double w,
                                                      double grid_step);

// Overlap-free feasibility of one candidate against the scene (objects,
// placed actors, bounds, dispersal constraint).
bool placement_feasible(const SceneLayout& scene, const Footprint& candidate, double dispersal_radius);

// Grid search over collision-free cells; picks one feasible cell uniformly at
// random, extends scene.placed_actors, and returns the ground-aligned spot.
// Returns nullopt when no feasible cell exists.
std::optional<Placement> place_actor(SceneLayout& scene, double l, double w, const PlacementConfig& cfg,
                                     Rng& rng);

// Per-frame ground-projected joint AABBs, margin-expanded, with a minimum
// extent of 0.3 to avoid degenerate boxes. The optional placement transform
// is applied to the posed joints first (e.g. a yaw).
std::vector<Footprint> actor_frame_boxes(const Skeleton& skeleton, const MotionClip& clip, double margin,
                                         const Transform& placement = Transform::identity());

void to_json(nlohmann::json& j, const Footprint& f);
void from_json(const nlohmann::json& j, Footprint& f);
void to_json(nlohmann::json& j, const SceneLayout& s);
void from_json(const nlohmann::json& j, SceneLayout& s);

}  // namespace bodygen
