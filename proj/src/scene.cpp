#include "bodygen/scene.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace bodygen {

void Footprint::validate() const {
    if (!(l > 0.0) || !(w > 0.0)) throw std::invalid_argument("Footprint: extents must be positive");
    if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(l) || !std::isfinite(w)) {
        throw std::invalid_argument("Footprint: non-finite field");
    }
}

double overlap_area(const Footprint& a, const Footprint& b) {
    const double dx = std::min(a.x_max(), b.x_max()) - std::max(a.x_min(), b.x_min());
    const double dy = std::min(a.y_max(), b.y_max()) - std::max(a.y_min(), b.y_min());
    return std::max(0.0, dx) * std::max(0.0, dy);
}

Footprint swept_footprint(const std::vector<Footprint>& per_frame_boxes) {
    if (per_frame_boxes.empty()) throw std::invalid_argument("swept_footprint: no boxes");
    double x0 = per_frame_boxes.front().x_min();
    double x1 = per_frame_boxes.front().x_max();
    double y0 = per_frame_boxes.front().y_min();
    double y1 = per_frame_boxes.front().y_max();
    for (const Footprint& f : per_frame_boxes) {
        x0 = std::min(x0, f.x_min());
        x1 = std::max(x1, f.x_max());
        y0 = std::min(y0, f.y_min());
        y1 = std::max(y1, f.y_max());
    }
    return {0.5 * (x0 + x1), 0.5 * (y0 + y1), x1 - x0, y1 - y0};
}

Heightfield Heightfield::constant(double z) {
    Heightfield h;
    h.values = {z};
    return h;
}

void Heightfield::validate() const {
    if (nx < 1 || ny < 1) throw std::invalid_argument("Heightfield: grid must be at least 1x1");
    if (!(cell > 0.0)) throw std::invalid_argument("Heightfield: cell size must be positive");
    if (static_cast<int>(values.size()) != nx * ny) {
        throw std::invalid_argument("Heightfield: value count does not match grid");
    }
    for (double v : values) {
        if (!std::isfinite(v)) throw std::invalid_argument("Heightfield: non-finite height");
    }
}

double Heightfield::sample(double x, double y) const {
    if (nx == 1 && ny == 1) return values[0];
    const double gx = std::clamp((x - origin_x) / cell, 0.0, static_cast<double>(nx - 1));
    const double gy = std::clamp((y - origin_y) / cell, 0.0, static_cast<double>(ny - 1));
    const int i0 = std::min(static_cast<int>(gx), nx - 2 >= 0 ? nx - 2 : 0);
    const int j0 = std::min(static_cast<int>(gy), ny - 2 >= 0 ? ny - 2 : 0);
    const int i1 = std::min(i0 + 1, nx - 1);
    const int j1 = std::min(j0 + 1, ny - 1);
    const double fx = gx - i0;
    const double fy = gy - j0;
    const auto at = [&](int i, int j) { return values[static_cast<std::size_t>(j * nx + i)]; };
    const double h0 = at(i0, j0) * (1 - fx) + at(i1, j0) * fx;
    const double h1 = at(i0, j1) * (1 - fx) + at(i1, j1) * fx;
    return h0 * (1 - fy) + h1 * fy;
}

void SceneLayout::validate() const {
    if (!(bounds.x_max > bounds.x_min) || !(bounds.y_max > bounds.y_min)) {
        throw std::invalid_argument("SceneLayout: empty bounds");
    }
    heightfield.validate();
    for (const Footprint& f : objects) {
        f.validate();
        if (!bounds.contains(f)) throw std::invalid_argument("SceneLayout: object outside bounds");
    }
    for (const Footprint& f : placed_actors) {
        f.validate();
        if (!bounds.contains(f)) throw std::invalid_argument("SceneLayout: placed actor outside bounds");
    }
}

void PlacementConfig::validate() const {
    if (!(grid_step > 0.0)) throw std::invalid_argument("PlacementConfig: grid_step must be positive");
    if (!(dispersal_radius > 0.0)) throw std::invalid_argument("PlacementConfig: dispersal radius must be positive");
}

double ground_height(const SceneLayout& scene, double x, double y) {
    if (!scene.bounds.contains(x, y)) throw std::out_of_range("ground_height: query outside scene bounds");
    return scene.heightfield.sample(x, y);
}

std::vector<std::pair<double, double>> placement_grid(const Bounds2d& bounds, double l, double w,
                                                      double grid_step) {
    std::vector<std::pair<double, double>> cells;
    for (int i = 0;; ++i) {
        const double x = bounds.x_min + i * grid_step;
        if (x > bounds.x_max) break;
        if (x - 0.5 * l < bounds.x_min || x + 0.5 * l > bounds.x_max) continue;
        for (int j = 0;; ++j) {
            const double y = bounds.y_min + j * grid_step;
            if (y > bounds.y_max) break;
            if (y - 0.5 * w < bounds.y_min || y + 0.5 * w > bounds.y_max) continue;
            cells.emplace_back(x, y);
        }
    }
    return cells;
}

bool placement_feasible(const SceneLayout& scene, const Footprint& candidate, double dispersal_radius) {
    if (!scene.bounds.contains(candidate)) return false;
    for (const Footprint& o : scene.objects) {
        if (overlap_area(candidate, o) != 0.0) return false;
    }
    for (const Footprint& q : scene.placed_actors) {
        if (overlap_area(candidate, q) != 0.0) return false;
    }
    if (!scene.placed_actors.empty()) {
        double cx = 0, cy = 0;
        for (const Footprint& q : scene.placed_actors) {
            cx += q.x;
            cy += q.y;
        }
        cx /= static_cast<double>(scene.placed_actors.size());
        cy /= static_cast<double>(scene.placed_actors.size());
        const double dist = std::hypot(candidate.x - cx, candidate.y - cy);
        if (dist > dispersal_radius) return false;
    }
    return true;
}

std::optional<Placement> place_actor(SceneLayout& scene, double l, double w, const PlacementConfig& cfg,
                                     Rng& rng) {
    if (!(l > 0.0) || !(w > 0.0)) throw std::invalid_argument("place_actor: extents must be positive");
    cfg.validate();

    std::vector<std::pair<double, double>> feasible;
    for (const auto& [x, y] : placement_grid(scene.bounds, l, w, cfg.grid_step)) {
        if (placement_feasible(scene, {x, y, l, w}, cfg.dispersal_radius)) feasible.emplace_back(x, y);
    }
    if (feasible.empty()) return std::nullopt;

    const auto& [x, y] = feasible[rng.uniform_index(feasible.size())];
    scene.placed_actors.push_back({x, y, l, w});
    return Placement{x, y, ground_height(scene, x, y)};
}

std::vector<Footprint> actor_frame_boxes(const Skeleton& skeleton, const MotionClip& clip, double margin,
                                         const Transform& placement) {
    if (margin < 0.0) throw std::invalid_argument("actor_frame_boxes: margin must be non-negative");
    clip.validate(skeleton);

    constexpr double kMinExtent = 0.3;
    std::vector<Footprint> boxes;
    boxes.reserve(clip.frames.size());
    for (const PoseFrame& frame : clip.frames) {
        const std::vector<Vec3> joints = fk_joint_positions(skeleton, frame);
        double x0 = std::numeric_limits<double>::infinity(), x1 = -x0;
        double y0 = x0, y1 = -x0;
        for (const Vec3& j : joints) {
            const Vec3 p = placement.apply(j);
            x0 = std::min(x0, p.x());
            x1 = std::max(x1, p.x());
            y0 = std::min(y0, p.y());
            y1 = std::max(y1, p.y());
        }
        const double l = std::max(x1 - x0 + 2.0 * margin, kMinExtent);
        const double w = std::max(y1 - y0 + 2.0 * margin, kMinExtent);
        boxes.push_back({0.5 * (x0 + x1), 0.5 * (y0 + y1), l, w});
    }
    return boxes;
}

void to_json(nlohmann::json& j, const Footprint& f) {
    j = {{"x", f.x}, {"y", f.y}, {"l", f.l}, {"w", f.w}};
}

void from_json(const nlohmann::json& j, Footprint& f) {
    f.x = j.at("x").get<double>();
    f.y = j.at("y").get<double>();
    f.l = j.at("l").get<double>();
    f.w = j.at("w").get<double>();
    f.validate();
}

void to_json(nlohmann::json& j, const SceneLayout& s) {
    j = nlohmann::json::object();
    j["bounds"] = {s.bounds.x_min, s.bounds.y_min, s.bounds.x_max, s.bounds.y_max};
    j["objects"] = s.objects;
    if (!s.placed_actors.empty()) j["placed_actors"] = s.placed_actors;
    if (s.heightfield.nx == 1 && s.heightfield.ny == 1) {
        j["heightfield"] = {{"constant", s.heightfield.values[0]}};
    } else {
        nlohmann::json rows = nlohmann::json::array();
        for (int r = 0; r < s.heightfield.ny; ++r) {
            nlohmann::json row = nlohmann::json::array();
            for (int c = 0; c < s.heightfield.nx; ++c) {
                row.push_back(s.heightfield.values[static_cast<std::size_t>(r * s.heightfield.nx + c)]);
            }
            rows.push_back(std::move(row));
        }
        j["heightfield"] = {{"origin", {s.heightfield.origin_x, s.heightfield.origin_y}},
                            {"cell", s.heightfield.cell},
                            {"values", std::move(rows)}};
    }
}

void from_json(const nlohmann::json& j, SceneLayout& s) {
    const auto& b = j.at("bounds");
    s.bounds = {b.at(0).get<double>(), b.at(1).get<double>(), b.at(2).get<double>(), b.at(3).get<double>()};
    s.objects.clear();
    for (const auto& o : j.at("objects")) s.objects.push_back(o.get<Footprint>());
    s.placed_actors.clear();
    if (j.contains("placed_actors")) {
        for (const auto& o : j.at("placed_actors")) s.placed_actors.push_back(o.get<Footprint>());
    }
    const auto& h = j.at("heightfield");
    if (h.contains("constant")) {
        s.heightfield = Heightfield::constant(h.at("constant").get<double>());
    } else {
        Heightfield hf;
        hf.origin_x = h.at("origin").at(0).get<double>();
        hf.origin_y = h.at("origin").at(1).get<double>();
        hf.cell = h.at("cell").get<double>();
        const auto& rows = h.at("values");
        hf.ny = static_cast<int>(rows.size());
        hf.nx = hf.ny > 0 ? static_cast<int>(rows.at(0).size()) : 0;
        hf.values.clear();
        for (const auto& row : rows) {
            if (static_cast<int>(row.size()) != hf.nx) {
                throw std::invalid_argument("SceneLayout: ragged heightfield rows");
            }
            for (const auto& v : row) hf.values.push_back(v.get<double>());
        }
        s.heightfield = hf;
    }
    s.validate();
}

}  // namespace bodygen
