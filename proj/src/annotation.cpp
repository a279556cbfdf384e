#include "bodygen/annotation.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace bodygen {

namespace {
constexpr double kMinDepth = 1e-6;
constexpr float kDepthFileSentinel = 1e30f;
}  // namespace

std::optional<PixelPoint> project_point(const CameraRig& camera, const Vec3& p_world) {
    const Vec3 p_cam = camera.pose.inverse().apply(p_world);
    const double depth = -p_cam.z();
    if (!(depth > kMinDepth)) return std::nullopt;
    const double f = camera.intrinsics.focal();
    PixelPoint out;
    out.u = camera.intrinsics.cx + f * p_cam.x() / depth;
    out.v = camera.intrinsics.cy - f * p_cam.y() / depth;
    out.depth = depth;
    return out;
}

std::vector<Keypoint> keypoints_2d(const CameraRig& camera, const std::vector<Vec3>& joints_3d) {
    std::vector<Keypoint> out;
    out.reserve(joints_3d.size());
    const double w = camera.intrinsics.image_width;
    const double h = camera.intrinsics.image_height;
    for (const Vec3& j : joints_3d) {
        Keypoint kp;
        if (const auto px = project_point(camera, j)) {
            kp.u = px->u;
            kp.v = px->v;
            kp.visible = px->u >= 0.0 && px->u <= w && px->v >= 0.0 && px->v <= h;
        }
        out.push_back(kp);
    }
    return out;
}

std::optional<PixelBox> bbox_from_keypoints(const std::vector<Keypoint>& keypoints, double margin_fraction,
                                            int image_width, int image_height) {
    if (margin_fraction < 0.0) throw std::invalid_argument("bbox_from_keypoints: negative margin");
    bool any = false;
    PixelBox box;
    for (const Keypoint& kp : keypoints) {
        if (!kp.visible) continue;
        if (!any) {
            box = {kp.u, kp.v, kp.u, kp.v};
            any = true;
        } else {
            box.x_min = std::min(box.x_min, kp.u);
            box.y_min = std::min(box.y_min, kp.v);
            box.x_max = std::max(box.x_max, kp.u);
            box.y_max = std::max(box.y_max, kp.v);
        }
    }
    if (!any) return std::nullopt;
    const double margin = margin_fraction * std::max(box.x_max - box.x_min, box.y_max - box.y_min);
    box.x_min = std::max(0.0, box.x_min - margin);
    box.y_min = std::max(0.0, box.y_min - margin);
    box.x_max = std::min(static_cast<double>(image_width), box.x_max + margin);
    box.y_max = std::min(static_cast<double>(image_height), box.y_max + margin);
    return box;
}

ProxyMaps render_proxy_maps(const CameraRig& camera, const std::vector<CapsuleProxy>& actors,
                            const std::vector<Box3>& object_volumes, int width, int height) {
    if (width <= 0 || height <= 0) throw std::invalid_argument("render_proxy_maps: resolution must be positive");
    ProxyMaps maps;
    maps.width = width;
    maps.height = height;
    maps.depth.assign(static_cast<std::size_t>(width) * height, std::numeric_limits<float>::infinity());
    maps.instance.assign(static_cast<std::size_t>(width) * height, 0);

    const double f = camera.intrinsics.focal();
    const double cx = camera.intrinsics.cx;
    const double cy = camera.intrinsics.cy;
    const Vec3 origin = camera.pose.translation;
    const Mat3 rot = camera.pose.rotation.to_matrix();

    // Cheap per-actor bounding spheres cut most capsule tests.
    struct ActorBound {
        Vec3 center;
        double radius;
    };
    std::vector<ActorBound> bounds;
    bounds.reserve(actors.size());
    for (const auto& actor : actors) {
        const Box3 box = bounding_box(actor);
        const Vec3 center = 0.5 * (box.min + box.max);
        bounds.push_back({center, 0.5 * (box.max - box.min).norm()});
    }

    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const double u = x + 0.5;
            const double v = y + 0.5;
            const Vec3 dir_cam((u - cx) / f, -(v - cy) / f, -1.0);
            const Vec3 dir = rot * dir_cam;
            // Hit distances come back along the unit ray; dividing by |dir|
            // converts to camera z-depth because dir_cam.z = -1.
            const double ray_to_depth = 1.0 / dir.norm();

            double best_t = std::numeric_limits<double>::infinity();
            std::uint8_t best_id = 0;
            for (std::size_t a = 0; a < actors.size(); ++a) {
                const ActorBound& sphere = bounds[a];
                const Vec3 oc = sphere.center - origin;
                const double proj = oc.dot(dir) / dir.norm();
                const double closest2 = oc.squaredNorm() - proj * proj;
                if (proj + sphere.radius < 0.0 || closest2 > sphere.radius * sphere.radius) continue;
                for (const Capsule& c : actors[a].capsules) {
                    if (const auto t = ray_capsule_intersect(origin, dir, c); t && *t < best_t) {
                        best_t = *t;
                        best_id = static_cast<std::uint8_t>(actors[a].actor_id);
                    }
                }
            }
            for (const Box3& box : object_volumes) {
                if (const auto t = ray_box_intersect(origin, dir, box); t && *t < best_t) {
                    best_t = *t;
                    best_id = 0;  // objects occlude without owning an id
                }
            }
            if (std::isfinite(best_t) && best_id != 0) {
                const std::size_t idx = static_cast<std::size_t>(y) * width + x;
                maps.depth[idx] = static_cast<float>(best_t * ray_to_depth);
                maps.instance[idx] = best_id;
            }
        }
    }
    return maps;
}

std::vector<AnnotationRecord> filter_occluded(std::vector<AnnotationRecord> records, double max_occlusion) {
    std::vector<AnnotationRecord> kept;
    kept.reserve(records.size());
    for (auto& r : records) {
        if (r.occlusion <= max_occlusion) kept.push_back(std::move(r));
    }
    return kept;
}

double quantize9(double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", value);
    return std::strtod(buf, nullptr);
}

std::string format9(double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", value);
    return buf;
}

namespace {

void append_vec3(std::string& out, const Vec3& v) {
    out += '[';
    out += format9(v.x());
    out += ',';
    out += format9(v.y());
    out += ',';
    out += format9(v.z());
    out += ']';
}

}  // namespace

std::string annotation_to_ndjson_line(const AnnotationRecord& r) {
    std::string out;
    out.reserve(1024);
    out += "{\"sequence_id\":" + std::to_string(r.sequence_id);
    out += ",\"frame_index\":" + std::to_string(r.frame_index);
    out += ",\"actor_id\":" + std::to_string(r.actor_id);
    out += ",\"camera_id\":" + std::to_string(r.camera_id);
    out += ",\"beta\":[";
    for (Eigen::Index k = 0; k < r.beta.size(); ++k) {
        if (k) out += ',';
        out += format9(r.beta[k]);
    }
    out += "],\"theta_w\":{\"root_translation\":";
    append_vec3(out, r.theta_w.root_translation);
    out += ",\"local_rotations\":[";
    for (std::size_t i = 0; i < r.theta_w.local_rotations.size(); ++i) {
        const Rotation& q = r.theta_w.local_rotations[i];
        if (i) out += ',';
        out += '[';
        out += format9(q.w());
        out += ',';
        out += format9(q.x());
        out += ',';
        out += format9(q.y());
        out += ',';
        out += format9(q.z());
        out += ']';
    }
    out += "]},\"joints_3d\":[";
    for (std::size_t i = 0; i < r.joints_3d.size(); ++i) {
        if (i) out += ',';
        append_vec3(out, r.joints_3d[i]);
    }
    out += "],\"keypoints_2d\":[";
    for (std::size_t i = 0; i < r.keypoints_2d.size(); ++i) {
        const Keypoint& kp = r.keypoints_2d[i];
        if (i) out += ',';
        out += "{\"pixel\":[";
        out += format9(kp.u);
        out += ',';
        out += format9(kp.v);
        out += "],\"visible\":";
        out += kp.visible ? "true" : "false";
        out += '}';
    }
    out += "],\"bbox\":";
    if (r.bbox) {
        out += "{\"x_min\":" + format9(r.bbox->x_min) + ",\"y_min\":" + format9(r.bbox->y_min) +
               ",\"x_max\":" + format9(r.bbox->x_max) + ",\"y_max\":" + format9(r.bbox->y_max) + "}";
    } else {
        out += "null";
    }
    out += ",\"occlusion\":" + format9(r.occlusion);
    out += '}';
    return out;
}

AnnotationRecord annotation_from_json(const nlohmann::json& j) {
    AnnotationRecord r;
    r.sequence_id = j.at("sequence_id").get<int>();
    r.frame_index = j.at("frame_index").get<int>();
    r.actor_id = j.at("actor_id").get<int>();
    r.camera_id = j.at("camera_id").get<int>();
    const auto& beta = j.at("beta");
    r.beta.resize(static_cast<Eigen::Index>(beta.size()));
    for (Eigen::Index k = 0; k < r.beta.size(); ++k) r.beta[k] = beta.at(static_cast<std::size_t>(k)).get<double>();
    from_json(j.at("theta_w"), r.theta_w);
    for (const auto& v : j.at("joints_3d")) {
        r.joints_3d.emplace_back(v.at(0).get<double>(), v.at(1).get<double>(), v.at(2).get<double>());
    }
    for (const auto& kp : j.at("keypoints_2d")) {
        Keypoint k;
        k.u = kp.at("pixel").at(0).get<double>();
        k.v = kp.at("pixel").at(1).get<double>();
        k.visible = kp.at("visible").get<bool>();
        r.keypoints_2d.push_back(k);
    }
    if (!j.at("bbox").is_null()) {
        const auto& b = j.at("bbox");
        r.bbox = PixelBox{b.at("x_min").get<double>(), b.at("y_min").get<double>(),
                          b.at("x_max").get<double>(), b.at("y_max").get<double>()};
    }
    r.occlusion = j.at("occlusion").get<double>();
    return r;
}

void write_ndjson(const std::string& path, const std::vector<AnnotationRecord>& records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_ndjson: cannot open " + path);
    for (const auto& r : records) {
        out << annotation_to_ndjson_line(r) << '\n';
    }
}

std::vector<AnnotationRecord> read_ndjson(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_ndjson: cannot open " + path);
    std::vector<AnnotationRecord> records;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        records.push_back(annotation_from_json(nlohmann::json::parse(line)));
    }
    return records;
}

void write_pgm(const std::string& path, const ProxyMaps& maps) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_pgm: cannot open " + path);
    out << "P5\n" << maps.width << " " << maps.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(maps.instance.data()),
              static_cast<std::streamsize>(maps.instance.size()));
}

void write_pfm(const std::string& path, const ProxyMaps& maps) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_pfm: cannot open " + path);
    out << "Pf\n" << maps.width << " " << maps.height << "\n-1.0\n";
    // Bottom-to-top scanlines, little-endian float32 (scale header -1.0).
    std::vector<float> row(static_cast<std::size_t>(maps.width));
    for (int y = maps.height - 1; y >= 0; --y) {
        for (int x = 0; x < maps.width; ++x) {
            const float d = maps.depth_at(x, y);
            row[static_cast<std::size_t>(x)] = std::isfinite(d) ? d : kDepthFileSentinel;
        }
        out.write(reinterpret_cast<const char*>(row.data()),
                  static_cast<std::streamsize>(row.size() * sizeof(float)));
    }
}

MaskImage read_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_pgm: cannot open " + path);
    std::string magic;
    int w = 0, h = 0, maxval = 0;
    in >> magic >> w >> h >> maxval;
    if (magic != "P5" || maxval != 255 || w <= 0 || h <= 0) {
        throw std::runtime_error("read_pgm: unsupported format in " + path);
    }
    in.get();  // single whitespace after header
    MaskImage img;
    img.width = w;
    img.height = h;
    img.pixels.resize(static_cast<std::size_t>(w) * h);
    in.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
    if (!in) throw std::runtime_error("read_pgm: truncated file " + path);
    return img;
}

DepthImage read_pfm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_pfm: cannot open " + path);
    std::string magic;
    int w = 0, h = 0;
    double scale = 0.0;
    in >> magic >> w >> h >> scale;
    if (magic != "Pf" || w <= 0 || h <= 0 || scale >= 0.0) {
        throw std::runtime_error("read_pfm: unsupported format in " + path);
    }
    in.get();
    DepthImage img;
    img.width = w;
    img.height = h;
    img.pixels.assign(static_cast<std::size_t>(w) * h, 0.0f);
    std::vector<float> row(static_cast<std::size_t>(w));
    for (int y = h - 1; y >= 0; --y) {
        in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size() * sizeof(float)));
        if (!in) throw std::runtime_error("read_pfm: truncated file " + path);
        for (int x = 0; x < w; ++x) {
            const float d = row[static_cast<std::size_t>(x)];
            img.pixels[static_cast<std::size_t>(y) * w + x] =
                d >= kDepthFileSentinel ? std::numeric_limits<float>::infinity() : d;
        }
    }
    return img;
}

}  // namespace bodygen
