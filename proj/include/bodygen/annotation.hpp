#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bodygen/camera.hpp"
#include "bodygen/motion.hpp"

namespace bodygen {

struct PixelPoint {
    double u = 0, v = 0;
    double depth = 0;  // camera-frame depth, positive in front
};

// Pinhole projection; nullopt when the point is not strictly in front of the
// camera (depth <= 1e-6).
std::optional<PixelPoint> project_point(const CameraRig& camera, const Vec3& p_world);

struct Keypoint {
    double u = 0, v = 0;
    bool visible = false;  // in front of the camera and inside the image rectangle
};

std::vector<Keypoint> keypoints_2d(const CameraRig& camera, const std::vector<Vec3>& joints_3d);

struct PixelBox {
    double x_min = 0, y_min = 0, x_max = 0, y_max = 0;
};

// Min/max over visible keypoints, expanded by margin_fraction of the larger
// side and clamped to the image; nullopt when nothing is visible.
std::optional<PixelBox> bbox_from_keypoints(const std::vector<Keypoint>& keypoints, double margin_fraction,
                                            int image_width, int image_height);

// Per-pixel depth and actor id from one ray per pixel center. Object boxes
// occlude but own no id: a pixel whose nearest hit is an object stays
// background in both maps, so finite depth <=> nonzero instance everywhere.
struct ProxyMaps {
    int width = 0, height = 0;
    std::vector<float> depth;           // +inf background sentinel
    std::vector<std::uint8_t> instance;  // actor id, 0 = background

    float depth_at(int x, int y) const { return depth[static_cast<std::size_t>(y * width + x)]; }
    std::uint8_t instance_at(int x, int y) const { return instance[static_cast<std::size_t>(y * width + x)]; }
};

ProxyMaps render_proxy_maps(const CameraRig& camera, const std::vector<CapsuleProxy>& actors,
                            const std::vector<Box3>& object_volumes, int width, int height);

struct AnnotationRecord {
    int sequence_id = 0;
    int frame_index = 0;
    int actor_id = 0;
    int camera_id = 0;
    Eigen::VectorXd beta;
    PoseFrame theta_w;
    std::vector<Vec3> joints_3d;
    std::vector<Keypoint> keypoints_2d;
    std::optional<PixelBox> bbox;
    double occlusion = 0.0;
};

// Keeps records at or below the threshold (boundary inclusive).
std::vector<AnnotationRecord> filter_occluded(std::vector<AnnotationRecord> records, double max_occlusion);

// Round-trips a double through the 9-significant-digit decimal form used in
// the NDJSON output, so stored values re-derive each other exactly.
double quantize9(double value);
std::string format9(double value);

std::string annotation_to_ndjson_line(const AnnotationRecord& record);
AnnotationRecord annotation_from_json(const nlohmann::json& j);

void write_ndjson(const std::string& path, const std::vector<AnnotationRecord>& records);
std::vector<AnnotationRecord> read_ndjson(const std::string& path);

// Instance mask: binary PGM (P5), maxval 255, actor id per byte.
void write_pgm(const std::string& path, const ProxyMaps& maps);
// Depth: PFM "Pf", scale -1.0 (little-endian), bottom-to-top rows,
// background written as 1e30.
void write_pfm(const std::string& path, const ProxyMaps& maps);

struct MaskImage {
    int width = 0, height = 0;
    std::vector<std::uint8_t> pixels;
};
struct DepthImage {
    int width = 0, height = 0;
    std::vector<float> pixels;  // background restored to +inf
};
MaskImage read_pgm(const std::string& path);
DepthImage read_pfm(const std::string& path);

}  // namespace bodygen
