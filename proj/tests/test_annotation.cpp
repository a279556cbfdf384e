#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "bodygen/annotation.hpp"
#include "bodygen/body_model.hpp"
#include "oracles.hpp"

using namespace bodygen;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Camera at the origin looking down -z with focal length 100 and a 100x100
// image (principal point 50, 50).
CameraRig reference_camera() {
    CameraIntrinsics intr;
    intr.fov_alpha = kPi / 2;  // focal = (width/2)/tan(pi/4) = width/2
    intr.image_width = 200;
    intr.image_height = 200;
    intr.cx = 50.0;
    intr.cy = 50.0;
    return {intr, Transform::identity()};
}

}  // namespace

TEST_CASE("project_point pinhole formula") {
    const CameraRig cam = reference_camera();
    REQUIRE(cam.intrinsics.focal() == doctest::Approx(100.0).epsilon(1e-12));

    SUBCASE("optical axis hits the principal point at any depth") {
        for (double d : {0.5, 2.0, 40.0}) {
            const auto px = project_point(cam, Vec3(0, 0, -d));
            REQUIRE(px.has_value());
            CHECK(px->u == doctest::Approx(50.0).epsilon(1e-12));
            CHECK(px->v == doctest::Approx(50.0).epsilon(1e-12));
            CHECK(px->depth == doctest::Approx(d).epsilon(1e-12));
        }
    }
    SUBCASE("worked example: camera-frame point (1, 0, -2)") {
        const auto px = project_point(cam, Vec3(1, 0, -2));
        REQUIRE(px.has_value());
        CHECK(px->u == doctest::Approx(100.0).epsilon(1e-12));
    }
    SUBCASE("points behind the camera do not project") {
        CHECK_FALSE(project_point(cam, Vec3(0, 0, 2)).has_value());
        CHECK_FALSE(project_point(cam, Vec3(0, 0, 0)).has_value());
    }
    SUBCASE("round trip through explicit back-projection") {
        Rng rng(91);
        const CameraRig posed{cam.intrinsics, look_at(Vec3(4, -2, 3), Vec3(0, 0, 1))};
        for (int i = 0; i < 200; ++i) {
            const Vec3 p(rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-2, 4));
            const auto px = project_point(posed, p);
            if (!px) continue;
            // Invert: camera-frame point from (u, v, depth), then to world.
            const double f = posed.intrinsics.focal();
            const Vec3 p_cam((px->u - posed.intrinsics.cx) * px->depth / f,
                             -(px->v - posed.intrinsics.cy) * px->depth / f, -px->depth);
            const Vec3 back = posed.pose.apply(p_cam);
            CHECK((back - p).norm() < 1e-9);
        }
    }
}

TEST_CASE("keypoints_2d visibility flags match a frustum oracle") {
    Rng rng(92);
    const CameraRig cam{CameraIntrinsics::with_fov(kPi / 3, 320, 240), look_at(Vec3(5, 1, 2), Vec3(0, 0, 1))};

    SUBCASE("all joints behind the camera are invisible") {
        std::vector<Vec3> behind;
        const Vec3 back_dir = -cam.look_direction();
        for (int i = 0; i < 10; ++i) behind.push_back(cam.position() + back_dir * (1.0 + i));
        for (const Keypoint& kp : keypoints_2d(cam, behind)) CHECK_FALSE(kp.visible);
    }
    SUBCASE("a joint on the optical axis is visible at the principal point") {
        const std::vector<Vec3> joints = {cam.position() + 3.0 * cam.look_direction()};
        const auto kps = keypoints_2d(cam, joints);
        REQUIRE(kps.size() == 1);
        CHECK(kps[0].visible);
        CHECK(kps[0].u == doctest::Approx(cam.intrinsics.cx));
        CHECK(kps[0].v == doctest::Approx(cam.intrinsics.cy));
    }
    SUBCASE("random joints: flag equals the projection-and-bounds oracle") {
        std::vector<Vec3> joints;
        for (int i = 0; i < 500; ++i) {
            joints.emplace_back(rng.uniform(-8, 8), rng.uniform(-8, 8), rng.uniform(-8, 8));
        }
        const auto kps = keypoints_2d(cam, joints);
        for (std::size_t i = 0; i < joints.size(); ++i) {
            const auto px = project_point(cam, joints[i]);
            const bool expect = px && px->u >= 0 && px->u <= 320 && px->v >= 0 && px->v <= 240;
            CHECK(kps[i].visible == expect);
        }
    }
}

TEST_CASE("bbox_from_keypoints") {
    SUBCASE("single visible keypoint with zero margin is a point box") {
        std::vector<Keypoint> kps = {{12.5, 40.25, true}};
        const auto box = bbox_from_keypoints(kps, 0.0, 100, 100);
        REQUIRE(box.has_value());
        CHECK(box->x_min == 12.5);
        CHECK(box->x_max == 12.5);
        CHECK(box->y_min == 40.25);
        CHECK(box->y_max == 40.25);
    }
    SUBCASE("no visible keypoints yields nothing") {
        std::vector<Keypoint> kps = {{10, 10, false}, {20, 20, false}};
        CHECK_FALSE(bbox_from_keypoints(kps, 0.05, 100, 100).has_value());
    }
    SUBCASE("random sets: the clamped box contains every visible keypoint") {
        Rng rng(93);
        for (int trial = 0; trial < 100; ++trial) {
            std::vector<Keypoint> kps;
            bool any = false;
            for (int i = 0; i < 12; ++i) {
                Keypoint kp;
                kp.u = rng.uniform(0, 200);
                kp.v = rng.uniform(0, 150);
                kp.visible = rng.bernoulli(0.6);
                any = any || kp.visible;
                kps.push_back(kp);
            }
            const auto box = bbox_from_keypoints(kps, rng.uniform(0.0, 0.3), 200, 150);
            REQUIRE(box.has_value() == any);
            if (!box) continue;
            for (const Keypoint& kp : kps) {
                if (!kp.visible) continue;
                CHECK(kp.u >= box->x_min);
                CHECK(kp.u <= box->x_max);
                CHECK(kp.v >= box->y_min);
                CHECK(kp.v <= box->y_max);
            }
            CHECK(box->x_min >= 0.0);
            CHECK(box->y_min >= 0.0);
            CHECK(box->x_max <= 200.0);
            CHECK(box->y_max <= 150.0);
        }
    }
    CHECK_THROWS_AS(bbox_from_keypoints({}, -0.1, 10, 10), std::invalid_argument);
}

TEST_CASE("render_proxy_maps") {
    const CameraRig cam{CameraIntrinsics::with_fov(kPi / 3, 64, 64), look_at(Vec3(0, -6, 1), Vec3(0, 0, 1))};

    SUBCASE("empty scene renders pure background") {
        const ProxyMaps maps = render_proxy_maps(cam, {}, {}, 64, 64);
        for (int i = 0; i < 64 * 64; ++i) {
            CHECK(maps.instance[static_cast<std::size_t>(i)] == 0);
            CHECK(std::isinf(maps.depth[static_cast<std::size_t>(i)]));
        }
    }

    SUBCASE("nearest actor wins every covered pixel") {
        CapsuleProxy front;
        front.actor_id = 1;
        front.capsules = {{Vec3(0, -2, 0.2), Vec3(0, -2, 1.8), 0.4}};
        CapsuleProxy back;
        back.actor_id = 2;
        back.capsules = {{Vec3(0, 2, 0.2), Vec3(0, 2, 1.8), 0.4}};
        const ProxyMaps maps = render_proxy_maps(cam, {front, back}, {}, 64, 64);
        bool saw_front = false;
        for (int y = 0; y < 64; ++y) {
            for (int x = 0; x < 64; ++x) {
                const auto id = maps.instance_at(x, y);
                if (id == 1) saw_front = true;
                CHECK(id != 2);  // the back capsule is fully shadowed
            }
        }
        CHECK(saw_front);
    }

    SUBCASE("objects occlude but never own pixels") {
        CapsuleProxy actor;
        actor.actor_id = 3;
        actor.capsules = {{Vec3(0, 0, 0.2), Vec3(0, 0, 1.8), 0.4}};
        const Box3 wall{Vec3(-3, -3.0, -1), Vec3(3, -2.5, 3)};
        const ProxyMaps maps = render_proxy_maps(cam, {actor}, {wall}, 64, 64);
        for (int i = 0; i < 64 * 64; ++i) {
            CHECK(maps.instance[static_cast<std::size_t>(i)] == 0);
            CHECK(std::isinf(maps.depth[static_cast<std::size_t>(i)]));
        }
    }

    SUBCASE("per-pixel agreement with the direct ray-cast oracle") {
        Rng rng(94);
        std::vector<CapsuleProxy> actors;
        for (int a = 0; a < 3; ++a) {
            CapsuleProxy proxy;
            proxy.actor_id = a + 1;
            for (int c = 0; c < 4; ++c) {
                const Vec3 base(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(0, 1));
                proxy.capsules.push_back(
                    {base, base + Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(0.1, 1)),
                     rng.uniform(0.08, 0.3)});
            }
            actors.push_back(std::move(proxy));
        }
        std::vector<Box3> objects = {Box3{Vec3(-1, -1, 0), Vec3(-0.2, -0.2, 1.5)}};

        const ProxyMaps maps = render_proxy_maps(cam, actors, objects, 64, 64);
        const double f = cam.intrinsics.focal();
        const Mat3 rot = cam.pose.rotation.to_matrix();
        for (int y = 0; y < 64; ++y) {
            for (int x = 0; x < 64; ++x) {
                const Vec3 dir_cam((x + 0.5 - cam.intrinsics.cx) / f, -(y + 0.5 - cam.intrinsics.cy) / f, -1.0);
                const Vec3 dir = rot * dir_cam;
                double best = std::numeric_limits<double>::infinity();
                std::uint8_t id = 0;
                for (const auto& actor : actors) {
                    for (const Capsule& c : actor.capsules) {
                        if (const auto t = ray_capsule_intersect(cam.position(), dir, c); t && *t < best) {
                            best = *t;
                            id = static_cast<std::uint8_t>(actor.actor_id);
                        }
                    }
                }
                for (const Box3& b : objects) {
                    if (const auto t = ray_box_intersect(cam.position(), dir, b); t && *t < best) {
                        best = *t;
                        id = 0;
                    }
                }
                CHECK(maps.instance_at(x, y) == id);
                if (id != 0) {
                    CHECK(maps.depth_at(x, y) == doctest::Approx(best / dir.norm()).epsilon(1e-6));
                } else {
                    CHECK(std::isinf(maps.depth_at(x, y)));
                }
            }
        }
    }

    SUBCASE("depth/instance consistency holds everywhere") {
        Rng rng(95);
        CapsuleProxy actor;
        actor.actor_id = 1;
        actor.capsules = {{Vec3(0, 0, 0.2), Vec3(0, 0, 1.8), 0.5}};
        const ProxyMaps maps = render_proxy_maps(cam, {actor}, {Box3{Vec3(-2, -2, 0), Vec3(-1, -1, 2)}}, 96, 96);
        for (int i = 0; i < 96 * 96; ++i) {
            const bool finite = std::isfinite(maps.depth[static_cast<std::size_t>(i)]);
            const bool labeled = maps.instance[static_cast<std::size_t>(i)] != 0;
            CHECK(finite == labeled);
        }
    }
}

TEST_CASE("visible keypoints of an unoccluded actor land on its mask pixels") {
    // Capsule proxies approximate the body, so exact coverage is not
    // expected; at 256x256 at least 90% of visible joints must hit their
    // actor's instance id.
    Rng rng(98);
    const LbsBodyModel model = builtin_body_24();
    int visible_total = 0;
    int on_mask = 0;
    for (int trial = 0; trial < 6; ++trial) {
        BodyParams params;
        params.beta = sample_shape(rng, model.shape_count(), 0.5);
        params.theta = PoseFrame::rest(model.joint_count());
        for (auto& q : params.theta.local_rotations) {
            Vec3 axis(rng.normal(), rng.normal(), rng.normal());
            if (axis.norm() < 1e-9) axis = Vec3::UnitZ();
            q = Rotation::from_axis_angle(axis.normalized(), rng.uniform(-0.4, 0.4));
        }
        const Skeleton skel = shaped_skeleton(model, params.beta);
        const auto joints = fk_joint_positions(skel, params.theta);
        const CapsuleProxy proxy = make_capsule_proxy(skel, joints, 1);

        const CameraRig cam{CameraIntrinsics::with_fov(kPi / 3, 256, 256),
                            look_at(Vec3(rng.uniform(2.5, 4.0), rng.uniform(-1, 1), rng.uniform(1, 2)),
                                    joints[0])};
        const ProxyMaps maps = render_proxy_maps(cam, {proxy}, {}, 256, 256);
        const auto kps = keypoints_2d(cam, joints);
        for (const Keypoint& kp : kps) {
            if (!kp.visible) continue;
            ++visible_total;
            const int px = std::clamp(static_cast<int>(kp.u), 0, 255);
            const int py = std::clamp(static_cast<int>(kp.v), 0, 255);
            if (maps.instance_at(px, py) == 1) ++on_mask;
        }
    }
    REQUIRE(visible_total > 50);
    CHECK(static_cast<double>(on_mask) >= 0.9 * static_cast<double>(visible_total));
}

TEST_CASE("filter_occluded keeps the boundary") {
    std::vector<AnnotationRecord> records(3);
    records[0].occlusion = 0.0;
    records[1].occlusion = 0.7;
    records[2].occlusion = 1.0;
    const auto kept = filter_occluded(std::move(records), 0.7);
    REQUIRE(kept.size() == 2);
    CHECK(kept[0].occlusion == 0.0);
    CHECK(kept[1].occlusion == 0.7);
}

TEST_CASE("quantize9 is a projection and formatting is stable") {
    Rng rng(96);
    for (int i = 0; i < 1000; ++i) {
        const double x = rng.normal() * std::pow(10.0, rng.uniform_int(-6, 6));
        const double q = quantize9(x);
        CHECK(quantize9(q) == q);
        CHECK(format9(q) == format9(quantize9(q)));
        CHECK(std::abs(q - x) <= 5e-9 * std::max(1.0, std::abs(x)));
    }
    CHECK(format9(0.0) == "0");
    CHECK(quantize9(1.0) == 1.0);
}

TEST_CASE("ndjson records round trip and re-derive exactly") {
    Rng rng(97);
    const CameraRig cam{CameraIntrinsics::with_fov(kPi / 3, 256, 256), look_at(Vec3(0, -5, 2), Vec3(0, 0, 1))};

    std::vector<AnnotationRecord> records;
    for (int i = 0; i < 25; ++i) {
        AnnotationRecord rec;
        rec.sequence_id = 7;
        rec.frame_index = i;
        rec.actor_id = 1 + (i % 3);
        rec.camera_id = i % 2;
        rec.beta = Eigen::VectorXd::Zero(4);
        for (int k = 0; k < 4; ++k) rec.beta[k] = rng.uniform(-1, 1);
        rec.theta_w.root_translation = Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(0, 2));
        rec.theta_w.local_rotations.assign(5, Rotation::identity());
        for (int j = 0; j < 8; ++j) {
            rec.joints_3d.emplace_back(quantize9(rng.uniform(-2, 2)), quantize9(rng.uniform(-2, 2)),
                                       quantize9(rng.uniform(0, 2)));
        }
        rec.keypoints_2d = keypoints_2d(cam, rec.joints_3d);
        for (Keypoint& kp : rec.keypoints_2d) {
            kp.u = quantize9(kp.u);
            kp.v = quantize9(kp.v);
        }
        rec.bbox = bbox_from_keypoints(rec.keypoints_2d, 0.05, 256, 256);
        if (rec.bbox) {
            rec.bbox->x_min = quantize9(rec.bbox->x_min);
            rec.bbox->y_min = quantize9(rec.bbox->y_min);
            rec.bbox->x_max = quantize9(rec.bbox->x_max);
            rec.bbox->y_max = quantize9(rec.bbox->y_max);
        }
        rec.occlusion = quantize9(rng.uniform(0, 1));
        records.push_back(std::move(rec));
    }

    const std::string path = "/tmp/bodygen_annotation_test.ndjson";
    write_ndjson(path, records);
    const auto parsed = read_ndjson(path);
    REQUIRE(parsed.size() == records.size());

    for (std::size_t i = 0; i < parsed.size(); ++i) {
        const auto& a = records[i];
        const auto& b = parsed[i];
        CHECK(a.sequence_id == b.sequence_id);
        CHECK(a.frame_index == b.frame_index);
        CHECK(a.actor_id == b.actor_id);
        CHECK(a.camera_id == b.camera_id);
        REQUIRE(a.joints_3d.size() == b.joints_3d.size());
        // Quantized fields survive the file bit for bit.
        for (std::size_t j = 0; j < a.joints_3d.size(); ++j) {
            CHECK(a.joints_3d[j].x() == b.joints_3d[j].x());
            CHECK(a.joints_3d[j].y() == b.joints_3d[j].y());
            CHECK(a.joints_3d[j].z() == b.joints_3d[j].z());
        }
        // Re-projecting the parsed joints reproduces the parsed keypoints
        // exactly, including visibility.
        auto reproj = keypoints_2d(cam, b.joints_3d);
        REQUIRE(reproj.size() == b.keypoints_2d.size());
        for (std::size_t j = 0; j < reproj.size(); ++j) {
            CHECK(b.keypoints_2d[j].visible == reproj[j].visible);
            CHECK(quantize9(reproj[j].u) == b.keypoints_2d[j].u);
            CHECK(quantize9(reproj[j].v) == b.keypoints_2d[j].v);
        }
        CHECK(a.occlusion == b.occlusion);
        REQUIRE(a.bbox.has_value() == b.bbox.has_value());
        if (a.bbox) {
            CHECK(a.bbox->x_min == b.bbox->x_min);
            CHECK(a.bbox->x_max == b.bbox->x_max);
        }
    }
}

TEST_CASE("pgm and pfm files round trip") {
    ProxyMaps maps;
    maps.width = 5;
    maps.height = 3;
    maps.depth.assign(15, std::numeric_limits<float>::infinity());
    maps.instance.assign(15, 0);
    maps.depth[7] = 2.5f;
    maps.instance[7] = 9;
    maps.depth[14] = 0.125f;
    maps.instance[14] = 255;

    const std::string dir = "/tmp/bodygen_maps_test";
    std::filesystem::create_directories(dir);
    write_pgm(dir + "/m.pgm", maps);
    write_pfm(dir + "/d.pfm", maps);

    const MaskImage mask = read_pgm(dir + "/m.pgm");
    REQUIRE(mask.width == 5);
    REQUIRE(mask.height == 3);
    CHECK(mask.pixels[7] == 9);
    CHECK(mask.pixels[14] == 255);
    CHECK(mask.pixels[0] == 0);

    const DepthImage depth = read_pfm(dir + "/d.pfm");
    REQUIRE(depth.width == 5);
    REQUIRE(depth.height == 3);
    CHECK(depth.pixels[7] == 2.5f);
    CHECK(depth.pixels[14] == 0.125f);
    CHECK(std::isinf(depth.pixels[0]));

    // The PFM payload is written bottom-to-top: the first data row holds y=2.
    std::ifstream raw(dir + "/d.pfm", std::ios::binary);
    std::string header;
    std::getline(raw, header);
    CHECK(header == "Pf");
    std::getline(raw, header);  // dims
    std::getline(raw, header);  // scale
    CHECK(header == "-1.0");
    float first_row[5];
    raw.read(reinterpret_cast<char*>(first_row), sizeof first_row);
    CHECK(first_row[4] == 0.125f);  // (x=4, y=2)
    CHECK(first_row[0] == 1e30f);
}
