#include <doctest.h>

#include "bodygen/motion.hpp"
#include "oracles.hpp"

using namespace bodygen;

namespace {

constexpr double kPi = 3.14159265358979323846;

BoneMap identity_map(const Skeleton& s) {
    BoneMap map;
    for (int i = 0; i < s.bone_count(); ++i) map.pairs.emplace_back(i, i);
    return map;
}

MotionClip random_clip(Rng& rng, const Skeleton& skel, int frames, double max_angle = 1.2) {
    MotionClip clip;
    clip.fps = 30.0;
    clip.frames.push_back(PoseFrame::rest(skel.bone_count()));
    for (int f = 1; f < frames; ++f) {
        clip.frames.push_back(oracle::random_pose(rng, skel, max_angle));
    }
    return clip;
}

}  // namespace

TEST_CASE("relative_motion identities") {
    Rng rng(21);
    for (int i = 0; i < 30; ++i) {
        const Rotation g = Rotation::from_axis_angle(Vec3(rng.normal(), rng.normal(), rng.normal()).normalized(),
                                                     rng.uniform(-3, 3));
        const Rotation t = Rotation::from_axis_angle(Vec3(rng.normal(), rng.normal(), rng.normal()).normalized(),
                                                     rng.uniform(-3, 3));
        CHECK(relative_motion(g, g).approx_equal(Rotation::identity(), 1e-15));
        CHECK(relative_motion(g, Rotation::identity()).approx_equal(g, 1e-15));
        // Composing the relative motion back onto the T-pose recovers the input.
        CHECK(compose_rotations(relative_motion(g, t), t).approx_equal(g, 1e-9));
    }
}

TEST_CASE("scale_root_translation") {
    CHECK((scale_root_translation(Vec3(1, -2, 3), 1.3, 1.3) - Vec3(1, -2, 3)).norm() == 0.0);
    CHECK((scale_root_translation(Vec3(1, 0, 2), 1.8, 0.9) - Vec3(2, 0, 4)).norm() == 0.0);
    CHECK(scale_root_translation(Vec3::Zero(), 2.0, 0.5).norm() == 0.0);
    CHECK_THROWS_AS(scale_root_translation(Vec3(1, 0, 0), 0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(scale_root_translation(Vec3(1, 0, 0), 1.0, -2.0), std::invalid_argument);
}

TEST_CASE("retarget onto the identical skeleton is the identity on model space") {
    Rng rng(22);
    for (int trial = 0; trial < 20; ++trial) {
        const Skeleton s = oracle::random_skeleton(rng, 10);
        const MotionClip clip = random_clip(rng, s, 6);
        const MotionClip out = retarget_clip(s, clip, s, identity_map(s));
        REQUIRE(out.frame_count() == clip.frame_count());
        for (int f = 0; f < clip.frame_count(); ++f) {
            const auto fi = static_cast<std::size_t>(f);
            const auto in_globals = fk_global_rotations(s, clip.frames[fi]);
            const auto out_globals = fk_global_rotations(s, out.frames[fi]);
            for (std::size_t b = 0; b < in_globals.size(); ++b) {
                CHECK(out_globals[b].approx_equal(in_globals[b], 1e-9));
            }
            // Identical pelvis height: translation unchanged bit for bit.
            CHECK((out.frames[fi].root_translation - clip.frames[fi].root_translation).norm() == 0.0);
        }
    }
}

TEST_CASE("frame 0 retargets to an exact T-pose") {
    Rng rng(23);
    const Skeleton src = oracle::random_skeleton(rng, 9);
    Skeleton tgt = oracle::random_skeleton(rng, 9);
    const MotionClip clip = random_clip(rng, src, 5);
    BoneMap map;
    for (int i = 0; i < 9; ++i) {
        if (src.bones[static_cast<std::size_t>(i)].parent < 0) {
            map.pairs.emplace_back(i, 0);
        }
    }
    map.pairs.emplace_back(src.pelvis_index, tgt.pelvis_index);
    // Deduplicate if pelvis is the root on both sides.
    if (map.pairs.size() == 2 && map.pairs[0] == map.pairs[1]) map.pairs.pop_back();
    const MotionClip out = retarget_clip(src, clip, tgt, map);
    for (const Rotation& r : out.frames[0].local_rotations) {
        CHECK(r.w() == 1.0);
        CHECK(r.x() == 0.0);
        CHECK(r.y() == 0.0);
        CHECK(r.z() == 0.0);
    }
}

TEST_CASE("pelvis ratio 2 doubles root translations bit for bit") {
    Rng rng(24);
    const Skeleton src = oracle::random_skeleton(rng, 6);
    Skeleton tgt = src;
    // Exactly double every offset so the pelvis height ratio is exactly 2.
    for (Bone& b : tgt.bones) b.rest_offset *= 2.0;
    const MotionClip clip = random_clip(rng, src, 8);
    const MotionClip out = retarget_clip(src, clip, tgt, identity_map(src));
    for (int f = 0; f < clip.frame_count(); ++f) {
        const auto fi = static_cast<std::size_t>(f);
        const Vec3 expected = 2.0 * clip.frames[fi].root_translation;
        CHECK((out.frames[fi].root_translation - expected).norm() == 0.0);
    }
}

TEST_CASE("mapped bones land on the source's T-pose-relative rotation") {
    Rng rng(25);
    const Skeleton src = oracle::random_skeleton(rng, 12);
    // Target: flat star of 12 bones hanging off the root; bones map pairwise.
    Skeleton tgt;
    tgt.bones.push_back({"t0", -1, Vec3(0, 0, 1)});
    for (int i = 1; i < 12; ++i) {
        tgt.bones.push_back({"t" + std::to_string(i), 0,
                             Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1))});
    }
    tgt.pelvis_index = 0;
    tgt.validate();

    BoneMap map;
    map.pairs.emplace_back(0, 0);  // roots and pelvises coincide on both sides
    for (int i = 2; i < 12; i += 2) map.pairs.emplace_back(i, i);

    const MotionClip clip = random_clip(rng, src, 4);
    const MotionClip out = retarget_clip(src, clip, tgt, map);

    const auto src_tpose = fk_global_rotations(src, clip.frames[0]);
    for (int f = 0; f < clip.frame_count(); ++f) {
        const auto fi = static_cast<std::size_t>(f);
        const auto src_globals = fk_global_rotations(src, clip.frames[fi]);
        const auto out_globals = fk_global_rotations(tgt, out.frames[fi]);
        for (const auto& [s, t] : map.pairs) {
            const Rotation expected = relative_motion(src_globals[static_cast<std::size_t>(s)],
                                                      src_tpose[static_cast<std::size_t>(s)]);
            CHECK(out_globals[static_cast<std::size_t>(t)].approx_equal(expected, 1e-9));
        }
    }
}

TEST_CASE("unmapped target bones keep identity local rotations") {
    Rng rng(26);
    const Skeleton src = oracle::random_skeleton(rng, 5);
    Skeleton tgt = src;
    tgt.bones.push_back({"extra_leaf", 2, Vec3(0.1, 0.1, 0.1)});
    const MotionClip clip = random_clip(rng, src, 4);
    const MotionClip out = retarget_clip(src, clip, tgt, identity_map(src));
    for (const PoseFrame& f : out.frames) {
        CHECK(f.local_rotations.back().approx_equal(Rotation::identity(), 1e-15));
    }
}

TEST_CASE("constant source pelvis height stays constant on the target") {
    // Root = pelvis; translation moves only in the ground plane.
    Skeleton src;
    src.bones = {{"pelvis", -1, Vec3(0, 0, 1.0)}, {"leg", 0, Vec3(0, 0, -0.9)}};
    src.pelvis_index = 0;
    Skeleton tgt = src;
    tgt.bones[0].rest_offset = Vec3(0, 0, 1.6);
    tgt.bones[1].rest_offset = Vec3(0, 0, -1.4);

    MotionClip clip;
    clip.fps = 30;
    for (int f = 0; f < 10; ++f) {
        PoseFrame frame = PoseFrame::rest(2);
        frame.root_translation = Vec3(0.1 * f, 0.05 * f, 0.0);
        if (f > 0) frame.local_rotations[1] = Rotation::from_axis_angle(Vec3::UnitX(), 0.1 * f);
        clip.frames.push_back(frame);
    }
    const MotionClip out = retarget_clip(src, clip, tgt, identity_map(src));
    const double z0 = fk_joint_positions(tgt, out.frames[0])[0].z();
    for (const PoseFrame& f : out.frames) {
        CHECK(fk_joint_positions(tgt, f)[0].z() == doctest::Approx(z0).epsilon(1e-12));
    }
}

TEST_CASE("to_world_pose basics") {
    Rng rng(27);
    const Skeleton s = oracle::random_skeleton(rng, 7);
    const PoseFrame pose = oracle::random_pose(rng, s);
    Eigen::VectorXd beta(2);
    beta << 0.3, -0.7;

    SUBCASE("identity placement passes the pose through") {
        const WorldPose wp = to_world_pose(beta, pose, Transform::identity());
        CHECK((wp.theta_w.root_translation - pose.root_translation).norm() == 0.0);
        for (std::size_t i = 0; i < pose.local_rotations.size(); ++i) {
            CHECK(wp.theta_w.local_rotations[i].approx_equal(pose.local_rotations[i], 1e-15));
        }
        CHECK(wp.beta == beta);
    }

    SUBCASE("pure translation offsets the root only") {
        const Vec3 d(1.5, -2.0, 0.25);
        const WorldPose wp = to_world_pose(beta, pose, Transform{Rotation::identity(), d});
        CHECK((wp.theta_w.root_translation - (pose.root_translation + d)).norm() < 1e-15);
        for (std::size_t i = 0; i < pose.local_rotations.size(); ++i) {
            CHECK(wp.theta_w.local_rotations[i].approx_equal(pose.local_rotations[i], 1e-15));
        }
    }
}

TEST_CASE("to_world_pose commutes with FK") {
    Rng rng(28);
    SUBCASE("arbitrary rotations on zero-root-offset skeletons") {
        for (int trial = 0; trial < 25; ++trial) {
            const Skeleton s = oracle::random_skeleton(rng, 8, /*zero_root_offset=*/true);
            const PoseFrame pose = oracle::random_pose(rng, s);
            const Transform placement{
                Rotation::from_axis_angle(Vec3(rng.normal(), rng.normal(), rng.normal()).normalized(),
                                          rng.uniform(-kPi, kPi)),
                Vec3(rng.normal(), rng.normal(), rng.normal())};
            const WorldPose wp = to_world_pose(Eigen::VectorXd(), pose, placement);
            const auto world_joints = fk_joint_positions(s, wp.theta_w);
            const auto local_joints = fk_joint_positions(s, pose);
            for (std::size_t i = 0; i < world_joints.size(); ++i) {
                CHECK((world_joints[i] - placement.apply(local_joints[i])).norm() < 1e-9);
            }
        }
    }
    SUBCASE("90-degree yaw on a z-axis-rooted skeleton") {
        Skeleton s;
        s.bones = {{"pelvis", -1, Vec3(0, 0, 0.9)}, {"a", 0, Vec3(0.3, 0.1, 0.2)}, {"b", 1, Vec3(0, 0.4, -0.1)}};
        s.pelvis_index = 0;
        const PoseFrame pose = oracle::random_pose(rng, s);
        const Transform placement{Rotation::from_axis_angle(Vec3::UnitZ(), kPi / 2), Vec3(2, -1, 0.5)};
        const auto world_joints = fk_joint_positions(s, to_world_pose(Eigen::VectorXd(), pose, placement).theta_w);
        const auto local_joints = fk_joint_positions(s, pose);
        for (std::size_t i = 0; i < world_joints.size(); ++i) {
            CHECK((world_joints[i] - placement.apply(local_joints[i])).norm() < 1e-9);
        }
    }
}

TEST_CASE("clip and map validation errors") {
    Rng rng(29);
    const Skeleton s = oracle::random_skeleton(rng, 5);

    MotionClip bad_tpose = random_clip(rng, s, 3);
    bad_tpose.frames[0].local_rotations[2] = Rotation::from_axis_angle(Vec3::UnitX(), 0.5);
    CHECK_THROWS_AS(bad_tpose.validate(s), std::invalid_argument);

    MotionClip bad_fps = random_clip(rng, s, 3);
    bad_fps.fps = 0.0;
    CHECK_THROWS_AS(bad_fps.validate(s), std::invalid_argument);

    const MotionClip clip = random_clip(rng, s, 3);
    BoneMap not_injective;
    not_injective.pairs = {{0, 0}, {1, 0}};
    CHECK_THROWS_AS(retarget_clip(s, clip, s, not_injective), std::invalid_argument);

    CHECK_THROWS_AS(retarget_clip(s, clip, s, BoneMap{}), std::invalid_argument);

    // Clip bone count mismatch against the source skeleton.
    const Skeleton bigger = oracle::random_skeleton(rng, 6);
    CHECK_THROWS_AS(retarget_clip(bigger, clip, bigger, identity_map(bigger)), std::invalid_argument);
}

TEST_CASE("map_bones_by_name pairs shared names") {
    Rng rng(30);
    const Skeleton a = oracle::random_skeleton(rng, 6);
    Skeleton b = a;
    b.bones[4].name = "renamed";
    const BoneMap map = map_bones_by_name(a, b);
    CHECK(map.pairs.size() == 5);
}

TEST_CASE("synthesized clips start at the T-pose and are seed-deterministic") {
    Rng rng(31);
    const Skeleton s = oracle::random_skeleton(rng, 8);
    const MotionClip a = synthesize_motion_clip(s, 30.0, 40, 555);
    const MotionClip b = synthesize_motion_clip(s, 30.0, 40, 555);
    a.validate(s);
    REQUIRE(a.frame_count() == 40);
    for (int f = 0; f < 40; ++f) {
        const auto fi = static_cast<std::size_t>(f);
        CHECK((a.frames[fi].root_translation - b.frames[fi].root_translation).norm() == 0.0);
        for (std::size_t i = 0; i < a.frames[fi].local_rotations.size(); ++i) {
            CHECK(a.frames[fi].local_rotations[i].approx_equal(b.frames[fi].local_rotations[i], 1e-15));
        }
    }
    const MotionClip c = synthesize_motion_clip(s, 30.0, 40, 556);
    bool differs = false;
    for (std::size_t i = 0; i < c.frames[5].local_rotations.size() && !differs; ++i) {
        differs = !c.frames[5].local_rotations[i].approx_equal(a.frames[5].local_rotations[i], 1e-6);
    }
    CHECK(differs);
}

TEST_CASE("motion clip json round trip") {
    Rng rng(32);
    const Skeleton s = oracle::random_skeleton(rng, 5);
    const MotionClip clip = random_clip(rng, s, 4);
    nlohmann::json j;
    to_json(j, clip);
    MotionClip back;
    from_json(j, back);
    REQUIRE(back.frame_count() == clip.frame_count());
    CHECK(back.fps == clip.fps);
    for (int f = 0; f < clip.frame_count(); ++f) {
        const auto fi = static_cast<std::size_t>(f);
        CHECK((back.frames[fi].root_translation - clip.frames[fi].root_translation).norm() == 0.0);
        for (std::size_t i = 0; i < clip.frames[fi].local_rotations.size(); ++i) {
            CHECK(back.frames[fi].local_rotations[i].approx_equal(clip.frames[fi].local_rotations[i], 1e-15));
        }
    }
}
