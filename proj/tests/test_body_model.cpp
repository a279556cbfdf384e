#include <doctest.h>

#include "bodygen/body_model.hpp"
#include "oracles.hpp"

using namespace bodygen;

namespace {

LbsBodyModel small_model(std::uint64_t seed = 1, int shapes = 4) {
    MiniBodyOptions opt;
    opt.target_vertices = 120;
    opt.shape_count = shapes;
    opt.seed = seed;
    return builtin_body_24(opt);
}

// Reference LBS using the matrix-chain oracle and the recursion oracle.
Eigen::MatrixXd reference_lbs(const LbsBodyModel& model, const BodyParams& params) {
    const Eigen::MatrixXd shaped = shaped_template(model, params.beta);
    const std::vector<Vec3> rest = regress_joints(model, shaped);
    const Skeleton skel = shaped_skeleton(model, params.beta);
    const auto globals = oracle::matrix_chain_globals(skel, params.theta);
    const auto posed = oracle::recursive_joint_positions(skel, params.theta);
    Eigen::MatrixXd out(model.vertex_count(), 3);
    for (int v = 0; v < model.vertex_count(); ++v) {
        Vec3 acc = Vec3::Zero();
        for (int j = 0; j < model.joint_count(); ++j) {
            const double w = model.skinning_weights(v, j);
            const auto ji = static_cast<std::size_t>(j);
            acc += w * (globals[ji] * (Vec3(shaped.row(v).transpose()) - rest[ji]) + posed[ji]);
        }
        out.row(v) = acc.transpose();
    }
    return out;
}

}  // namespace

TEST_CASE("builtin bodies validate and expose the expected joint counts") {
    const LbsBodyModel m24 = builtin_body_24();
    const LbsBodyModel m21 = builtin_body_21();
    CHECK(m24.joint_count() == 24);
    CHECK(m21.joint_count() == 21);
    CHECK(m24.vertex_count() >= 50);
    CHECK(m24.vertex_count() <= 2000);
    CHECK(m24.skeleton.pelvis_height() > 0.0);
    CHECK(m21.skeleton.find_bone("head") == -1);
    CHECK(m21.skeleton.find_bone("l_hand") == -1);
    CHECK(m24.skeleton.find_bone("head") >= 0);
}

TEST_CASE("shaped_template: zero, basis, and linearity") {
    const LbsBodyModel m = small_model();
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(m.shape_count());
    CHECK((shaped_template(m, zero) - m.template_vertices).norm() == 0.0);

    for (int k = 0; k < m.shape_count(); ++k) {
        Eigen::VectorXd ek = Eigen::VectorXd::Zero(m.shape_count());
        ek[k] = 1.0;
        const Eigen::MatrixXd expected = m.template_vertices + m.shape_blendshapes[static_cast<std::size_t>(k)];
        CHECK((shaped_template(m, ek) - expected).norm() < 1e-12);
    }

    Rng rng(41);
    Eigen::VectorXd a(m.shape_count()), b(m.shape_count());
    for (int k = 0; k < m.shape_count(); ++k) {
        a[k] = rng.uniform(-1, 1);
        b[k] = rng.uniform(-1, 1);
    }
    const Eigen::MatrixXd lhs = shaped_template(m, a + b);
    const Eigen::MatrixXd rhs = shaped_template(m, a) + shaped_template(m, b) - m.template_vertices;
    CHECK((lhs - rhs).norm() < 1e-12);

    CHECK_THROWS_AS(shaped_template(m, Eigen::VectorXd::Zero(m.shape_count() + 1)), std::invalid_argument);
}

TEST_CASE("regress_joints selection, mean, and oracle") {
    LbsBodyModel m = small_model();

    SUBCASE("one-hot row selects the vertex") {
        // Builtin regressor rows are one-hot at the core vertices.
        const auto joints = regress_joints(m, m.template_vertices);
        for (int j = 0; j < m.joint_count(); ++j) {
            CHECK((joints[static_cast<std::size_t>(j)] - Vec3(m.template_vertices.row(j).transpose())).norm() ==
                  0.0);
        }
    }

    SUBCASE("uniform row is the centroid") {
        m.joint_regressor.row(0).setConstant(1.0 / m.vertex_count());
        const auto joints = regress_joints(m, m.template_vertices);
        const Vec3 centroid = m.template_vertices.colwise().mean().transpose();
        CHECK((joints[0] - centroid).norm() < 1e-12);
    }

    SUBCASE("random regressor matches the double-loop oracle") {
        Rng rng(42);
        for (int j = 0; j < m.joint_count(); ++j) {
            double sum = 0;
            for (int v = 0; v < m.vertex_count(); ++v) {
                m.joint_regressor(j, v) = rng.uniform();
                sum += m.joint_regressor(j, v);
            }
            m.joint_regressor.row(j) /= sum;
        }
        const auto joints = regress_joints(m, m.template_vertices);
        for (int j = 0; j < m.joint_count(); ++j) {
            Vec3 expected = Vec3::Zero();
            for (int v = 0; v < m.vertex_count(); ++v) {
                expected += m.joint_regressor(j, v) * Vec3(m.template_vertices.row(v).transpose());
            }
            CHECK((joints[static_cast<std::size_t>(j)] - expected).norm() < 1e-12);
        }
    }

    CHECK_THROWS_AS(regress_joints(m, Eigen::MatrixXd::Zero(3, 3)), std::invalid_argument);
}

TEST_CASE("lbs_forward at rest reproduces the template plus root translation") {
    const LbsBodyModel m = small_model();
    BodyParams params;
    params.beta = Eigen::VectorXd::Zero(m.shape_count());
    params.theta = PoseFrame::rest(m.joint_count());
    params.theta.root_translation = Vec3(0.5, -1.0, 0.25);
    const LbsResult result = lbs_forward(m, params);
    for (int v = 0; v < m.vertex_count(); ++v) {
        const Vec3 expected = Vec3(m.template_vertices.row(v).transpose()) + params.theta.root_translation;
        CHECK((Vec3(result.vertices.row(v).transpose()) - expected).norm() < 1e-12);
    }
}

TEST_CASE("root rotation rotates all vertices rigidly") {
    const LbsBodyModel m = small_model();
    BodyParams params;
    params.beta = Eigen::VectorXd::Zero(m.shape_count());
    params.theta = PoseFrame::rest(m.joint_count());
    const Rotation r = Rotation::from_axis_angle(Vec3(1, 1, 0.3).normalized(), 1.2);
    params.theta.local_rotations[0] = r;

    const LbsResult result = lbs_forward(m, params);
    // The whole body is rigid under a root-only rotation: every vertex spins
    // about the root joint.
    const Vec3 pivot = m.skeleton.tpose_joints()[0];
    for (int v = 0; v < m.vertex_count(); ++v) {
        const Vec3 rest = m.template_vertices.row(v).transpose();
        const Vec3 expected = r.rotate(rest - pivot) + pivot;
        CHECK((Vec3(result.vertices.row(v).transpose()) - expected).norm() < 1e-9);
    }
}

TEST_CASE("lbs_forward matches the reference oracle on random poses and shapes") {
    Rng rng(43);
    for (int trial = 0; trial < 8; ++trial) {
        const LbsBodyModel m = small_model(100 + static_cast<std::uint64_t>(trial));
        BodyParams params;
        params.beta = sample_shape(rng, m.shape_count(), 0.6);
        params.theta = oracle::random_pose(rng, m.skeleton, 0.8);
        const LbsResult result = lbs_forward(m, params);
        const Eigen::MatrixXd expected = reference_lbs(m, params);
        CHECK((result.vertices - expected).cwiseAbs().maxCoeff() < 1e-9);

        const Skeleton shaped = shaped_skeleton(m, params.beta);
        const auto posed = fk_joint_positions(shaped, params.theta);
        for (int j = 0; j < m.joint_count(); ++j) {
            CHECK((result.joints[static_cast<std::size_t>(j)] - posed[static_cast<std::size_t>(j)]).norm() == 0.0);
        }
    }
}

TEST_CASE("lbs_forward is linear in beta at fixed theta") {
    Rng rng(44);
    const LbsBodyModel m = small_model();
    const PoseFrame theta = oracle::random_pose(rng, m.skeleton, 0.7);
    Eigen::VectorXd b0 = sample_shape(rng, m.shape_count(), 0.5);
    Eigen::VectorXd b1 = sample_shape(rng, m.shape_count(), 0.5);

    const auto at = [&](const Eigen::VectorXd& beta) {
        BodyParams p;
        p.beta = beta;
        p.theta = theta;
        return lbs_forward(m, p).vertices;
    };
    // Midpoint collinearity: f((a+b)/2) == (f(a)+f(b))/2 for linear maps.
    const Eigen::MatrixXd mid = at(0.5 * (b0 + b1));
    const Eigen::MatrixXd avg = 0.5 * (at(b0) + at(b1));
    CHECK((mid - avg).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("posed vertices stay within per-axis bounds of their rigid images") {
    Rng rng(45);
    const LbsBodyModel m = small_model();
    BodyParams params;
    params.beta = sample_shape(rng, m.shape_count(), 0.5);
    params.theta = oracle::random_pose(rng, m.skeleton, 0.9);

    const Eigen::MatrixXd shaped = shaped_template(m, params.beta);
    const std::vector<Vec3> rest = regress_joints(m, shaped);
    const Skeleton skel = shaped_skeleton(m, params.beta);
    const auto globals = fk_global_rotations(skel, params.theta);
    const auto posed = fk_joint_positions(skel, params.theta, globals);
    const LbsResult result = lbs_forward(m, params);

    for (int v = 0; v < m.vertex_count(); ++v) {
        CHECK(std::abs(m.skinning_weights.row(v).sum() - 1.0) < 1e-9);
        CHECK(m.skinning_weights.row(v).minCoeff() >= 0.0);
        Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
        Vec3 hi = -lo;
        for (int j = 0; j < m.joint_count(); ++j) {
            if (m.skinning_weights(v, j) == 0.0) continue;
            const auto ji = static_cast<std::size_t>(j);
            const Vec3 image = globals[ji].rotate(Vec3(shaped.row(v).transpose()) - rest[ji]) + posed[ji];
            lo = lo.cwiseMin(image);
            hi = hi.cwiseMax(image);
        }
        const Vec3 p = result.vertices.row(v).transpose();
        for (int axis = 0; axis < 3; ++axis) {
            CHECK(p[axis] >= lo[axis] - 1e-9);
            CHECK(p[axis] <= hi[axis] + 1e-9);
        }
    }
}

TEST_CASE("bind_attachment nearest-vertex rule") {
    const LbsBodyModel m = small_model();

    SUBCASE("coincident vertex binds with zero offset") {
        Eigen::MatrixXd attach(1, 3);
        attach.row(0) = m.template_vertices.row(7);
        const AttachmentBinding binding = bind_attachment(m, attach);
        CHECK(binding.entries[0].body_vertex == 7);
        CHECK(binding.entries[0].rest_offset.norm() == 0.0);
    }

    SUBCASE("ties break toward the lower index") {
        LbsBodyModel tiny = m;
        tiny.template_vertices.row(0) = Eigen::RowVector3d(5.0, 0.0, 0.0);
        tiny.template_vertices.row(1) = Eigen::RowVector3d(7.0, 0.0, 0.0);
        Eigen::MatrixXd attach(1, 3);
        attach.row(0) = Eigen::RowVector3d(6.0, 0.0, 0.0);  // equidistant from 0 and 1
        const AttachmentBinding binding = bind_attachment(tiny, attach);
        CHECK(binding.entries[0].body_vertex == 0);
    }

    SUBCASE("random cloud matches the exhaustive scan") {
        Rng rng(46);
        Eigen::MatrixXd attach(40, 3);
        for (int i = 0; i < 40; ++i) {
            attach.row(i) = Eigen::RowVector3d(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(0, 2));
        }
        const AttachmentBinding binding = bind_attachment(m, attach);
        for (int i = 0; i < 40; ++i) {
            int best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (int v = 0; v < m.vertex_count(); ++v) {
                const double d = (attach.row(i) - m.template_vertices.row(v)).norm();
                if (d < best_d) {
                    best_d = d;
                    best = v;
                }
            }
            CHECK(binding.entries[static_cast<std::size_t>(i)].body_vertex == best);
        }
    }

    CHECK_THROWS_AS(bind_attachment(m, Eigen::MatrixXd(0, 3)), std::invalid_argument);
}

TEST_CASE("deform_attachment follows the host") {
    Rng rng(47);
    const LbsBodyModel m = small_model();
    Eigen::MatrixXd attach(10, 3);
    for (int i = 0; i < 10; ++i) {
        attach.row(i) = m.template_vertices.row(3 * i + 2) + Eigen::RowVector3d(0.02, -0.01, 0.03);
    }
    const AttachmentBinding binding = bind_attachment(m, attach);

    SUBCASE("rest pose with zero shape leaves the attachment unchanged") {
        BodyParams params;
        params.beta = Eigen::VectorXd::Zero(m.shape_count());
        params.theta = PoseFrame::rest(m.joint_count());
        const Eigen::MatrixXd out = deform_attachment(m, binding, params);
        CHECK((out - attach).cwiseAbs().maxCoeff() < 1e-12);
    }

    SUBCASE("rigid root rotation carries the attachment along") {
        BodyParams params;
        params.beta = Eigen::VectorXd::Zero(m.shape_count());
        params.theta = PoseFrame::rest(m.joint_count());
        const Rotation r = Rotation::from_axis_angle(Vec3::UnitZ(), 0.8);
        params.theta.local_rotations[0] = r;
        const Eigen::MatrixXd out = deform_attachment(m, binding, params);
        const Vec3 pivot = m.skeleton.tpose_joints()[0];
        for (int i = 0; i < 10; ++i) {
            const Vec3 expected = r.rotate(Vec3(attach.row(i).transpose()) - pivot) + pivot;
            CHECK((Vec3(out.row(i).transpose()) - expected).norm() < 1e-9);
        }
    }

    SUBCASE("shape basis displaces the attachment by the host displacement") {
        for (int k = 0; k < m.shape_count(); ++k) {
            BodyParams params;
            params.beta = Eigen::VectorXd::Zero(m.shape_count());
            params.beta[k] = 1.0;
            params.theta = PoseFrame::rest(m.joint_count());
            const Eigen::MatrixXd out = deform_attachment(m, binding, params);
            for (std::size_t i = 0; i < binding.entries.size(); ++i) {
                const int host = binding.entries[i].body_vertex;
                const Vec3 host_disp = m.shape_blendshapes[static_cast<std::size_t>(k)].row(host).transpose();
                const Vec3 expected = Vec3(attach.row(static_cast<Eigen::Index>(i)).transpose()) + host_disp;
                // T-pose skinning of the shaped rest is the shaped rest itself.
                CHECK((Vec3(out.row(static_cast<Eigen::Index>(i)).transpose()) - expected).norm() < 1e-9);
            }
        }
    }

    SUBCASE("zero-offset binding reproduces the host vertex trajectory exactly") {
        Eigen::MatrixXd on_host(5, 3);
        for (int i = 0; i < 5; ++i) on_host.row(i) = m.template_vertices.row(11 * i + 3);
        const AttachmentBinding exact = bind_attachment(m, on_host);
        BodyParams params;
        params.beta = sample_shape(rng, m.shape_count(), 0.5);
        params.theta = oracle::random_pose(rng, m.skeleton, 0.8);
        const Eigen::MatrixXd out = deform_attachment(m, exact, params);
        const LbsResult full = lbs_forward(m, params);
        for (int i = 0; i < 5; ++i) {
            CHECK((out.row(i) - full.vertices.row(exact.entries[static_cast<std::size_t>(i)].body_vertex)).norm() ==
                  0.0);
        }
    }

    SUBCASE("stale binding is rejected") {
        AttachmentBinding stale = binding;
        stale.entries[0].body_vertex = m.vertex_count() + 5;
        BodyParams params;
        params.beta = Eigen::VectorXd::Zero(m.shape_count());
        params.theta = PoseFrame::rest(m.joint_count());
        CHECK_THROWS_AS(deform_attachment(m, stale, params), std::out_of_range);
    }
}

TEST_CASE("sample_shape moments, determinism, and clamping") {
    SUBCASE("sigma zero collapses to zero") {
        Rng rng(48);
        CHECK(sample_shape(rng, 6, 0.0).norm() == 0.0);
    }
    SUBCASE("fixed seed reproduces the draw") {
        Rng a(49), b(49);
        CHECK((sample_shape(a, 8, 1.0) - sample_shape(b, 8, 1.0)).norm() == 0.0);
    }
    SUBCASE("sample mean near zero, values clamped") {
        Rng rng(50);
        const double sigma = 0.7;
        double sum = 0.0;
        const int draws = 10000;
        for (int i = 0; i < draws; ++i) {
            const Eigen::VectorXd beta = sample_shape(rng, 1, sigma);
            CHECK(std::abs(beta[0]) <= 3.0 * sigma);
            sum += beta[0];
        }
        CHECK(std::abs(sum / draws) < 0.05 * sigma);
    }
    SUBCASE("negative sigma rejected") {
        Rng rng(51);
        CHECK_THROWS_AS(sample_shape(rng, 3, -0.1), std::invalid_argument);
    }
}

TEST_CASE("model json round trip") {
    const LbsBodyModel m = small_model(7, 3);
    nlohmann::json j;
    to_json(j, m);
    LbsBodyModel back;
    from_json(j, back);
    CHECK((back.template_vertices - m.template_vertices).norm() == 0.0);
    CHECK(back.shape_count() == m.shape_count());
    CHECK((back.joint_regressor - m.joint_regressor).norm() == 0.0);
    CHECK((back.skinning_weights - m.skinning_weights).norm() == 0.0);
    CHECK(back.skeleton.bone_count() == m.skeleton.bone_count());
}

TEST_CASE("generator rejects bad options") {
    MiniBodyOptions bad;
    bad.shape_count = 1;
    CHECK_THROWS_AS(builtin_body_24(bad), std::invalid_argument);
    bad.shape_count = 11;
    CHECK_THROWS_AS(builtin_body_24(bad), std::invalid_argument);
}
