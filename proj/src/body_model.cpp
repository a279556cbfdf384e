#include "bodygen/body_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace bodygen {

void LbsBodyModel::validate() const {
    const int v = vertex_count();
    const int j = joint_count();
    if (v < j || j < 2) throw std::invalid_argument("LbsBodyModel: requires V >= J >= 2");
    if (template_vertices.cols() != 3) throw std::invalid_argument("LbsBodyModel: template must be V x 3");
    if (joint_regressor.cols() != v) throw std::invalid_argument("LbsBodyModel: regressor must be J x V");
    if (skinning_weights.rows() != v || skinning_weights.cols() != j) {
        throw std::invalid_argument("LbsBodyModel: skinning weights must be V x J");
    }
    skeleton.validate();
    if (skeleton.bone_count() != j) throw std::invalid_argument("LbsBodyModel: skeleton/joint count mismatch");
    for (const auto& field : shape_blendshapes) {
        if (field.rows() != v || field.cols() != 3) {
            throw std::invalid_argument("LbsBodyModel: blendshape field must be V x 3");
        }
    }
    const auto check_rows = [](const Eigen::MatrixXd& m, const char* what) {
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            if (m.row(r).minCoeff() < 0.0) {
                throw std::invalid_argument(std::string("LbsBodyModel: negative weight in ") + what);
            }
            if (std::abs(m.row(r).sum() - 1.0) > 1e-9) {
                throw std::invalid_argument(std::string("LbsBodyModel: row of ") + what + " does not sum to 1");
            }
        }
    };
    check_rows(joint_regressor, "joint_regressor");
    check_rows(skinning_weights, "skinning_weights");
}

Eigen::MatrixXd shaped_template(const LbsBodyModel& model, const Eigen::VectorXd& beta) {
    if (beta.size() != model.shape_count()) {
        throw std::invalid_argument("shaped_template: beta dimension does not match model");
    }
    Eigen::MatrixXd out = model.template_vertices;
    for (int k = 0; k < model.shape_count(); ++k) {
        out += beta[k] * model.shape_blendshapes[static_cast<std::size_t>(k)];
    }
    return out;
}

std::vector<Vec3> regress_joints(const LbsBodyModel& model, const Eigen::MatrixXd& vertices) {
    if (vertices.rows() != model.vertex_count() || vertices.cols() != 3) {
        throw std::invalid_argument("regress_joints: vertex matrix must be V x 3");
    }
    const Eigen::MatrixXd j = model.joint_regressor * vertices;  // J x 3
    std::vector<Vec3> joints(static_cast<std::size_t>(j.rows()));
    for (Eigen::Index r = 0; r < j.rows(); ++r) joints[static_cast<std::size_t>(r)] = j.row(r).transpose();
    return joints;
}

Skeleton shaped_skeleton(const LbsBodyModel& model, const Eigen::VectorXd& beta) {
    const std::vector<Vec3> joints = regress_joints(model, shaped_template(model, beta));
    Skeleton skel = model.skeleton;
    for (std::size_t i = 0; i < skel.bones.size(); ++i) {
        Bone& b = skel.bones[i];
        b.rest_offset = b.parent < 0 ? joints[i] : joints[i] - joints[static_cast<std::size_t>(b.parent)];
    }
    return skel;
}

LbsResult lbs_forward(const LbsBodyModel& model, const BodyParams& params) {
    const Eigen::MatrixXd shaped = shaped_template(model, params.beta);
    const std::vector<Vec3> rest_joints = regress_joints(model, shaped);
    const Skeleton skel = shaped_skeleton(model, params.beta);

    const std::vector<Rotation> globals = fk_global_rotations(skel, params.theta);
    const std::vector<Vec3> posed_joints = fk_joint_positions(skel, params.theta, globals);

    const int v_count = model.vertex_count();
    const int j_count = model.joint_count();
    Eigen::MatrixXd out(v_count, 3);
    std::vector<Mat3> rot(static_cast<std::size_t>(j_count));
    for (int j = 0; j < j_count; ++j) rot[static_cast<std::size_t>(j)] = globals[static_cast<std::size_t>(j)].to_matrix();

    for (int v = 0; v < v_count; ++v) {
        const Vec3 rest = shaped.row(v).transpose();
        Vec3 acc = Vec3::Zero();
        for (int j = 0; j < j_count; ++j) {
            const double w = model.skinning_weights(v, j);
            if (w == 0.0) continue;
            const auto ji = static_cast<std::size_t>(j);
            acc += w * (rot[ji] * (rest - rest_joints[ji]) + posed_joints[ji]);
        }
        out.row(v) = acc.transpose();
    }
    return {std::move(out), posed_joints};
}

AttachmentBinding bind_attachment(const LbsBodyModel& model, const Eigen::MatrixXd& attachment_vertices) {
    if (attachment_vertices.rows() == 0) throw std::invalid_argument("bind_attachment: empty attachment");
    if (attachment_vertices.cols() != 3) throw std::invalid_argument("bind_attachment: vertices must be N x 3");

    AttachmentBinding binding;
    binding.entries.reserve(static_cast<std::size_t>(attachment_vertices.rows()));
    for (Eigen::Index a = 0; a < attachment_vertices.rows(); ++a) {
        const Vec3 p = attachment_vertices.row(a).transpose();
        int best = 0;
        double best_d2 = std::numeric_limits<double>::infinity();
        for (int v = 0; v < model.vertex_count(); ++v) {
            const double d2 = (p - Vec3(model.template_vertices.row(v).transpose())).squaredNorm();
            if (d2 < best_d2) {  // strict: ties keep the lower index
                best_d2 = d2;
                best = v;
            }
        }
        binding.entries.push_back({best, p - Vec3(model.template_vertices.row(best).transpose())});
    }
    return binding;
}

Eigen::MatrixXd deform_attachment(const LbsBodyModel& model, const AttachmentBinding& binding,
                                  const BodyParams& params) {
    const Eigen::MatrixXd shaped = shaped_template(model, params.beta);
    const std::vector<Vec3> rest_joints = regress_joints(model, shaped);
    const Skeleton skel = shaped_skeleton(model, params.beta);
    const std::vector<Rotation> globals = fk_global_rotations(skel, params.theta);
    const std::vector<Vec3> posed_joints = fk_joint_positions(skel, params.theta, globals);

    // Same arithmetic path as lbs_forward so a zero-offset binding tracks its
    // host vertex bit for bit.
    std::vector<Mat3> rot(static_cast<std::size_t>(model.joint_count()));
    for (int j = 0; j < model.joint_count(); ++j) {
        rot[static_cast<std::size_t>(j)] = globals[static_cast<std::size_t>(j)].to_matrix();
    }

    Eigen::MatrixXd out(static_cast<Eigen::Index>(binding.entries.size()), 3);
    for (std::size_t a = 0; a < binding.entries.size(); ++a) {
        const auto& entry = binding.entries[a];
        if (entry.body_vertex < 0 || entry.body_vertex >= model.vertex_count()) {
            throw std::out_of_range("deform_attachment: stale binding index");
        }
        // Host rest position carries the host's blendshape displacement.
        const Vec3 rest = Vec3(shaped.row(entry.body_vertex).transpose()) + entry.rest_offset;
        Vec3 acc = Vec3::Zero();
        for (int j = 0; j < model.joint_count(); ++j) {
            const double w = model.skinning_weights(entry.body_vertex, j);
            if (w == 0.0) continue;
            const auto ji = static_cast<std::size_t>(j);
            acc += w * (rot[ji] * (rest - rest_joints[ji]) + posed_joints[ji]);
        }
        out.row(static_cast<Eigen::Index>(a)) = acc.transpose();
    }
    return out;
}

Eigen::VectorXd sample_shape(Rng& rng, int dimensions, double sigma) {
    if (sigma < 0.0) throw std::invalid_argument("sample_shape: sigma must be non-negative");
    Eigen::VectorXd beta(dimensions);
    for (int k = 0; k < dimensions; ++k) {
        beta[k] = std::clamp(sigma * rng.normal(), -3.0 * sigma, 3.0 * sigma);
    }
    return beta;
}

// ---- procedural generator -------------------------------------------------

std::vector<MiniBodyJoint> mini_joint_table_24() {
    return {
        {"pelvis", -1, {0.00, 0.00, 0.95}},
        {"spine1", 0, {0.00, 0.00, 0.12}},
        {"spine2", 1, {0.00, 0.00, 0.12}},
        {"spine3", 2, {0.00, 0.00, 0.12}},
        {"neck", 3, {0.00, 0.00, 0.13}},
        {"head", 4, {0.00, 0.00, 0.14}},
        {"l_collar", 3, {0.06, 0.00, 0.07}},
        {"l_shoulder", 6, {0.12, 0.00, 0.02}},
        {"l_elbow", 7, {0.26, 0.00, 0.00}},
        {"l_wrist", 8, {0.25, 0.00, 0.00}},
        {"l_hand", 9, {0.09, 0.00, 0.00}},
        {"r_collar", 3, {-0.06, 0.00, 0.07}},
        {"r_shoulder", 11, {-0.12, 0.00, 0.02}},
        {"r_elbow", 12, {-0.26, 0.00, 0.00}},
        {"r_wrist", 13, {-0.25, 0.00, 0.00}},
        {"r_hand", 14, {-0.09, 0.00, 0.00}},
        {"l_hip", 0, {0.09, 0.00, -0.06}},
        {"l_knee", 16, {0.01, 0.00, -0.42}},
        {"l_ankle", 17, {0.00, 0.00, -0.40}},
        {"l_foot", 18, {0.00, 0.12, -0.05}},
        {"r_hip", 0, {-0.09, 0.00, -0.06}},
        {"r_knee", 20, {-0.01, 0.00, -0.42}},
        {"r_ankle", 21, {0.00, 0.00, -0.40}},
        {"r_foot", 22, {0.00, 0.12, -0.05}},
    };
}

std::vector<MiniBodyJoint> mini_joint_table_21() {
    // Same humanoid without head and hands; parents reindexed.
    const std::vector<MiniBodyJoint> full = mini_joint_table_24();
    std::vector<MiniBodyJoint> out;
    std::vector<int> remap(full.size(), -1);
    for (std::size_t i = 0; i < full.size(); ++i) {
        const std::string name = full[i].name;
        if (name == "head" || name == "l_hand" || name == "r_hand") continue;
        remap[i] = static_cast<int>(out.size());
        MiniBodyJoint j = full[i];
        if (j.parent >= 0) j.parent = remap[static_cast<std::size_t>(j.parent)];
        out.push_back(j);
    }
    return out;
}

LbsBodyModel make_mini_body(const std::vector<MiniBodyJoint>& joints, const MiniBodyOptions& options) {
    const int j_count = static_cast<int>(joints.size());
    if (j_count < 2) throw std::invalid_argument("make_mini_body: need at least 2 joints");
    if (options.shape_count < 2 || options.shape_count > 10) {
        throw std::invalid_argument("make_mini_body: shape_count must be in [2, 10]");
    }
    if (options.ring_segments < 3) throw std::invalid_argument("make_mini_body: need >= 3 ring segments");

    LbsBodyModel model;
    model.skeleton.pelvis_index = 0;
    for (const MiniBodyJoint& j : joints) {
        model.skeleton.bones.push_back({j.name, j.parent, j.offset});
    }
    const std::vector<Vec3> joint_pos = model.skeleton.tpose_joints();

    const int bone_count = j_count - 1;  // segments to parents, root excluded
    const int target = std::clamp(options.target_vertices, 50, 2000);
    const int per_bone = std::max(
        1, static_cast<int>(std::lround(static_cast<double>(target - j_count) /
                                        (static_cast<double>(bone_count) * options.ring_segments))));

    struct RingVertex {
        Vec3 position;
        int bone;      // child joint index of the segment
        double along;  // fraction from parent toward child
    };
    std::vector<RingVertex> rings;
    Rng rng(options.seed);

    for (int c = 1; c < j_count; ++c) {
        const int p = joints[static_cast<std::size_t>(c)].parent;
        const Vec3 a = joint_pos[static_cast<std::size_t>(p)];
        const Vec3 b = joint_pos[static_cast<std::size_t>(c)];
        Vec3 axis = b - a;
        double len = axis.norm();
        if (len < 1e-9) {
            axis = Vec3::UnitZ();
            len = 1e-9;
        } else {
            axis /= len;
        }
        const double radius = std::clamp(0.45 * len, 0.03, 0.13);
        Vec3 n1 = axis.cross(Vec3::UnitX());
        if (n1.norm() < 1e-6) n1 = axis.cross(Vec3::UnitY());
        n1.normalize();
        const Vec3 n2 = axis.cross(n1);
        const double phase = rng.uniform(0.0, 6.283185307179586);
        for (int r = 0; r < per_bone; ++r) {
            const double f = (r + 0.5) / per_bone;
            const Vec3 center = a + f * (b - a);
            for (int s = 0; s < options.ring_segments; ++s) {
                const double theta = phase + 6.283185307179586 * s / options.ring_segments;
                rings.push_back({center + radius * (std::cos(theta) * n1 + std::sin(theta) * n2), c, f});
            }
        }
    }

    const int v_count = j_count + static_cast<int>(rings.size());
    model.template_vertices.resize(v_count, 3);
    model.skinning_weights = Eigen::MatrixXd::Zero(v_count, j_count);
    model.joint_regressor = Eigen::MatrixXd::Zero(j_count, v_count);

    // Core vertices sit exactly on the joints; the regressor selects them, so
    // regressed joints are exact and shape moves the skeleton through them.
    for (int j = 0; j < j_count; ++j) {
        model.template_vertices.row(j) = joint_pos[static_cast<std::size_t>(j)].transpose();
        model.joint_regressor(j, j) = 1.0;
        const int p = joints[static_cast<std::size_t>(j)].parent;
        if (p < 0) {
            model.skinning_weights(j, j) = 1.0;
        } else {
            model.skinning_weights(j, j) = 0.6;
            model.skinning_weights(j, p) = 0.4;
        }
    }
    for (std::size_t r = 0; r < rings.size(); ++r) {
        const int row = j_count + static_cast<int>(r);
        model.template_vertices.row(row) = rings[r].position.transpose();
        const int c = rings[r].bone;
        const int p = joints[static_cast<std::size_t>(c)].parent;
        const double wc = 0.7 * rings[r].along;
        model.skinning_weights(row, c) = wc;
        model.skinning_weights(row, p) = 1.0 - wc;
    }

    // Blendshape 0: stature (z stretch). Blendshape 1: girth (radial in xy).
    // Remaining fields: smooth seeded low-frequency displacement.
    model.shape_blendshapes.assign(static_cast<std::size_t>(options.shape_count),
                                   Eigen::MatrixXd::Zero(v_count, 3));
    for (int v = 0; v < v_count; ++v) {
        const Vec3 p = model.template_vertices.row(v).transpose();
        model.shape_blendshapes[0](v, 2) = 0.10 * p.z();
        model.shape_blendshapes[1](v, 0) = 0.12 * p.x();
        model.shape_blendshapes[1](v, 1) = 0.12 * p.y();
    }
    for (int k = 2; k < options.shape_count; ++k) {
        Vec3 freq[3];
        double phase[3];
        for (int c = 0; c < 3; ++c) {
            freq[c] = Vec3(rng.uniform(-2.5, 2.5), rng.uniform(-2.5, 2.5), rng.uniform(-2.5, 2.5));
            phase[c] = rng.uniform(0.0, 6.283185307179586);
        }
        auto& field = model.shape_blendshapes[static_cast<std::size_t>(k)];
        for (int v = 0; v < v_count; ++v) {
            const Vec3 p = model.template_vertices.row(v).transpose();
            for (int c = 0; c < 3; ++c) field(v, c) = 0.05 * std::sin(freq[c].dot(p) + phase[c]);
        }
    }

    // The fields' effect on the joints (their values at the core vertices) is
    // orthogonalized so the shape-to-joint system stays well conditioned; the
    // closed-form shape fit then inverts it far below its damping floor. The
    // pelvis core keeps x = y = 0 so yaw placements commute with FK.
    const int core_dims = 3 * j_count;
    Eigen::MatrixXd core(core_dims, options.shape_count);
    for (int k = 0; k < options.shape_count; ++k) {
        for (int j = 0; j < j_count; ++j) {
            core.block<3, 1>(3 * j, k) = model.shape_blendshapes[static_cast<std::size_t>(k)].row(j).transpose();
        }
    }
    core(0, 1) = core(1, 1) = 0.0;  // pelvis x, y under girth (already zero on axis)
    for (int k = 2; k < options.shape_count; ++k) {
        Eigen::VectorXd col = core.col(k);
        col[0] = col[1] = 0.0;
        for (int prev = 0; prev < k; ++prev) {
            const Eigen::VectorXd p = core.col(prev);
            const double denom = p.squaredNorm();
            if (denom > 1e-18) col -= (p.dot(col) / denom) * p;
        }
        if (col.norm() < 1e-9) {
            // Degenerate draw: fall back to a canonical direction.
            col.setZero();
            col[2 + 3 * (k % j_count)] = 1.0;
            col[0] = col[1] = 0.0;
        }
        core.col(k) = 0.25 * col.normalized();
    }
    for (int k = 1; k < options.shape_count; ++k) {
        auto& field = model.shape_blendshapes[static_cast<std::size_t>(k)];
        for (int j = 0; j < j_count; ++j) {
            field.row(j) = core.block<3, 1>(3 * j, k).transpose();
        }
    }

    model.validate();
    return model;
}

LbsBodyModel builtin_body_24(const MiniBodyOptions& options) {
    return make_mini_body(mini_joint_table_24(), options);
}

LbsBodyModel builtin_body_21(const MiniBodyOptions& options) {
    return make_mini_body(mini_joint_table_21(), options);
}

// ---- serialization ---------------------------------------------------------

namespace {

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
    const auto rows = static_cast<Eigen::Index>(j.size());
    if (rows == 0) return {};
    const auto cols = static_cast<Eigen::Index>(j.at(0).size());
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = j.at(r).at(c).get<double>();
    }
    return m;
}

}  // namespace

void to_json(nlohmann::json& j, const LbsBodyModel& m) {
    j = nlohmann::json::object();
    j["template_vertices"] = matrix_to_json(m.template_vertices);
    auto& shapes = j["shape_blendshapes"] = nlohmann::json::array();
    for (const auto& field : m.shape_blendshapes) shapes.push_back(matrix_to_json(field));
    j["joint_regressor"] = matrix_to_json(m.joint_regressor);
    j["skinning_weights"] = matrix_to_json(m.skinning_weights);
    to_json(j["skeleton"], m.skeleton);
}

void from_json(const nlohmann::json& j, LbsBodyModel& m) {
    m.template_vertices = matrix_from_json(j.at("template_vertices"));
    m.shape_blendshapes.clear();
    for (const auto& field : j.at("shape_blendshapes")) m.shape_blendshapes.push_back(matrix_from_json(field));
    m.joint_regressor = matrix_from_json(j.at("joint_regressor"));
    m.skinning_weights = matrix_from_json(j.at("skinning_weights"));
    from_json(j.at("skeleton"), m.skeleton);
    m.validate();
}

}  // namespace bodygen
