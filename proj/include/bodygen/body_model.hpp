#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "bodygen/motion.hpp"
#include "bodygen/rng.hpp"
#include "bodygen/skeleton.hpp"

namespace bodygen {

// Miniature linear-blend-skinning body: template mesh, shape blendshape
// fields, joint regressor, skinning weights, and the driving skeleton.
struct LbsBodyModel {
    Eigen::MatrixXd template_vertices;            // V x 3, T-pose
    std::vector<Eigen::MatrixXd> shape_blendshapes;  // K fields, each V x 3
    Eigen::MatrixXd joint_regressor;              // J x V, rows sum to 1
    Eigen::MatrixXd skinning_weights;             // V x J, rows sum to 1
    Skeleton skeleton;                            // J bones

    int vertex_count() const { return static_cast<int>(template_vertices.rows()); }
    int joint_count() const { return static_cast<int>(joint_regressor.rows()); }
    int shape_count() const { return static_cast<int>(shape_blendshapes.size()); }

    void validate() const;
};

struct BodyParams {
    Eigen::VectorXd beta;
    PoseFrame theta;
};

// One entry per attachment vertex: host body vertex and the rest offset
// from it (T-pose frame).
struct AttachmentBinding {
    struct Entry {
        int body_vertex = 0;
        Vec3 rest_offset = Vec3::Zero();
    };
    std::vector<Entry> entries;
};

struct LbsResult {
    Eigen::MatrixXd vertices;  // V x 3, posed
    std::vector<Vec3> joints;  // posed joint positions
};

// Template plus the linear blendshape combination: v_i = t_i + sum_k beta_k * S_k,i.
Eigen::MatrixXd shaped_template(const LbsBodyModel& model, const Eigen::VectorXd& beta);

// joints = regressor * vertices.
std::vector<Vec3> regress_joints(const LbsBodyModel& model, const Eigen::MatrixXd& vertices);

// Skeleton whose rest offsets come from the joints regressed at the shaped
// T-pose, so body shape propagates into bone lengths.
Skeleton shaped_skeleton(const LbsBodyModel& model, const Eigen::VectorXd& beta);

// Full LBS forward pass: shape, regress, FK, skin.
LbsResult lbs_forward(const LbsBodyModel& model, const BodyParams& params);

// Binds each attachment vertex to its nearest body template vertex
// (ties broken toward the lower index) and stores the rest offset.
AttachmentBinding bind_attachment(const LbsBodyModel& model, const Eigen::MatrixXd& attachment_vertices);

// Moves attachment vertices with their host: the host's blendshape
// displacement and skinning transforms applied to host rest + offset.
Eigen::MatrixXd deform_attachment(const LbsBodyModel& model, const AttachmentBinding& binding,
                                  const BodyParams& params);

// Zero-mean Gaussian shape coefficients clamped to [-3 sigma, 3 sigma].
Eigen::VectorXd sample_shape(Rng& rng, int dimensions, double sigma);

// ---- procedural body generator ------------------------------------------

struct MiniBodyJoint {
    const char* name;
    int parent;
    Vec3 offset;  // from parent joint, T-pose
};

struct MiniBodyOptions {
    int target_vertices = 300;   // best effort, clamped to [50, 2000]
    int ring_segments = 6;
    int shape_count = 6;         // in [2, 10]
    std::uint64_t seed = 20240901;
};

// Builds a capsule-ish body around the given joint table: one exact core
// vertex per joint (one-hot regressor rows) plus rings along each bone.
LbsBodyModel make_mini_body(const std::vector<MiniBodyJoint>& joints, const MiniBodyOptions& options);

// 24-joint humanoid table and its 21-joint reduction (head and hands
// removed), emulating a cross-topology fitting pair.
std::vector<MiniBodyJoint> mini_joint_table_24();
std::vector<MiniBodyJoint> mini_joint_table_21();

LbsBodyModel builtin_body_24(const MiniBodyOptions& options = {});
LbsBodyModel builtin_body_21(const MiniBodyOptions& options = {});

void to_json(nlohmann::json& j, const LbsBodyModel& m);
void from_json(const nlohmann::json& j, LbsBodyModel& m);

}  // namespace bodygen
