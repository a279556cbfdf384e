#pragma once

#include <optional>
#include <vector>

#include <json.hpp>

#include "bodygen/body_model.hpp"

namespace bodygen {

struct FitConfig {
    int max_iterations = 200;
    double convergence_tol = 1e-10;   // stop when the objective decrease falls below
    double step_damping = 1e-3;       // initial Levenberg damping
    double joint_weight = 1.0;
    double vertex_weight = 0.1;
    double pose_prior_weight = 1e-4;  // pulls local axis-angles toward zero

    void validate() const;
};

// fit-model index -> target index pairings, both for joints and (optionally)
// vertices. Explicit rather than inferred.
struct CorrespondenceMap {
    std::vector<std::pair<int, int>> joints;
    std::vector<std::pair<int, int>> vertices;
};

// Pairs joints of the two models whose bone names match.
CorrespondenceMap correspond_joints_by_name(const LbsBodyModel& fit_model, const LbsBodyModel& target_model);

// World-space position demanded for one fit-model joint.
struct JointTarget {
    int joint = 0;
    Vec3 position = Vec3::Zero();
};

struct PoseFitResult {
    PoseFrame theta;
    double objective = 0.0;
    double mpjpe = 0.0;  // mean joint distance against the targets
    int iterations = 0;
    bool converged = false;
};

struct SequenceFitReport {
    Eigen::VectorXd beta;
    std::vector<PoseFitResult> frames;
};

// Stage 1: shape at T-pose. Joint positions are linear in beta there, so the
// least-squares system is solved in closed form with Tikhonov damping 1e-8.
Eigen::VectorXd fit_shape_tpose(const LbsBodyModel& target_model, const Eigen::VectorXd& target_beta,
                                const LbsBodyModel& fit_model, const CorrespondenceMap& map,
                                const FitConfig& cfg);

// Stage 2: pose with shape fixed. Damped Gauss-Newton over root translation
// plus a 3-parameter axis-angle increment per bone, re-linearized each step.
PoseFitResult fit_pose_frame(const LbsBodyModel& fit_model, const Eigen::VectorXd& beta_fixed,
                             const std::vector<JointTarget>& targets, const PoseFrame& init_pose,
                             const FitConfig& cfg);

// Per-frame fits warm-started from the previous frame. Frame 0 starts from
// the T-pose unless an initial pose (e.g. the source motion mapped onto the
// fit skeleton) is supplied.
SequenceFitReport fit_pose_sequence(const LbsBodyModel& fit_model, const Eigen::VectorXd& beta_fixed,
                                    const std::vector<std::vector<JointTarget>>& target_track,
                                    const FitConfig& cfg, const PoseFrame* init_frame0 = nullptr);

// ---- exposed linearizations (also used by the derivative checks) -----------

// d(corresponding joints)/d(beta) at T-pose; rows are 3 per pairing.
Eigen::MatrixXd shape_joint_jacobian(const LbsBodyModel& fit_model, const std::vector<std::pair<int, int>>& joints);

// d(selected joints)/d(root translation, per-bone axis-angle increments) at
// the given pose. Columns: [t(3) | bone 0 (3) | bone 1 (3) | ...].
Eigen::MatrixXd pose_joint_jacobian(const Skeleton& skeleton, const PoseFrame& pose,
                                    const std::vector<int>& joint_ids);

// Applies the increment the Jacobian above is taken against.
PoseFrame apply_pose_increment(const PoseFrame& pose, const Eigen::VectorXd& delta);

void to_json(nlohmann::json& j, const PoseFitResult& r);
void to_json(nlohmann::json& j, const SequenceFitReport& r);

}  // namespace bodygen
