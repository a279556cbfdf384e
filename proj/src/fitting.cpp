#include "bodygen/fitting.hpp"

#include <cmath>
#include <stdexcept>

namespace bodygen {

void FitConfig::validate() const {
    if (max_iterations < 1) throw std::invalid_argument("FitConfig: max_iterations must be >= 1");
    if (convergence_tol < 0 || step_damping < 0 || joint_weight < 0 || vertex_weight < 0 ||
        pose_prior_weight < 0) {
        throw std::invalid_argument("FitConfig: weights and tolerances must be non-negative");
    }
}

CorrespondenceMap correspond_joints_by_name(const LbsBodyModel& fit_model, const LbsBodyModel& target_model) {
    CorrespondenceMap map;
    for (int f = 0; f < fit_model.skeleton.bone_count(); ++f) {
        const int t = target_model.skeleton.find_bone(fit_model.skeleton.bones[static_cast<std::size_t>(f)].name);
        if (t >= 0) map.joints.emplace_back(f, t);
    }
    return map;
}

Eigen::MatrixXd shape_joint_jacobian(const LbsBodyModel& fit_model,
                                     const std::vector<std::pair<int, int>>& joints) {
    const int rows = 3 * static_cast<int>(joints.size());
    Eigen::MatrixXd jac(rows, fit_model.shape_count());
    for (int k = 0; k < fit_model.shape_count(); ++k) {
        // Joint displacement per unit beta_k is regressor * blendshape field.
        const Eigen::MatrixXd dj = fit_model.joint_regressor * fit_model.shape_blendshapes[static_cast<std::size_t>(k)];
        for (std::size_t c = 0; c < joints.size(); ++c) {
            jac.block<3, 1>(3 * static_cast<Eigen::Index>(c), k) = dj.row(joints[c].first).transpose();
        }
    }
    return jac;
}

Eigen::VectorXd fit_shape_tpose(const LbsBodyModel& target_model, const Eigen::VectorXd& target_beta,
                                const LbsBodyModel& fit_model, const CorrespondenceMap& map,
                                const FitConfig& cfg) {
    cfg.validate();
    if (map.joints.empty()) throw std::invalid_argument("fit_shape_tpose: no joint correspondences");
    for (const auto& [f, t] : map.joints) {
        if (f < 0 || f >= fit_model.joint_count() || t < 0 || t >= target_model.joint_count()) {
            throw std::invalid_argument("fit_shape_tpose: joint correspondence out of range");
        }
    }
    for (const auto& [f, t] : map.vertices) {
        if (f < 0 || f >= fit_model.vertex_count() || t < 0 || t >= target_model.vertex_count()) {
            throw std::invalid_argument("fit_shape_tpose: vertex correspondence out of range");
        }
    }

    const Eigen::MatrixXd target_shaped = shaped_template(target_model, target_beta);
    const std::vector<Vec3> target_joints = regress_joints(target_model, target_shaped);
    const std::vector<Vec3> base_joints = regress_joints(fit_model, fit_model.template_vertices);

    const int k_dim = fit_model.shape_count();
    const int rows = 3 * static_cast<int>(map.joints.size() + map.vertices.size());
    Eigen::MatrixXd a(rows, k_dim);
    Eigen::VectorXd b(rows);

    const double wj = std::sqrt(cfg.joint_weight);
    const Eigen::MatrixXd joint_jac = shape_joint_jacobian(fit_model, map.joints);
    for (std::size_t c = 0; c < map.joints.size(); ++c) {
        const auto r = 3 * static_cast<Eigen::Index>(c);
        a.middleRows<3>(r) = wj * joint_jac.middleRows<3>(r);
        b.segment<3>(r) = wj * (target_joints[static_cast<std::size_t>(map.joints[c].second)] -
                                base_joints[static_cast<std::size_t>(map.joints[c].first)]);
    }
    const double wv = std::sqrt(cfg.vertex_weight);
    const auto joint_rows = 3 * static_cast<Eigen::Index>(map.joints.size());
    for (std::size_t c = 0; c < map.vertices.size(); ++c) {
        const auto r = joint_rows + 3 * static_cast<Eigen::Index>(c);
        for (int k = 0; k < k_dim; ++k) {
            a.block<3, 1>(r, k) =
                wv * fit_model.shape_blendshapes[static_cast<std::size_t>(k)].row(map.vertices[c].first).transpose();
        }
        b.segment<3>(r) = wv * (Vec3(target_shaped.row(map.vertices[c].second).transpose()) -
                                Vec3(fit_model.template_vertices.row(map.vertices[c].first).transpose()));
    }

    const Eigen::MatrixXd normal = a.transpose() * a + 1e-8 * Eigen::MatrixXd::Identity(k_dim, k_dim);
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(normal);
    if (ldlt.info() != Eigen::Success) throw std::runtime_error("fit_shape_tpose: singular normal equations");
    const Eigen::VectorXd beta = ldlt.solve(a.transpose() * b);
    if (!beta.allFinite()) throw std::runtime_error("fit_shape_tpose: non-finite solution");
    return beta;
}

Eigen::MatrixXd pose_joint_jacobian(const Skeleton& skeleton, const PoseFrame& pose,
                                    const std::vector<int>& joint_ids) {
    const int n_bones = skeleton.bone_count();
    const std::vector<Rotation> globals = fk_global_rotations(skeleton, pose);
    const std::vector<Vec3> joints = fk_joint_positions(skeleton, pose, globals);

    // ancestor[b][j]: bone b's local rotation moves joint j (strict descendants).
    std::vector<std::vector<char>> moves(static_cast<std::size_t>(n_bones),
                                         std::vector<char>(static_cast<std::size_t>(n_bones), 0));
    for (int j = 0; j < n_bones; ++j) {
        int p = skeleton.bones[static_cast<std::size_t>(j)].parent;
        while (p >= 0) {
            moves[static_cast<std::size_t>(p)][static_cast<std::size_t>(j)] = 1;
            p = skeleton.bones[static_cast<std::size_t>(p)].parent;
        }
    }

    const auto skew = [](const Vec3& v) {
        Mat3 s;
        s << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
        return s;
    };

    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(3 * static_cast<Eigen::Index>(joint_ids.size()),
                                                3 + 3 * static_cast<Eigen::Index>(n_bones));
    for (std::size_t c = 0; c < joint_ids.size(); ++c) {
        const int j = joint_ids[c];
        if (j < 0 || j >= n_bones) throw std::invalid_argument("pose_joint_jacobian: joint id out of range");
        const auto row = 3 * static_cast<Eigen::Index>(c);
        jac.block<3, 3>(row, 0) = Mat3::Identity();  // root translation
        for (int b = 0; b < n_bones; ++b) {
            if (!moves[static_cast<std::size_t>(b)][static_cast<std::size_t>(j)]) continue;
            const int p = skeleton.bones[static_cast<std::size_t>(b)].parent;
            const Mat3 parent_rot = p < 0 ? Mat3::Identity() : globals[static_cast<std::size_t>(p)].to_matrix();
            const Vec3 lever = joints[static_cast<std::size_t>(j)] - joints[static_cast<std::size_t>(b)];
            jac.block<3, 3>(row, 3 + 3 * static_cast<Eigen::Index>(b)) = -skew(lever) * parent_rot;
        }
    }
    return jac;
}

PoseFrame apply_pose_increment(const PoseFrame& pose, const Eigen::VectorXd& delta) {
    const auto n_bones = static_cast<Eigen::Index>(pose.local_rotations.size());
    if (delta.size() != 3 + 3 * n_bones) throw std::invalid_argument("apply_pose_increment: bad delta size");
    PoseFrame out = pose;
    out.root_translation += delta.segment<3>(0);
    for (Eigen::Index b = 0; b < n_bones; ++b) {
        out.local_rotations[static_cast<std::size_t>(b)] =
            Rotation::from_rotation_vector(delta.segment<3>(3 + 3 * b)) *
            pose.local_rotations[static_cast<std::size_t>(b)];
    }
    return out;
}

namespace {

// d/d(delta) log(exp(delta) * R) at delta = 0: the inverse left Jacobian of
// SO(3) evaluated at aa = log(R). Exactness here keeps the damped steps true
// descent directions for the prior term.
Mat3 inverse_left_jacobian(const Vec3& aa) {
    const double angle = aa.norm();
    Mat3 skew;
    skew << 0, -aa.z(), aa.y(), aa.z(), 0, -aa.x(), -aa.y(), aa.x(), 0;
    double coeff;
    if (angle < 1e-4) {
        coeff = 1.0 / 12.0 + angle * angle / 720.0;
    } else {
        const double s = std::sin(angle);
        const double c = std::cos(angle);
        coeff = (1.0 - 0.5 * angle * s / (1.0 - c)) / (angle * angle);
    }
    return Mat3::Identity() - 0.5 * skew + coeff * (skew * skew);
}

double pose_objective(const Skeleton& skeleton, const PoseFrame& pose,
                      const std::vector<JointTarget>& targets, const FitConfig& cfg, double* mpjpe_out) {
    const std::vector<Vec3> joints = fk_joint_positions(skeleton, pose);
    double data = 0.0;
    double dist_sum = 0.0;
    for (const JointTarget& t : targets) {
        const double d2 = (t.position - joints[static_cast<std::size_t>(t.joint)]).squaredNorm();
        data += d2;
        dist_sum += std::sqrt(d2);
    }
    double prior = 0.0;
    for (const Rotation& r : pose.local_rotations) prior += r.to_rotation_vector().squaredNorm();
    if (mpjpe_out) *mpjpe_out = targets.empty() ? 0.0 : dist_sum / static_cast<double>(targets.size());
    return cfg.joint_weight * data + cfg.pose_prior_weight * prior;
}

}  // namespace

PoseFitResult fit_pose_frame(const LbsBodyModel& fit_model, const Eigen::VectorXd& beta_fixed,
                             const std::vector<JointTarget>& targets, const PoseFrame& init_pose,
                             const FitConfig& cfg) {
    cfg.validate();
    if (targets.empty()) throw std::invalid_argument("fit_pose_frame: no joint targets");
    const Skeleton skeleton = shaped_skeleton(fit_model, beta_fixed);
    if (static_cast<int>(init_pose.local_rotations.size()) != skeleton.bone_count()) {
        throw std::invalid_argument("fit_pose_frame: init pose does not match model");
    }
    for (const JointTarget& t : targets) {
        if (t.joint < 0 || t.joint >= skeleton.bone_count()) {
            throw std::invalid_argument("fit_pose_frame: target joint out of range");
        }
        if (!t.position.allFinite()) throw std::invalid_argument("fit_pose_frame: non-finite target");
    }

    std::vector<int> joint_ids;
    joint_ids.reserve(targets.size());
    for (const JointTarget& t : targets) joint_ids.push_back(t.joint);

    const int n_bones = skeleton.bone_count();
    const Eigen::Index n_params = 3 + 3 * static_cast<Eigen::Index>(n_bones);

    PoseFitResult result;
    result.theta = init_pose;
    double objective = pose_objective(skeleton, result.theta, targets, cfg, &result.mpjpe);
    if (!std::isfinite(objective)) throw std::runtime_error("fit_pose_frame: non-finite objective");

    double mu = cfg.step_damping;
    double nu = 2.0;  // rejection growth factor, doubled on every rejection
    int consecutive_rejects = 0;
    const double wj = std::sqrt(cfg.joint_weight);
    const double wp = std::sqrt(cfg.pose_prior_weight);

    for (int iter = 0; iter < cfg.max_iterations; ++iter) {
        const std::vector<Vec3> joints = fk_joint_positions(skeleton, result.theta);
        const Eigen::MatrixXd joint_jac = pose_joint_jacobian(skeleton, result.theta, joint_ids);

        Eigen::MatrixXd jtj = Eigen::MatrixXd::Zero(n_params, n_params);
        Eigen::VectorXd jtr = Eigen::VectorXd::Zero(n_params);
        for (std::size_t c = 0; c < targets.size(); ++c) {
            const Eigen::MatrixXd block = wj * joint_jac.middleRows<3>(3 * static_cast<Eigen::Index>(c));
            const Vec3 residual =
                wj * (targets[c].position - joints[static_cast<std::size_t>(targets[c].joint)]);
            jtj.noalias() += block.transpose() * block;
            jtr.noalias() += block.transpose() * residual;
        }
        // Prior rows: residual -sqrt(wp) * aa_b; the exact log-map Jacobian
        // keeps the system positive definite and the step a descent direction.
        for (int b = 0; b < n_bones; ++b) {
            const Eigen::Index col = 3 + 3 * static_cast<Eigen::Index>(b);
            const Vec3 aa = result.theta.local_rotations[static_cast<std::size_t>(b)].to_rotation_vector();
            const Mat3 dlog = inverse_left_jacobian(aa);
            jtj.block<3, 3>(col, col) += (wp * wp) * (dlog.transpose() * dlog);
            jtr.segment<3>(col) -= (wp * wp) * (dlog.transpose() * aa);
        }

        bool accepted = false;
        while (!accepted) {
            Eigen::MatrixXd damped = jtj;
            damped.diagonal().array() += mu;
            const Eigen::VectorXd delta = Eigen::LDLT<Eigen::MatrixXd>(damped).solve(jtr);
            // Gauss-Newton model decrease; non-positive means we are at a
            // stationary point up to round-off, so stop without stepping.
            const double predicted_decrease = jtr.dot(delta);
            if (!(predicted_decrease > cfg.convergence_tol)) {
                result.converged = true;
                break;
            }
            const PoseFrame trial = apply_pose_increment(result.theta, delta);
            double trial_mpjpe = 0.0;
            const double trial_obj = pose_objective(skeleton, trial, targets, cfg, &trial_mpjpe);
            if (!std::isfinite(trial_obj)) throw std::runtime_error("fit_pose_frame: non-finite objective");

            if (trial_obj <= objective) {
                const double decrease = objective - trial_obj;
                result.theta = trial;
                result.mpjpe = trial_mpjpe;
                objective = trial_obj;
                mu = std::max(mu / 3.0, 1e-12);
                nu = 2.0;
                consecutive_rejects = 0;
                accepted = true;
                if (decrease < cfg.convergence_tol) {
                    result.converged = true;
                }
            } else {
                mu *= nu;
                nu *= 2.0;
                if (++consecutive_rejects >= 10) {
                    throw std::runtime_error("fit_pose_frame: diverged (10 consecutive rejected steps)");
                }
            }
        }
        result.iterations = iter + 1;
        if (result.converged) break;
    }
    result.objective = objective;
    return result;
}

SequenceFitReport fit_pose_sequence(const LbsBodyModel& fit_model, const Eigen::VectorXd& beta_fixed,
                                    const std::vector<std::vector<JointTarget>>& target_track,
                                    const FitConfig& cfg, const PoseFrame* init_frame0) {
    if (target_track.empty()) throw std::invalid_argument("fit_pose_sequence: empty track");
    SequenceFitReport report;
    report.beta = beta_fixed;
    report.frames.reserve(target_track.size());
    PoseFrame warm = init_frame0 ? *init_frame0 : PoseFrame::rest(fit_model.joint_count());
    for (const auto& targets : target_track) {
        PoseFitResult frame = fit_pose_frame(fit_model, beta_fixed, targets, warm, cfg);
        warm = frame.theta;
        report.frames.push_back(std::move(frame));
    }
    return report;
}

void to_json(nlohmann::json& j, const PoseFitResult& r) {
    j = nlohmann::json::object();
    j["residual_mpjpe"] = r.mpjpe;
    j["objective"] = r.objective;
    j["iterations"] = r.iterations;
    j["converged"] = r.converged;
}

void to_json(nlohmann::json& j, const SequenceFitReport& r) {
    j = nlohmann::json::object();
    j["beta"] = std::vector<double>(r.beta.data(), r.beta.data() + r.beta.size());
    auto& frames = j["frames"] = nlohmann::json::array();
    for (const auto& f : r.frames) {
        nlohmann::json fj;
        to_json(fj, f);
        frames.push_back(std::move(fj));
    }
}

}  // namespace bodygen
