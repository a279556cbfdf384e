#include "bodygen/skeleton.hpp"

#include <stdexcept>

namespace bodygen {

int Skeleton::find_bone(const std::string& name) const {
    for (int i = 0; i < bone_count(); ++i) {
        if (bones[static_cast<std::size_t>(i)].name == name) return i;
    }
    return -1;
}

std::vector<Vec3> Skeleton::tpose_joints() const {
    std::vector<Vec3> joints(bones.size());
    for (std::size_t i = 0; i < bones.size(); ++i) {
        const Bone& b = bones[i];
        joints[i] = b.parent < 0 ? b.rest_offset : joints[static_cast<std::size_t>(b.parent)] + b.rest_offset;
    }
    return joints;
}

double Skeleton::pelvis_height() const {
    return tpose_joints()[static_cast<std::size_t>(pelvis_index)].z();
}

void Skeleton::validate() const {
    if (bones.empty()) throw std::invalid_argument("Skeleton: no bones");
    int roots = 0;
    for (std::size_t i = 0; i < bones.size(); ++i) {
        const Bone& b = bones[i];
        if (b.parent < 0) {
            ++roots;
        } else if (b.parent >= static_cast<int>(i)) {
            throw std::invalid_argument("Skeleton: bones not in topological order at '" + b.name + "'");
        }
        if (!b.rest_offset.allFinite()) {
            throw std::invalid_argument("Skeleton: non-finite rest offset at '" + b.name + "'");
        }
    }
    if (roots != 1) throw std::invalid_argument("Skeleton: expected exactly one root");
    if (pelvis_index < 0 || pelvis_index >= bone_count()) {
        throw std::invalid_argument("Skeleton: pelvis index out of range");
    }
    if (!(pelvis_height() > 0.0)) {
        throw std::invalid_argument("Skeleton: pelvis joint must sit above the ground in T-pose");
    }
}

namespace {

void check_pose(const Skeleton& skeleton, const PoseFrame& pose) {
    if (static_cast<int>(pose.local_rotations.size()) != skeleton.bone_count()) {
        throw std::invalid_argument("PoseFrame: rotation count does not match skeleton bone count");
    }
}

}  // namespace

std::vector<Rotation> fk_global_rotations(const Skeleton& skeleton, const PoseFrame& pose) {
    check_pose(skeleton, pose);
    std::vector<Rotation> globals(pose.local_rotations.size());
    for (std::size_t i = 0; i < globals.size(); ++i) {
        const int p = skeleton.bones[i].parent;
        globals[i] = p < 0 ? pose.local_rotations[i]
                           : globals[static_cast<std::size_t>(p)] * pose.local_rotations[i];
    }
    return globals;
}

std::vector<Vec3> fk_joint_positions(const Skeleton& skeleton, const PoseFrame& pose,
                                     const std::vector<Rotation>& globals) {
    check_pose(skeleton, pose);
    std::vector<Vec3> joints(globals.size());
    for (std::size_t i = 0; i < joints.size(); ++i) {
        const Bone& b = skeleton.bones[i];
        if (b.parent < 0) {
            joints[i] = pose.root_translation + b.rest_offset;
        } else {
            const auto p = static_cast<std::size_t>(b.parent);
            joints[i] = joints[p] + globals[p].rotate(b.rest_offset);
        }
    }
    return joints;
}

std::vector<Vec3> fk_joint_positions(const Skeleton& skeleton, const PoseFrame& pose) {
    return fk_joint_positions(skeleton, pose, fk_global_rotations(skeleton, pose));
}

void to_json(nlohmann::json& j, const Skeleton& s) {
    j = nlohmann::json::object();
    auto& bones = j["bones"] = nlohmann::json::array();
    for (const Bone& b : s.bones) {
        nlohmann::json bj;
        bj["name"] = b.name;
        if (b.parent < 0) {
            bj["parent"] = nullptr;
        } else {
            bj["parent"] = b.parent;
        }
        bj["rest_offset"] = {b.rest_offset.x(), b.rest_offset.y(), b.rest_offset.z()};
        bones.push_back(std::move(bj));
    }
    j["pelvis_index"] = s.pelvis_index;
}

void from_json(const nlohmann::json& j, Skeleton& s) {
    s.bones.clear();
    for (const auto& bj : j.at("bones")) {
        Bone b;
        b.name = bj.at("name").get<std::string>();
        const auto& parent = bj.at("parent");
        b.parent = parent.is_null() ? -1 : parent.get<int>();
        const auto& off = bj.at("rest_offset");
        b.rest_offset = Vec3(off.at(0).get<double>(), off.at(1).get<double>(), off.at(2).get<double>());
        s.bones.push_back(std::move(b));
    }
    s.pelvis_index = j.at("pelvis_index").get<int>();
    s.validate();
}

void to_json(nlohmann::json& j, const PoseFrame& f) {
    j = nlohmann::json::object();
    j["root_translation"] = {f.root_translation.x(), f.root_translation.y(), f.root_translation.z()};
    auto& rots = j["local_rotations"] = nlohmann::json::array();
    for (const Rotation& r : f.local_rotations) rots.push_back({r.w(), r.x(), r.y(), r.z()});
}

void from_json(const nlohmann::json& j, PoseFrame& f) {
    const auto& t = j.at("root_translation");
    f.root_translation = Vec3(t.at(0).get<double>(), t.at(1).get<double>(), t.at(2).get<double>());
    f.local_rotations.clear();
    for (const auto& q : j.at("local_rotations")) {
        f.local_rotations.emplace_back(q.at(0).get<double>(), q.at(1).get<double>(),
                                       q.at(2).get<double>(), q.at(3).get<double>());
    }
}

}  // namespace bodygen
