#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "bodygen/rotation.hpp"

namespace bodygen {

struct Bone {
    std::string name;
    int parent = -1;  // -1 = root
    Vec3 rest_offset = Vec3::Zero();  // offset from parent joint in T-pose
};

// Bone hierarchy in topological order (parent index < child index, one root).
struct Skeleton {
    std::vector<Bone> bones;
    int pelvis_index = 0;

    int bone_count() const { return static_cast<int>(bones.size()); }
    int find_bone(const std::string& name) const;  // -1 when absent

    // Joint positions with identity locals and zero root translation.
    std::vector<Vec3> tpose_joints() const;
    double pelvis_height() const;  // z of the pelvis joint in T-pose

    // Throws std::invalid_argument on any structural violation.
    void validate() const;
};

struct PoseFrame {
    Vec3 root_translation = Vec3::Zero();
    std::vector<Rotation> local_rotations;  // parent-space, one per bone

    static PoseFrame rest(int bone_count) {
        PoseFrame f;
        f.local_rotations.assign(static_cast<std::size_t>(bone_count), Rotation::identity());
        return f;
    }
};

// Model-space rotations: global[i] = global[parent(i)] * local[i], root passes through.
std::vector<Rotation> fk_global_rotations(const Skeleton& skeleton, const PoseFrame& pose);

// Joint positions: joint[i] = joint[parent(i)] + global[parent(i)] * rest_offset[i];
// the root joint sits at root_translation + rest_offset[root].
std::vector<Vec3> fk_joint_positions(const Skeleton& skeleton, const PoseFrame& pose);
std::vector<Vec3> fk_joint_positions(const Skeleton& skeleton, const PoseFrame& pose,
                                     const std::vector<Rotation>& globals);

void to_json(nlohmann::json& j, const Skeleton& s);
void from_json(const nlohmann::json& j, Skeleton& s);
void to_json(nlohmann::json& j, const PoseFrame& f);
void from_json(const nlohmann::json& j, PoseFrame& f);

}  // namespace bodygen
