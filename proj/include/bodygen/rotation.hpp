#pragma once

#include <Eigen/Dense>

namespace bodygen {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Unit quaternion acting on column vectors. Renormalized after every
// construction and composition; q and -q compare equal.
class Rotation {
  public:
    Rotation() = default;
    Rotation(double w, double x, double y, double z);

    static Rotation identity() { return {}; }
    static Rotation from_axis_angle(const Vec3& axis, double angle_rad);
    // Exponential map: rotation vector (axis * angle) -> rotation.
    static Rotation from_rotation_vector(const Vec3& rv);
    static Rotation from_matrix(const Mat3& m);

    double w() const { return w_; }
    double x() const { return x_; }
    double y() const { return y_; }
    double z() const { return z_; }

    Rotation inverse() const { return Rotation(w_, -x_, -y_, -z_, NoNormalize{}); }

    Vec3 rotate(const Vec3& v) const;
    Mat3 to_matrix() const;
    // Logarithm map: rotation -> axis * angle, angle in [0, pi].
    Vec3 to_rotation_vector() const;
    double angle() const;

    // Geodesic distance in [0, pi], sign-insensitive.
    double angle_to(const Rotation& other) const;
    bool approx_equal(const Rotation& other, double tol = 1e-9) const;

    // Hamilton product: (a * b) applies b first, then a.
    friend Rotation operator*(const Rotation& a, const Rotation& b);

  private:
    struct NoNormalize {};
    Rotation(double w, double x, double y, double z, NoNormalize) : w_(w), x_(x), y_(y), z_(z) {}

    double w_ = 1.0, x_ = 0.0, y_ = 0.0, z_ = 0.0;
};

// Named per the kinematics contract: applies b, then a.
inline Rotation compose_rotations(const Rotation& a, const Rotation& b) { return a * b; }

// Rigid transform (rotation then translation) on column vectors.
struct Transform {
    Rotation rotation;
    Vec3 translation = Vec3::Zero();

    static Transform identity() { return {}; }

    Vec3 apply(const Vec3& p) const { return rotation.rotate(p) + translation; }

    Transform inverse() const {
        const Rotation inv = rotation.inverse();
        return {inv, -inv.rotate(translation)};
    }

    friend Transform operator*(const Transform& a, const Transform& b) {
        return {a.rotation * b.rotation, a.rotation.rotate(b.translation) + a.translation};
    }
};

}  // namespace bodygen
