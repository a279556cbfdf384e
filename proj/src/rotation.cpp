#include "bodygen/rotation.hpp"

#include <cmath>
#include <stdexcept>

namespace bodygen {

Rotation::Rotation(double w, double x, double y, double z) : w_(w), x_(x), y_(y), z_(z) {
    const double n2 = w_ * w_ + x_ * x_ + y_ * y_ + z_ * z_;
    if (!(n2 > 1e-24) || !std::isfinite(n2)) {
        throw std::invalid_argument("Rotation: quaternion norm too small or non-finite");
    }
    const double inv = 1.0 / std::sqrt(n2);
    w_ *= inv;
    x_ *= inv;
    y_ *= inv;
    z_ *= inv;
}

Rotation Rotation::from_axis_angle(const Vec3& axis, double angle_rad) {
    const double n = axis.norm();
    if (!(n > 0.0)) throw std::invalid_argument("Rotation::from_axis_angle: zero axis");
    const double half = 0.5 * angle_rad;
    const double s = std::sin(half) / n;
    return {std::cos(half), axis.x() * s, axis.y() * s, axis.z() * s};
}

Rotation Rotation::from_rotation_vector(const Vec3& rv) {
    const double angle = rv.norm();
    if (angle < 1e-12) {
        // First-order expansion near identity keeps the log/exp pair stable.
        return {1.0, 0.5 * rv.x(), 0.5 * rv.y(), 0.5 * rv.z()};
    }
    return from_axis_angle(rv, angle);
}

Rotation Rotation::from_matrix(const Mat3& m) {
    // Shepperd's method: pick the largest diagonal combination.
    const double tr = m.trace();
    double w, x, y, z;
    if (tr > 0.0) {
        double s = std::sqrt(tr + 1.0) * 2.0;
        w = 0.25 * s;
        x = (m(2, 1) - m(1, 2)) / s;
        y = (m(0, 2) - m(2, 0)) / s;
        z = (m(1, 0) - m(0, 1)) / s;
    } else if (m(0, 0) > m(1, 1) && m(0, 0) > m(2, 2)) {
        double s = std::sqrt(1.0 + m(0, 0) - m(1, 1) - m(2, 2)) * 2.0;
        w = (m(2, 1) - m(1, 2)) / s;
        x = 0.25 * s;
        y = (m(0, 1) + m(1, 0)) / s;
        z = (m(0, 2) + m(2, 0)) / s;
    } else if (m(1, 1) > m(2, 2)) {
        double s = std::sqrt(1.0 + m(1, 1) - m(0, 0) - m(2, 2)) * 2.0;
        w = (m(0, 2) - m(2, 0)) / s;
        x = (m(0, 1) + m(1, 0)) / s;
        y = 0.25 * s;
        z = (m(1, 2) + m(2, 1)) / s;
    } else {
        double s = std::sqrt(1.0 + m(2, 2) - m(0, 0) - m(1, 1)) * 2.0;
        w = (m(1, 0) - m(0, 1)) / s;
        x = (m(0, 2) + m(2, 0)) / s;
        y = (m(1, 2) + m(2, 1)) / s;
        z = 0.25 * s;
    }
    return {w, x, y, z};
}

Vec3 Rotation::rotate(const Vec3& v) const {
    // v' = v + 2w(q_v x v) + 2(q_v x (q_v x v))
    const Vec3 qv(x_, y_, z_);
    const Vec3 t = 2.0 * qv.cross(v);
    return v + w_ * t + qv.cross(t);
}

Mat3 Rotation::to_matrix() const {
    const double xx = x_ * x_, yy = y_ * y_, zz = z_ * z_;
    const double xy = x_ * y_, xz = x_ * z_, yz = y_ * z_;
    const double wx = w_ * x_, wy = w_ * y_, wz = w_ * z_;
    Mat3 m;
    m << 1 - 2 * (yy + zz), 2 * (xy - wz), 2 * (xz + wy),
         2 * (xy + wz), 1 - 2 * (xx + zz), 2 * (yz - wx),
         2 * (xz - wy), 2 * (yz + wx), 1 - 2 * (xx + yy);
    return m;
}

Vec3 Rotation::to_rotation_vector() const {
    // Map to the hemisphere with w >= 0 so the angle lands in [0, pi].
    double w = w_;
    Vec3 qv(x_, y_, z_);
    if (w < 0.0) {
        w = -w;
        qv = -qv;
    }
    const double sin_half = qv.norm();
    if (sin_half < 1e-12) return 2.0 * qv;
    const double angle = 2.0 * std::atan2(sin_half, w);
    return qv * (angle / sin_half);
}

double Rotation::angle() const {
    const double sin_half = std::sqrt(x_ * x_ + y_ * y_ + z_ * z_);
    return 2.0 * std::atan2(sin_half, std::abs(w_));
}

double Rotation::angle_to(const Rotation& other) const {
    const double d = std::abs(w_ * other.w_ + x_ * other.x_ + y_ * other.y_ + z_ * other.z_);
    return 2.0 * std::acos(std::min(1.0, d));
}

bool Rotation::approx_equal(const Rotation& other, double tol) const {
    const auto norm4 = [](double w, double x, double y, double z) {
        return std::sqrt(w * w + x * x + y * y + z * z);
    };
    const double diff = norm4(w_ - other.w_, x_ - other.x_, y_ - other.y_, z_ - other.z_);
    const double sum = norm4(w_ + other.w_, x_ + other.x_, y_ + other.y_, z_ + other.z_);
    return std::min(diff, sum) <= tol;
}

Rotation operator*(const Rotation& a, const Rotation& b) {
    return {a.w_ * b.w_ - a.x_ * b.x_ - a.y_ * b.y_ - a.z_ * b.z_,
            a.w_ * b.x_ + a.x_ * b.w_ + a.y_ * b.z_ - a.z_ * b.y_,
            a.w_ * b.y_ - a.x_ * b.z_ + a.y_ * b.w_ + a.z_ * b.x_,
            a.w_ * b.z_ + a.x_ * b.y_ - a.y_ * b.x_ + a.z_ * b.w_};
}

}  // namespace bodygen
