#ifndef JFTO_SE3_HPP
#define JFTO_SE3_HPP

// SE(3)/SO(3) pose algebra on unit-quaternion + translation pairs, the
// decoupled 6D chart (x, y, z, Rx, Ry, Rz) used throughout, and the weighted
// pose distance. Everything here is pure and allocation-free.

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "jfto/errors.hpp"
#include "jfto/random.hpp"

namespace jfto {

template <typename Scalar>
using Vector3T = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using Vector6T = Eigen::Matrix<Scalar, 6, 1>;

using Vector3 = Vector3T<double>;
using Vector6 = Vector6T<double>;

// Rotation angles this close to pi are rejected as chart singularities.
inline constexpr double kChartAngleTol = 1e-6;
// Below this angle the closed forms switch to series expansions.
inline constexpr double kSmallAngle = 1e-6;

template <typename Scalar>
struct PoseT {
    Eigen::Quaternion<Scalar> rotation{Scalar(1), Scalar(0), Scalar(0), Scalar(0)};
    Vector3T<Scalar> translation{Scalar(0), Scalar(0), Scalar(0)};
};

using Pose = PoseT<double>;

// Translation/rotation balance of the weighted SE(3) distance.
struct DistanceWeights {
    double w_trans = 0.5;
};

template <typename Scalar>
PoseT<Scalar> make_pose(const Eigen::Quaternion<Scalar>& q, const Vector3T<Scalar>& t) {
    PoseT<Scalar> p;
    p.rotation = q.normalized();
    p.translation = t;
    return p;
}

template <typename Scalar>
PoseT<Scalar> identity_pose() {
    return PoseT<Scalar>{};
}

template <typename Scalar>
Eigen::Matrix<Scalar, 3, 3> hat(const Vector3T<Scalar>& v) {
    Eigen::Matrix<Scalar, 3, 3> m;
    m << Scalar(0), -v.z(), v.y(),
         v.z(), Scalar(0), -v.x(),
         -v.y(), v.x(), Scalar(0);
    return m;
}

// Rigid composition a*b (b applied first): R = Ra*Rb, t = Ra*tb + ta.
template <typename Scalar>
PoseT<Scalar> compose(const PoseT<Scalar>& a, const PoseT<Scalar>& b) {
    PoseT<Scalar> out;
    out.rotation = (a.rotation * b.rotation).normalized();
    out.translation = a.rotation * b.translation + a.translation;
    return out;
}

template <typename Scalar>
PoseT<Scalar> inverse(const PoseT<Scalar>& p) {
    PoseT<Scalar> out;
    out.rotation = p.rotation.conjugate();
    out.translation = -(out.rotation * p.translation);
    return out;
}

template <typename Scalar>
Vector3T<Scalar> transform_point(const PoseT<Scalar>& p, const Vector3T<Scalar>& x) {
    return p.rotation * x + p.translation;
}

// Axis-angle vector of a unit quaternion, canonicalized to angle in [0, pi).
// Throws ChartSingularity once the angle reaches pi - kChartAngleTol; at pi
// the axis is ambiguous and we refuse to pick one.
template <typename Scalar>
Vector3T<Scalar> log_so3(const Eigen::Quaternion<Scalar>& q_in) {
    Eigen::Quaternion<Scalar> q = q_in;
    if (q.w() < Scalar(0)) q.coeffs() = -q.coeffs();  // double cover
    const Scalar s = q.vec().norm();
    const Scalar w = q.w();
    const Scalar angle = Scalar(2) * std::atan2(s, w);
    if (angle >= Scalar(M_PI) - Scalar(kChartAngleTol))
        throw ChartSingularity("rotation angle within tolerance of pi");
    if (s < Scalar(kSmallAngle)) {
        // theta/s -> (2/w)(1 - s^2/(3 w^2)) as s -> 0
        const Scalar k = (Scalar(2) / w) * (Scalar(1) - s * s / (Scalar(3) * w * w));
        return q.vec() * k;
    }
    return q.vec() * (angle / s);
}

// Unit quaternion for an axis-angle vector with norm < pi.
template <typename Scalar>
Eigen::Quaternion<Scalar> exp_so3(const Vector3T<Scalar>& v) {
    const Scalar angle = v.norm();
    if (angle >= Scalar(M_PI))
        throw ChartSingularity("rotation-vector norm at or beyond pi");
    Eigen::Quaternion<Scalar> q;
    if (angle < Scalar(kSmallAngle)) {
        const Scalar half = Scalar(0.5) - angle * angle / Scalar(48);
        q.w() = Scalar(1) - angle * angle / Scalar(8);
        q.vec() = v * half;
    } else {
        const Scalar half_angle = Scalar(0.5) * angle;
        q.w() = std::cos(half_angle);
        q.vec() = v * (std::sin(half_angle) / angle);
    }
    q.normalize();
    return q;
}

// Decoupled chart: translation verbatim, rotation as axis-angle.
template <typename Scalar>
PoseT<Scalar> exp_se3(const Vector6T<Scalar>& xi) {
    PoseT<Scalar> p;
    p.translation = xi.template head<3>();
    p.rotation = exp_so3<Scalar>(xi.template tail<3>());
    return p;
}

template <typename Scalar>
Vector6T<Scalar> log_se3(const PoseT<Scalar>& p) {
    Vector6T<Scalar> xi;
    xi.template head<3>() = p.translation;
    xi.template tail<3>() = log_so3(p.rotation);
    return xi;
}

// Chart coordinates of p relative to a center pose: translation offset plus
// axis-angle of the relative rotation. chart_at(identity, p) == log_se3(p).
template <typename Scalar>
Vector6T<Scalar> chart_at(const PoseT<Scalar>& center, const PoseT<Scalar>& p) {
    Vector6T<Scalar> v;
    v.template head<3>() = p.translation - center.translation;
    v.template tail<3>() = log_so3<Scalar>(
        (center.rotation.conjugate() * p.rotation).normalized());
    return v;
}

template <typename Scalar>
PoseT<Scalar> chart_from(const PoseT<Scalar>& center, const Vector6T<Scalar>& v) {
    PoseT<Scalar> p;
    p.translation = center.translation + v.template head<3>();
    p.rotation = (center.rotation * exp_so3<Scalar>(v.template tail<3>())).normalized();
    return p;
}

// Weighted SE(3) distance: w*|t1-t2|_2 + (1-w)*|phi1-phi2|_1 with phi the
// axis-angle chart of each rotation.
template <typename Scalar>
Scalar pose_distance(const PoseT<Scalar>& p1, const PoseT<Scalar>& p2,
                     const DistanceWeights& w) {
    if (w.w_trans < 0.0 || w.w_trans > 1.0)
        throw Error("DistanceWeights.w_trans must lie in [0, 1]");
    const Scalar dt = (p1.translation - p2.translation).norm();
    const Vector3T<Scalar> dphi = log_so3(p1.rotation) - log_so3(p2.rotation);
    return Scalar(w.w_trans) * dt + Scalar(1.0 - w.w_trans) * dphi.template lpNorm<1>();
}

// Geodesic angle between two orientations, in [0, pi]. Insensitive to the
// quaternion double cover.
template <typename Scalar>
Scalar rotation_angle(const Eigen::Quaternion<Scalar>& a,
                      const Eigen::Quaternion<Scalar>& b) {
    const Eigen::Quaternion<Scalar> rel = a.conjugate() * b;
    return Scalar(2) * std::atan2(rel.vec().norm(), std::abs(rel.w()));
}

// Inverse left Jacobian of SO(3): maps a spatial angular velocity to the
// rate of change of the axis-angle coordinates at phi.
template <typename Scalar>
Eigen::Matrix<Scalar, 3, 3> so3_left_jacobian_inverse(const Vector3T<Scalar>& phi) {
    const Scalar theta = phi.norm();
    const Eigen::Matrix<Scalar, 3, 3> px = hat(phi);
    Scalar c;
    if (theta < Scalar(1e-4)) {
        c = Scalar(1) / Scalar(12) + theta * theta / Scalar(720);
    } else {
        c = Scalar(1) / (theta * theta) -
            (Scalar(1) + std::cos(theta)) / (Scalar(2) * theta * std::sin(theta));
    }
    return Eigen::Matrix<Scalar, 3, 3>::Identity() - Scalar(0.5) * px + c * px * px;
}

// Frechet/Karcher mean of a set of rotations under the geodesic metric.
template <typename Scalar>
Eigen::Quaternion<Scalar> karcher_mean_rotation(
    const std::vector<Eigen::Quaternion<Scalar>>& rotations,
    int max_iters = 64, Scalar tol = Scalar(1e-12)) {
    if (rotations.empty()) throw Error("karcher_mean_rotation: empty input");
    Eigen::Quaternion<Scalar> mean = rotations.front();
    for (int it = 0; it < max_iters; ++it) {
        Vector3T<Scalar> avg = Vector3T<Scalar>::Zero();
        for (const auto& r : rotations)
            avg += log_so3<Scalar>((mean.conjugate() * r).normalized());
        avg /= Scalar(rotations.size());
        if (avg.norm() < tol) break;
        mean = (mean * exp_so3<Scalar>(avg)).normalized();
    }
    return mean;
}

template <typename Scalar>
PoseT<Scalar> karcher_mean_pose(const std::vector<PoseT<Scalar>>& poses) {
    if (poses.empty()) throw Error("karcher_mean_pose: empty input");
    Vector3T<Scalar> t = Vector3T<Scalar>::Zero();
    std::vector<Eigen::Quaternion<Scalar>> rots;
    rots.reserve(poses.size());
    for (const auto& p : poses) {
        t += p.translation;
        rots.push_back(p.rotation);
    }
    PoseT<Scalar> mean;
    mean.translation = t / Scalar(poses.size());
    mean.rotation = karcher_mean_rotation(rots);
    return mean;
}

// File layout for a pose: [tx, ty, tz, qw, qx, qy, qz].
template <typename Scalar>
std::array<Scalar, 7> pose_to_array(const PoseT<Scalar>& p) {
    return {p.translation.x(), p.translation.y(), p.translation.z(),
            p.rotation.w(), p.rotation.x(), p.rotation.y(), p.rotation.z()};
}

template <typename Scalar>
PoseT<Scalar> pose_from_array(const std::array<Scalar, 7>& a) {
    Eigen::Quaternion<Scalar> q(a[3], a[4], a[5], a[6]);
    const Scalar n = q.norm();
    if (std::abs(n - Scalar(1)) > Scalar(1e-3))
        throw ValidationFailure("pose", "quaternion norm far from 1");
    q.normalize();
    return make_pose(q, Vector3T<Scalar>(a[0], a[1], a[2]));
}

// Resample a pose path to target_horizon+1 waypoints by chart-linear
// interpolation between neighboring poses.
template <typename Scalar>
std::vector<PoseT<Scalar>> resample_path(const std::vector<PoseT<Scalar>>& path,
                                         int target_horizon) {
    if (path.empty()) throw Error("resample_path: empty path");
    if (target_horizon < 0) throw Error("resample_path: negative horizon");
    std::vector<PoseT<Scalar>> out;
    out.reserve(target_horizon + 1);
    const int last = static_cast<int>(path.size()) - 1;
    for (int k = 0; k <= target_horizon; ++k) {
        if (last == 0 || target_horizon == 0) {
            out.push_back(path[target_horizon == 0 ? 0 : (k * last) / target_horizon]);
            continue;
        }
        const Scalar s = Scalar(k) * Scalar(last) / Scalar(target_horizon);
        const int i = std::min(static_cast<int>(s), last - 1);
        const Scalar alpha = s - Scalar(i);
        const Vector6T<Scalar> step = chart_at(path[i], path[i + 1]);
        out.push_back(chart_from(path[i], Vector6T<Scalar>(alpha * step)));
    }
    return out;
}

inline Eigen::Quaterniond random_unit_quaternion(Rng& rng) {
    // Shoemake's method: uniform over SO(3).
    const double u1 = uniform(rng, 0.0, 1.0);
    const double u2 = uniform(rng, 0.0, 2.0 * M_PI);
    const double u3 = uniform(rng, 0.0, 2.0 * M_PI);
    const double a = std::sqrt(1.0 - u1), b = std::sqrt(u1);
    return Eigen::Quaterniond(b * std::cos(u3), a * std::sin(u2),
                              a * std::cos(u2), b * std::sin(u3));
}

} // namespace jfto

#endif
