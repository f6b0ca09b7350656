#ifndef JFTO_KINEMATICS_HPP
#define JFTO_KINEMATICS_HPP

// Serial-arm model: standard DH chain with joint limits, tool transform and
// per-link body points (with collision radii) for collision checking. Arm
// descriptions are data, loadable from JSON, so alternate arms can be tested.

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "jfto/se3.hpp"

#include <nlohmann/json_fwd.hpp>

namespace jfto {

// Standard (distal) DH row: frame_i = frame_{i-1} * Rz(theta_i + theta_offset)
// * Tz(d) * Tx(a) * Rx(alpha).
struct DhJoint {
    double a = 0.0;
    double alpha = 0.0;
    double d = 0.0;
    double theta_offset = 0.0;
    double lower = -M_PI;
    double upper = M_PI;
};

// Collision sphere attached to a link frame (link 0 = base).
struct BodyPoint {
    int link = 0;
    Vector3 local = Vector3::Zero();
    double radius = 0.03;
};

struct ArmModel {
    std::string name = "arm";
    std::vector<DhJoint> joints;
    std::vector<BodyPoint> body_points;
    Pose tool;   // flange-to-TCP transform

    int dof() const { return static_cast<int>(joints.size()); }
    Eigen::VectorXd lower_limits() const;
    Eigen::VectorXd upper_limits() const;
};

struct JointTrajectory {
    Eigen::MatrixXd states;   // (T+1) x dof, row t = q_t

    int horizon() const { return static_cast<int>(states.rows()) - 1; }
    int dof() const { return static_cast<int>(states.cols()); }
};

// Cumulative link frames [base, frame_1, ..., frame_dof]; no tool applied.
std::vector<Pose> link_frames(const ArmModel& arm, const Eigen::VectorXd& q);

// End-effector (TCP) pose. Throws JointLimit when q leaves the limits by
// more than a small slack (1e-3 rad).
Pose fk(const ArmModel& arm, const Eigen::VectorXd& q);

// World-frame rotation axis and origin of each joint at configuration q.
struct JointAxes {
    Eigen::Matrix3Xd axis;     // 3 x dof
    Eigen::Matrix3Xd origin;   // 3 x dof
};
JointAxes joint_axes(const ArmModel& arm, const Eigen::VectorXd& q);

// Geometric Jacobian of the TCP: linear rows then angular rows, 6 x dof.
Eigen::Matrix<double, 6, Eigen::Dynamic> fk_jacobian(const ArmModel& arm,
                                                     const Eigen::VectorXd& q);

// Body points transformed to the world frame, with their radii.
std::pair<Eigen::Matrix3Xd, Eigen::VectorXd> body_points(const ArmModel& arm,
                                                         const Eigen::VectorXd& q);

Eigen::VectorXd clamp_to_limits(const ArmModel& arm, const Eigen::VectorXd& q);
JointTrajectory clamp_to_limits(const ArmModel& arm, const JointTrajectory& traj);

bool within_limits(const ArmModel& arm, const Eigen::VectorXd& q, double slack = 1e-3);

Eigen::VectorXd random_joint_vector(const ArmModel& arm, Rng& rng);

// Bundled 6-DoF reference arm (~0.6 m reach) used as the default fixture.
ArmModel reference_arm_6dof();

nlohmann::json arm_to_json(const ArmModel& arm);
ArmModel arm_from_json(const nlohmann::json& j);
ArmModel load_arm(const std::string& path);
void save_arm(const ArmModel& arm, const std::string& path);

} // namespace jfto

#endif
