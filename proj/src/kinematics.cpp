#include "jfto/kinematics.hpp"

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "jfto/errors.hpp"

namespace jfto {

Eigen::VectorXd ArmModel::lower_limits() const {
    Eigen::VectorXd lo(dof());
    for (int i = 0; i < dof(); ++i) lo[i] = joints[i].lower;
    return lo;
}

Eigen::VectorXd ArmModel::upper_limits() const {
    Eigen::VectorXd hi(dof());
    for (int i = 0; i < dof(); ++i) hi[i] = joints[i].upper;
    return hi;
}

namespace {

Pose dh_transform(const DhJoint& j, double theta) {
    const double th = theta + j.theta_offset;
    const Eigen::Quaterniond rz(Eigen::AngleAxisd(th, Vector3::UnitZ()));
    const Eigen::Quaterniond rx(Eigen::AngleAxisd(j.alpha, Vector3::UnitX()));
    // Rz(th) * Tz(d) * Tx(a) * Rx(alpha)
    Pose p;
    p.rotation = (rz * rx).normalized();
    p.translation = rz * Vector3(j.a, 0.0, j.d);
    return p;
}

void check_q(const ArmModel& arm, const Eigen::VectorXd& q) {
    if (q.size() != arm.dof())
        throw ShapeMismatch("joint vector size does not match arm dof");
    if (!within_limits(arm, q))
        throw JointLimit("joint vector outside limits for arm '" + arm.name + "'");
}

} // namespace

bool within_limits(const ArmModel& arm, const Eigen::VectorXd& q, double slack) {
    for (int i = 0; i < arm.dof(); ++i)
        if (q[i] < arm.joints[i].lower - slack || q[i] > arm.joints[i].upper + slack)
            return false;
    return true;
}

std::vector<Pose> link_frames(const ArmModel& arm, const Eigen::VectorXd& q) {
    check_q(arm, q);
    std::vector<Pose> frames(arm.dof() + 1);
    frames[0] = identity_pose<double>();
    for (int i = 0; i < arm.dof(); ++i)
        frames[i + 1] = compose(frames[i], dh_transform(arm.joints[i], q[i]));
    return frames;
}

Pose fk(const ArmModel& arm, const Eigen::VectorXd& q) {
    return compose(link_frames(arm, q).back(), arm.tool);
}

JointAxes joint_axes(const ArmModel& arm, const Eigen::VectorXd& q) {
    const std::vector<Pose> frames = link_frames(arm, q);
    JointAxes ja;
    ja.axis.resize(3, arm.dof());
    ja.origin.resize(3, arm.dof());
    for (int i = 0; i < arm.dof(); ++i) {
        // joint i rotates about the z axis of frame i-1
        ja.axis.col(i) = frames[i].rotation * Vector3::UnitZ();
        ja.origin.col(i) = frames[i].translation;
    }
    return ja;
}

Eigen::Matrix<double, 6, Eigen::Dynamic> fk_jacobian(const ArmModel& arm,
                                                     const Eigen::VectorXd& q) {
    const JointAxes ja = joint_axes(arm, q);
    const Pose ee = fk(arm, q);
    Eigen::Matrix<double, 6, Eigen::Dynamic> jac(6, arm.dof());
    for (int i = 0; i < arm.dof(); ++i) {
        const Vector3 z = ja.axis.col(i);
        jac.block<3, 1>(0, i) = z.cross(ee.translation - Vector3(ja.origin.col(i)));
        jac.block<3, 1>(3, i) = z;
    }
    return jac;
}

std::pair<Eigen::Matrix3Xd, Eigen::VectorXd> body_points(const ArmModel& arm,
                                                         const Eigen::VectorXd& q) {
    const std::vector<Pose> frames = link_frames(arm, q);
    Eigen::Matrix3Xd pts(3, arm.body_points.size());
    Eigen::VectorXd radii(arm.body_points.size());
    for (size_t k = 0; k < arm.body_points.size(); ++k) {
        const BodyPoint& bp = arm.body_points[k];
        if (bp.link < 0 || bp.link > arm.dof())
            throw ValidationFailure("body_points[" + std::to_string(k) + "].link",
                                    "link index out of range");
        pts.col(k) = transform_point(frames[bp.link], bp.local);
        radii[k] = bp.radius;
    }
    return {pts, radii};
}

Eigen::VectorXd clamp_to_limits(const ArmModel& arm, const Eigen::VectorXd& q) {
    if (q.size() != arm.dof())
        throw ShapeMismatch("joint vector size does not match arm dof");
    Eigen::VectorXd out = q;
    for (int i = 0; i < arm.dof(); ++i)
        out[i] = std::clamp(out[i], arm.joints[i].lower, arm.joints[i].upper);
    return out;
}

JointTrajectory clamp_to_limits(const ArmModel& arm, const JointTrajectory& traj) {
    JointTrajectory out = traj;
    for (int t = 0; t < out.states.rows(); ++t)
        out.states.row(t) = clamp_to_limits(arm, Eigen::VectorXd(out.states.row(t))).transpose();
    return out;
}

Eigen::VectorXd random_joint_vector(const ArmModel& arm, Rng& rng) {
    Eigen::VectorXd q(arm.dof());
    for (int i = 0; i < arm.dof(); ++i)
        q[i] = uniform(rng, arm.joints[i].lower, arm.joints[i].upper);
    return q;
}

ArmModel reference_arm_6dof() {
    ArmModel arm;
    arm.name = "ref6";
    arm.joints = {
        {0.00, M_PI / 2, 0.125, 0.0, -2.6, 2.6},    // base yaw
        {0.28, 0.0, 0.000, 0.0, -2.4, 2.4},         // shoulder
        {0.00, M_PI / 2, 0.000, 0.0, -2.4, 2.4},    // elbow
        {0.00, -M_PI / 2, 0.220, 0.0, -2.9, 2.9},   // forearm roll
        {0.00, M_PI / 2, 0.000, 0.0, -2.0, 2.0},    // wrist pitch
        {0.00, 0.0, 0.085, 0.0, -2.9, 2.9},         // wrist roll
    };
    arm.tool = make_pose(Eigen::Quaterniond::Identity(), Vector3(0.0, 0.0, 0.045));
    arm.body_points = {
        {0, Vector3(0.0, 0.0, 0.06), 0.050},
        {2, Vector3(-0.14, 0.0, 0.0), 0.045},
        {2, Vector3(-0.05, 0.0, 0.0), 0.045},
        {4, Vector3(0.0, 0.0, -0.11), 0.040},
        {4, Vector3(0.0, 0.0, -0.03), 0.040},
        {6, Vector3(0.0, 0.0, -0.04), 0.030},
        {6, Vector3(0.0, 0.0, 0.03), 0.025},
    };
    return arm;
}

nlohmann::json arm_to_json(const ArmModel& arm) {
    nlohmann::json j;
    j["schema"] = "jfto-arm/1";
    j["name"] = arm.name;
    for (const DhJoint& dh : arm.joints)
        j["joints"].push_back({{"a", dh.a},
                               {"alpha", dh.alpha},
                               {"d", dh.d},
                               {"theta_offset", dh.theta_offset},
                               {"lower", dh.lower},
                               {"upper", dh.upper}});
    for (const BodyPoint& bp : arm.body_points)
        j["body_points"].push_back(
            {{"link", bp.link},
             {"point", {bp.local.x(), bp.local.y(), bp.local.z()}},
             {"radius", bp.radius}});
    j["tool"] = pose_to_array(arm.tool);
    return j;
}

ArmModel arm_from_json(const nlohmann::json& j) {
    if (!j.contains("schema") || j.at("schema") != "jfto-arm/1")
        throw SchemaVersionMismatch("unsupported arm schema");
    ArmModel arm;
    arm.name = j.value("name", "arm");
    for (const auto& row : j.at("joints")) {
        DhJoint dh;
        dh.a = row.at("a").get<double>();
        dh.alpha = row.at("alpha").get<double>();
        dh.d = row.at("d").get<double>();
        dh.theta_offset = row.at("theta_offset").get<double>();
        dh.lower = row.at("lower").get<double>();
        dh.upper = row.at("upper").get<double>();
        if (dh.lower >= dh.upper)
            throw ValidationFailure("joints", "lower limit must be below upper");
        arm.joints.push_back(dh);
    }
    if (arm.joints.empty()) throw ValidationFailure("joints", "arm needs joints");
    if (j.contains("body_points")) {
        for (const auto& row : j.at("body_points")) {
            BodyPoint bp;
            bp.link = row.at("link").get<int>();
            const auto pt = row.at("point").get<std::vector<double>>();
            if (pt.size() != 3)
                throw ValidationFailure("body_points.point", "need 3 numbers");
            bp.local = Vector3(pt[0], pt[1], pt[2]);
            bp.radius = row.at("radius").get<double>();
            if (bp.radius <= 0.0)
                throw ValidationFailure("body_points.radius", "radius must be positive");
            arm.body_points.push_back(bp);
        }
    }
    const auto tool = j.at("tool").get<std::array<double, 7>>();
    arm.tool = pose_from_array(tool);
    return arm;
}

ArmModel load_arm(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open arm file: " + path);
    nlohmann::json j;
    in >> j;
    return arm_from_json(j);
}

void save_arm(const ArmModel& arm, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write arm file: " + path);
    out << arm_to_json(arm).dump(2) << "\n";
}

} // namespace jfto
