#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <nlohmann/json.hpp>

#include "jfto/kinematics.hpp"
#include "jfto/errors.hpp"

#include <filesystem>

using namespace jfto;
using Eigen::VectorXd;

namespace {

// straight planar chain: a_i = L_i, alpha = 0
ArmModel planar_chain(const std::vector<double>& lengths) {
    ArmModel arm;
    arm.name = "planar";
    for (double len : lengths)
        arm.joints.push_back({len, 0.0, 0.0, 0.0, -M_PI + 0.01, M_PI - 0.01});
    return arm;
}

} // namespace

TEST_CASE("zero configuration of a straight chain") {
    const ArmModel arm = planar_chain({0.4, 0.3, 0.2});
    const Pose ee = fk(arm, VectorXd::Zero(3));
    CHECK((ee.translation - Vector3(0.9, 0, 0)).norm() < 1e-12);
    CHECK(rotation_angle(ee.rotation, Eigen::Quaterniond::Identity()) < 1e-12);
}

TEST_CASE("planar two-link hand trigonometry") {
    const ArmModel arm = planar_chain({1.0, 1.0});
    VectorXd q(2);
    q << M_PI / 2, 0.0;
    const Pose ee = fk(arm, q);
    CHECK((ee.translation - Vector3(0, 2, 0)).norm() < 1e-12);
    CHECK(rotation_angle(ee.rotation,
                         Eigen::Quaterniond(Eigen::AngleAxisd(M_PI / 2, Vector3::UnitZ()))) < 1e-12);

    q << M_PI / 4, M_PI / 4;
    const Pose ee2 = fk(arm, q);
    const double c45 = std::cos(M_PI / 4);
    CHECK((ee2.translation - Vector3(c45, 1 + c45, 0)).norm() < 1e-12);
}

TEST_CASE("fk jacobian matches finite differences") {
    const ArmModel arm = reference_arm_6dof();
    Rng rng = make_rng(71);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        VectorXd q = random_joint_vector(arm, rng) * 0.9;
        const auto jac = fk_jacobian(arm, q);
        const double h = 1e-6;
        for (int i = 0; i < arm.dof(); ++i) {
            VectorXd qp = q, qm = q;
            qp[i] += h;
            qm[i] -= h;
            const Pose pp = fk(arm, qp), pm = fk(arm, qm);
            const Vector3 dlin = (pp.translation - pm.translation) / (2 * h);
            worst = std::max(worst, (dlin - Vector3(jac.block<3, 1>(0, i))).norm());
            // angular rate from the relative quaternion (world frame)
            const Eigen::Quaterniond dq = pp.rotation * pm.rotation.conjugate();
            const Vector3 dang = log_so3(dq.normalized()) / (2 * h);
            worst = std::max(worst, (dang - Vector3(jac.block<3, 1>(3, i))).norm());
        }
    }
    CHECK(worst < 1e-5);
}

TEST_CASE("fk continuity under small perturbations") {
    const ArmModel arm = reference_arm_6dof();
    Rng rng = make_rng(72);
    for (int trial = 0; trial < 100; ++trial) {
        const VectorXd q = random_joint_vector(arm, rng) * 0.9;
        const Pose base = fk(arm, q);
        double prev = std::numeric_limits<double>::infinity();
        for (double delta : {1e-2, 1e-4, 1e-6}) {
            VectorXd q2 = q;
            q2[trial % arm.dof()] += delta;
            const Pose moved = fk(arm, q2);
            const double change = (moved.translation - base.translation).norm() +
                                  rotation_angle(moved.rotation, base.rotation);
            CHECK(change < prev + 1e-12);
            prev = change;
        }
        CHECK(prev < 1e-4);
    }
}

TEST_CASE("body points: count constant, rigid within links") {
    const ArmModel arm = reference_arm_6dof();
    Rng rng = make_rng(73);
    const auto [pts0, radii0] = body_points(arm, VectorXd::Zero(6));
    REQUIRE(pts0.cols() == static_cast<long>(arm.body_points.size()));
    for (int trial = 0; trial < 50; ++trial) {
        const VectorXd q = random_joint_vector(arm, rng) * 0.9;
        const auto [pts, radii] = body_points(arm, q);
        CHECK(pts.cols() == pts0.cols());
        CHECK((radii - radii0).cwiseAbs().maxCoeff() == 0.0);
        // pairwise distances between points sharing a link never change
        for (size_t a = 0; a < arm.body_points.size(); ++a)
            for (size_t b = a + 1; b < arm.body_points.size(); ++b)
                if (arm.body_points[a].link == arm.body_points[b].link) {
                    const double d0 = (pts0.col(a) - pts0.col(b)).norm();
                    const double d = (pts.col(a) - pts.col(b)).norm();
                    CHECK(d == doctest::Approx(d0).epsilon(1e-12));
                }
    }
}

TEST_CASE("rotating the base mirrors downstream points") {
    ArmModel arm = planar_chain({0.5, 0.5});
    arm.joints[0].lower = -M_PI;
    arm.joints[0].upper = M_PI;
    arm.body_points = {{1, Vector3(-0.25, 0, 0), 0.03}, {2, Vector3(-0.25, 0, 0), 0.03}};
    VectorXd q = VectorXd::Zero(2);
    const auto [pts, radii] = body_points(arm, q);
    q[0] = M_PI - 1e-12;
    const auto [rot, radii2] = body_points(arm, q);
    for (int k = 0; k < 2; ++k) {
        CHECK(rot(0, k) == doctest::Approx(-pts(0, k)).epsilon(1e-9));
        CHECK(rot(1, k) == doctest::Approx(-pts(1, k)).epsilon(1e-9));
        CHECK(rot(2, k) == doctest::Approx(pts(2, k)).epsilon(1e-9));
    }
}

TEST_CASE("joint limits: fk rejects, clamp repairs") {
    const ArmModel arm = reference_arm_6dof();
    VectorXd q = VectorXd::Zero(6);
    q[2] = arm.joints[2].upper + 0.1;
    CHECK_THROWS_AS((void)fk(arm, q), JointLimit);

    const VectorXd clamped = clamp_to_limits(arm, q);
    CHECK(clamped[2] == arm.joints[2].upper);
    CHECK((clamp_to_limits(arm, clamped) - clamped).norm() == 0.0);

    JointTrajectory traj;
    traj.states = Eigen::MatrixXd::Zero(4, 6);
    traj.states(1, 2) = arm.joints[2].upper + 0.1;
    traj.states(2, 0) = arm.joints[0].lower - 2.0;
    const JointTrajectory fixed = clamp_to_limits(arm, traj);
    CHECK(fixed.states(1, 2) == arm.joints[2].upper);
    CHECK(fixed.states(2, 0) == arm.joints[0].lower);
    CHECK(fixed.states(0, 0) == 0.0);
    // idempotent
    const JointTrajectory again = clamp_to_limits(arm, fixed);
    CHECK((again.states - fixed.states).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("arm json round trip") {
    const ArmModel arm = reference_arm_6dof();
    const ArmModel back = arm_from_json(arm_to_json(arm));
    REQUIRE(back.dof() == arm.dof());
    Rng rng = make_rng(74);
    for (int i = 0; i < 20; ++i) {
        const VectorXd q = random_joint_vector(const_cast<const ArmModel&>(arm), rng) * 0.9;
        const Pose a = fk(arm, q), b = fk(back, q);
        CHECK((a.translation - b.translation).norm() == 0.0);
        CHECK(rotation_angle(a.rotation, b.rotation) < 1e-15);
    }

    const auto path = std::filesystem::temp_directory_path() / "jfto_arm_test.json";
    save_arm(arm, path.string());
    const ArmModel loaded = load_arm(path.string());
    CHECK(loaded.dof() == arm.dof());
    CHECK(loaded.body_points.size() == arm.body_points.size());
    std::filesystem::remove(path);

    nlohmann::json bad = arm_to_json(arm);
    bad["joints"][0]["lower"] = 5.0;
    CHECK_THROWS_AS((void)arm_from_json(bad), ValidationFailure);
}

TEST_CASE("reference arm reaches about 0.6 m") {
    const ArmModel arm = reference_arm_6dof();
    VectorXd q = VectorXd::Zero(6);
    double reach = 0.0;
    Rng rng = make_rng(75);
    for (int i = 0; i < 500; ++i) {
        const VectorXd sample = random_joint_vector(arm, rng);
        reach = std::max(reach, fk(arm, sample).translation.norm());
    }
    CHECK(reach > 0.5);
    CHECK(reach < 0.85);
}
