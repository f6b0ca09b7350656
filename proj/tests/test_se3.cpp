#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Geometry>
#include <cmath>

#include "jfto/se3.hpp"

using namespace jfto;

namespace {

// Oracle: poses as 4x4 homogeneous matrices, composed by plain matrix product.
Eigen::Matrix4d to_homogeneous(const Pose& p) {
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    m.topLeftCorner<3, 3>() = p.rotation.toRotationMatrix();
    m.topRightCorner<3, 1>() = p.translation;
    return m;
}

// Oracle: Rodrigues rotation-matrix exponential.
Eigen::Matrix3d rodrigues(const Vector3& v) {
    const double theta = v.norm();
    if (theta < 1e-12) return Eigen::Matrix3d::Identity();
    const Eigen::Matrix3d k = hat<double>(v / theta);
    return Eigen::Matrix3d::Identity() + std::sin(theta) * k +
           (1.0 - std::cos(theta)) * k * k;
}

Pose rot_z(double angle, const Vector3& t = Vector3::Zero()) {
    return make_pose<double>(
        Eigen::Quaterniond(Eigen::AngleAxisd(angle, Vector3::UnitZ())), t);
}

Pose random_chart_pose(Rng& rng, double max_angle = M_PI - 0.1) {
    Vector6 xi;
    for (int i = 0; i < 3; ++i) xi[i] = uniform(rng, -1.0, 1.0);
    Vector3 axis = gaussian_vector(rng, 3);
    axis.normalize();
    xi.tail<3>() = axis * uniform(rng, 0.0, max_angle);
    return exp_se3<double>(xi);
}

} // namespace

TEST_CASE("compose: identity and inverse") {
    Rng rng = make_rng(11);
    for (int i = 0; i < 50; ++i) {
        const Pose p = random_chart_pose(rng);
        const Pose id = identity_pose<double>();

        const Pose ip = compose(id, p);
        CHECK(rotation_angle(ip.rotation, p.rotation) < 1e-12);
        CHECK((ip.translation - p.translation).norm() < 1e-12);

        const Pose should_be_id = compose(p, inverse(p));
        CHECK(rotation_angle(should_be_id.rotation, id.rotation) < 1e-9);
        CHECK(should_be_id.translation.norm() < 1e-9);
        CHECK(std::abs(should_be_id.rotation.norm() - 1.0) < 1e-9);
    }
}

TEST_CASE("compose matches homogeneous-matrix oracle") {
    const Pose a = rot_z(M_PI / 2, Vector3(1, 0, 0));
    const Pose b = rot_z(M_PI / 2);
    const Pose c = compose(a, b);
    const Pose expect = rot_z(M_PI, Vector3(1, 0, 0));
    CHECK(rotation_angle(c.rotation, expect.rotation) < 1e-12);
    CHECK((c.translation - expect.translation).norm() < 1e-12);

    Rng rng = make_rng(12);
    for (int i = 0; i < 100; ++i) {
        const Pose p = random_chart_pose(rng), q = random_chart_pose(rng);
        const Eigen::Matrix4d want = to_homogeneous(p) * to_homogeneous(q);
        const Eigen::Matrix4d got = to_homogeneous(compose(p, q));
        CHECK((want - got).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("exp_se3 basics") {
    const Pose id = exp_se3<double>(Vector6::Zero());
    CHECK(id.translation.norm() == 0.0);
    CHECK(rotation_angle(id.rotation, Eigen::Quaterniond::Identity()) == 0.0);

    Vector6 xi = Vector6::Zero();
    xi[5] = M_PI / 2;
    const Pose p = exp_se3<double>(xi);
    CHECK(p.translation.norm() == 0.0);
    CHECK(std::abs(p.rotation.w() - std::cos(M_PI / 4)) < 1e-12);
    CHECK(std::abs(p.rotation.z() - std::sin(M_PI / 4)) < 1e-12);
    CHECK(std::abs(p.rotation.x()) < 1e-12);
    CHECK(std::abs(p.rotation.y()) < 1e-12);
}

TEST_CASE("exp_so3 matches Rodrigues oracle") {
    Rng rng = make_rng(13);
    for (int i = 0; i < 200; ++i) {
        Vector3 v = gaussian_vector(rng, 3);
        v *= uniform(rng, 0.0, M_PI - 0.05) / v.norm();
        const Eigen::Matrix3d got = exp_so3<double>(v).toRotationMatrix();
        CHECK((got - rodrigues(v)).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("exp/log round trip over 10k tangents") {
    Rng rng = make_rng(14);
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
        Vector6 xi;
        xi.head<3>() = gaussian_vector(rng, 3);
        Vector3 axis = gaussian_vector(rng, 3);
        axis.normalize();
        xi.tail<3>() = axis * uniform(rng, 0.0, M_PI - 0.1);
        const Vector6 back = log_se3(exp_se3<double>(xi));
        worst = std::max(worst, (back - xi).cwiseAbs().maxCoeff());
    }
    CHECK(worst < 1e-8);
}

TEST_CASE("log rejects chart singularity") {
    Vector3 v = Vector3::UnitX() * (M_PI - 1e-9);
    Eigen::Quaterniond q(Eigen::AngleAxisd(M_PI - 1e-9, Vector3::UnitX()));
    CHECK_THROWS_AS((void)log_so3(q), ChartSingularity);
    CHECK_THROWS_AS((void)exp_so3<double>(v * (M_PI + 0.1) / v.norm()),
                    ChartSingularity);
    // exactly pi is also rejected rather than picking an axis
    Eigen::Quaterniond qpi(0.0, 1.0, 0.0, 0.0);
    CHECK_THROWS_AS((void)log_so3(qpi), ChartSingularity);
}

TEST_CASE("small-angle series is continuous with closed form") {
    for (double mag : {1e-9, 1e-7, 9.9e-7, 1.01e-6, 1e-5}) {
        const Vector3 v = Vector3(0.6, -0.8, 0.0) * mag;
        const Vector3 back = log_so3(exp_so3<double>(v));
        CHECK((back - v).norm() < 1e-15 + 1e-9 * mag);
    }
}

TEST_CASE("pose_distance hand cases") {
    Rng rng = make_rng(15);
    const Pose p = random_chart_pose(rng);
    CHECK(pose_distance(p, p, DistanceWeights{0.3}) == 0.0);

    Pose a = identity_pose<double>(), b = identity_pose<double>();
    b.translation = Vector3(3, 4, 0);
    CHECK(pose_distance(a, b, DistanceWeights{1.0}) == doctest::Approx(5.0).epsilon(1e-12));

    // w=0.5, dt=(1,0,0), dphi=(0.2,0.1,0) -> 0.5*1 + 0.5*0.3 = 0.65
    Pose c = identity_pose<double>();
    c.translation = Vector3(1, 0, 0);
    c.rotation = exp_so3<double>(Vector3(0.2, 0.1, 0.0));
    CHECK(pose_distance(a, c, DistanceWeights{0.5}) ==
          doctest::Approx(0.65).epsilon(1e-12));

    CHECK_THROWS_AS((void)pose_distance(a, b, DistanceWeights{1.5}), Error);
}

TEST_CASE("pose_distance symmetry and triangle-like bound") {
    Rng rng = make_rng(16);
    const DistanceWeights w{0.37};
    for (int i = 0; i < 500; ++i) {
        const Pose p1 = random_chart_pose(rng), p2 = random_chart_pose(rng),
                   p3 = random_chart_pose(rng);
        const double d12 = pose_distance(p1, p2, w);
        CHECK(d12 == doctest::Approx(pose_distance(p2, p1, w)).epsilon(1e-12));
        CHECK(d12 >= 0.0);
        CHECK(pose_distance(p1, p3, w) <=
              d12 + pose_distance(p2, p3, w) + 1e-9);
    }
}

TEST_CASE("rotation_angle") {
    Rng rng = make_rng(17);
    const Eigen::Quaterniond q = random_unit_quaternion(rng);
    CHECK(rotation_angle(q, q) == 0.0);

    const Eigen::Quaterniond rz(Eigen::AngleAxisd(M_PI / 2, Vector3::UnitZ()));
    CHECK(rotation_angle(Eigen::Quaterniond::Identity(), rz) ==
          doctest::Approx(M_PI / 2).epsilon(1e-12));

    // double cover: q and -q are the same rotation
    Eigen::Quaterniond nq = q;
    nq.coeffs() = -nq.coeffs();
    CHECK(rotation_angle(q, nq) < 1e-9);

    // oracle: angle from the trace of the relative rotation matrix
    for (int i = 0; i < 200; ++i) {
        const Eigen::Quaterniond a = random_unit_quaternion(rng);
        const Eigen::Quaterniond b = random_unit_quaternion(rng);
        const Eigen::Matrix3d rel =
            a.toRotationMatrix().transpose() * b.toRotationMatrix();
        const double ctheta = std::clamp((rel.trace() - 1.0) / 2.0, -1.0, 1.0);
        CHECK(rotation_angle(a, b) ==
              doctest::Approx(std::acos(ctheta)).epsilon(1e-6));
    }
}

TEST_CASE("double-cover invariance of chart ops") {
    Rng rng = make_rng(18);
    for (int i = 0; i < 200; ++i) {
        Pose p = random_chart_pose(rng);
        Pose pneg = p;
        pneg.rotation.coeffs() = -pneg.rotation.coeffs();
        CHECK((log_se3(p) - log_se3(pneg)).norm() < 1e-12);
        const Pose q = random_chart_pose(rng);
        CHECK(pose_distance(p, q, DistanceWeights{0.5}) ==
              doctest::Approx(pose_distance(pneg, q, DistanceWeights{0.5}))
                  .epsilon(1e-12));
    }
}

TEST_CASE("chart_at/chart_from round trip and identity-center consistency") {
    Rng rng = make_rng(19);
    for (int i = 0; i < 200; ++i) {
        const Pose center = random_chart_pose(rng, 2.0);
        const Pose p = compose(center, random_chart_pose(rng, 2.0));
        const Vector6 v = chart_at(center, p);
        const Pose back = chart_from(center, v);
        CHECK(rotation_angle(back.rotation, p.rotation) < 1e-9);
        CHECK((back.translation - p.translation).norm() < 1e-9);
    }
    const Pose p = random_chart_pose(rng);
    CHECK((chart_at(identity_pose<double>(), p) - log_se3(p)).norm() < 1e-12);
}

TEST_CASE("so3_left_jacobian_inverse matches finite differences") {
    Rng rng = make_rng(20);
    for (int i = 0; i < 100; ++i) {
        Vector3 phi = gaussian_vector(rng, 3);
        phi *= uniform(rng, 1e-3, 2.5) / phi.norm();
        const Eigen::Matrix3d jinv = so3_left_jacobian_inverse<double>(phi);
        // spatial perturbation: R(eps) = exp(eps*w) * exp(phi)
        const double h = 1e-6;
        for (int k = 0; k < 3; ++k) {
            Vector3 w = Vector3::Zero();
            w[k] = 1.0;
            const Eigen::Quaterniond rp = exp_so3<double>(Vector3(w * h)) *
                                          exp_so3<double>(phi);
            const Eigen::Quaterniond rm = exp_so3<double>(Vector3(-w * h)) *
                                          exp_so3<double>(phi);
            const Vector3 dphi = (log_so3(rp) - log_so3(rm)) / (2 * h);
            CHECK((dphi - jinv.col(k)).norm() < 1e-5);
        }
    }
}

TEST_CASE("karcher mean of clustered rotations") {
    Rng rng = make_rng(21);
    const Eigen::Quaterniond center(Eigen::AngleAxisd(2.9, Vector3::UnitZ()));
    std::vector<Eigen::Quaterniond> rots;
    for (int i = 0; i < 40; ++i) {
        Vector3 noise = gaussian_vector(rng, 3) * 0.05;
        rots.push_back((center * exp_so3<double>(noise)).normalized());
    }
    const Eigen::Quaterniond mean = karcher_mean_rotation(rots);
    CHECK(rotation_angle(mean, center) < 0.05);
}

TEST_CASE("pose array round trip") {
    Rng rng = make_rng(22);
    const Pose p = random_chart_pose(rng);
    const Pose back = pose_from_array(pose_to_array(p));
    CHECK(rotation_angle(back.rotation, p.rotation) < 1e-12);
    CHECK((back.translation - p.translation).norm() < 1e-12);

    std::array<double, 7> bad{0, 0, 0, 0.5, 0, 0, 0};
    CHECK_THROWS_AS((void)pose_from_array(bad), ValidationFailure);
}
