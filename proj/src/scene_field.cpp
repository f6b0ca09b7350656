#include "jfto/scene_field.hpp"

#include <cmath>

#include "jfto/errors.hpp"

namespace jfto {

SceneField build_field(const Eigen::Matrix3Xd& points, double margin) {
    if (points.cols() == 0) throw EmptyCloud("background cloud has no points");
    if (margin <= 0.0) throw Error("safety margin must be positive");
    SceneField f;
    f.points = points;
    f.index = KdTree3(points);
    f.margin = margin;
    return f;
}

double field_distance(const SceneField& field, const Eigen::Vector3d& query) {
    return std::sqrt(field.index.nearest(query).dist2);
}

int field_nearest(const SceneField& field, const Eigen::Vector3d& query) {
    return field.index.nearest(query).index;
}

Eigen::Vector3d field_distance_grad(const SceneField& field,
                                    const Eigen::Vector3d& query) {
    const auto hit = field.index.nearest(query);
    const Eigen::Vector3d delta = query - field.points.col(hit.index);
    const double d = delta.norm();
    if (d < 1e-12) return Eigen::Vector3d::Zero();
    return delta / d;
}

double field_smooth_distance(const SceneField& field, const Eigen::Vector3d& query,
                             double temperature, int k) {
    const auto hits = field.index.knearest(query, k);
    const double dmin = std::sqrt(hits.front().dist2);
    double acc = 0.0;
    for (const auto& h : hits)
        acc += std::exp(-(std::sqrt(h.dist2) - dmin) / temperature);
    return dmin - temperature * std::log(acc);
}

namespace {

double hinge_sum(const SceneField& field, const Eigen::Matrix3Xd& pts,
                 const Eigen::VectorXd* radii) {
    double acc = 0.0;
    for (long i = 0; i < pts.cols(); ++i) {
        double d = field_distance(field, pts.col(i));
        if (radii) d -= (*radii)[i];
        acc += std::max(0.0, field.margin - d) / field.margin;
    }
    return acc;
}

} // namespace

double collision_score(const SceneField& field,
                       const std::vector<Eigen::Matrix3Xd>& steps) {
    if (steps.empty()) return 0.0;
    double acc = 0.0;
    for (const auto& pts : steps) acc += hinge_sum(field, pts, nullptr);
    const double horizon = std::max<double>(1.0, static_cast<double>(steps.size()) - 1.0);
    return acc / horizon;
}

double collision_score(const SceneField& field,
                       const std::vector<Eigen::Matrix3Xd>& steps,
                       const std::vector<Eigen::VectorXd>& radii) {
    if (steps.size() != radii.size())
        throw LengthMismatch("collision_score: steps/radii length mismatch");
    if (steps.empty()) return 0.0;
    double acc = 0.0;
    for (size_t t = 0; t < steps.size(); ++t)
        acc += hinge_sum(field, steps[t], &radii[t]);
    const double horizon = std::max<double>(1.0, static_cast<double>(steps.size()) - 1.0);
    return acc / horizon;
}

double min_clearance(const SceneField& field,
                     const std::vector<Eigen::Matrix3Xd>& steps,
                     const std::vector<Eigen::VectorXd>& radii) {
    if (steps.size() != radii.size())
        throw LengthMismatch("min_clearance: steps/radii length mismatch");
    double best = std::numeric_limits<double>::infinity();
    for (size_t t = 0; t < steps.size(); ++t)
        for (long i = 0; i < steps[t].cols(); ++i)
            best = std::min(best,
                            field_distance(field, steps[t].col(i)) - radii[t][i]);
    return best;
}

} // namespace jfto
