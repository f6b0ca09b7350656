#ifndef JFTO_SCENE_FIELD_HPP
#define JFTO_SCENE_FIELD_HPP

// Background distance field over a fused static point cloud, plus the hinged
// collision score applied to robot body points. Distance queries are exact
// nearest-neighbor distances to the cloud; a smoothed soft-min variant is
// available where better-conditioned gradients are wanted.

#include <vector>

#include <Eigen/Core>

#include "jfto/kdtree.hpp"

namespace jfto {

struct SceneField {
    Eigen::Matrix3Xd points;
    KdTree3 index;
    double margin = 0.01;   // safety margin, meters
};

// Throws EmptyCloud when the cloud has no points.
SceneField build_field(const Eigen::Matrix3Xd& points, double margin = 0.01);

double field_distance(const SceneField& field, const Eigen::Vector3d& query);

int field_nearest(const SceneField& field, const Eigen::Vector3d& query);

// Subgradient of the distance w.r.t. the query point (unit vector away from
// the nearest obstacle; zero exactly on an obstacle point).
Eigen::Vector3d field_distance_grad(const SceneField& field,
                                    const Eigen::Vector3d& query);

// Soft-min over the k nearest obstacle distances at the given temperature.
double field_smooth_distance(const SceneField& field, const Eigen::Vector3d& query,
                             double temperature = 0.005, int k = 8);

// Hinged collision score over a rollout: per body point, points closer to an
// obstacle than the margin contribute (margin - dist)/margin; summed per
// step, averaged over the horizon T = steps-1.
double collision_score(const SceneField& field,
                       const std::vector<Eigen::Matrix3Xd>& body_points_per_step);

// Radius-aware variant for body points carrying collision radii: the hinge
// acts on the clearance dist - radius.
double collision_score(const SceneField& field,
                       const std::vector<Eigen::Matrix3Xd>& body_points_per_step,
                       const std::vector<Eigen::VectorXd>& radii_per_step);

// Smallest clearance (dist - radius) over every step and body point.
double min_clearance(const SceneField& field,
                     const std::vector<Eigen::Matrix3Xd>& body_points_per_step,
                     const std::vector<Eigen::VectorXd>& radii_per_step);

} // namespace jfto

#endif
