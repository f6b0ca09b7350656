#ifndef JFTO_FLOW_HPP
#define JFTO_FLOW_HPP

// Flow matching over the 6D pose chart. One velocity network, conditioned on
// flow time and the normalized demonstration timestep, models every
// per-timestep pose distribution. Sampling integrates the learned ODE
// forward; log-densities integrate it backward while accumulating the exact
// divergence (trace of the input Jacobian, six forward-mode passes).
//
// Internally the chart is re-centered per timestep and whitened per
// dimension, so the base distribution is a standard Gaussian regardless of
// the demo units; reported densities are always w.r.t. the un-whitened chart
// coordinates.

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "jfto/mlp.hpp"
#include "jfto/se3.hpp"

#include <nlohmann/json_fwd.hpp>

namespace jfto {

struct DemoSet {
    std::vector<std::vector<Pose>> demos;   // n trajectories of T+1 poses

    int count() const { return static_cast<int>(demos.size()); }
    int horizon() const;                    // T; validates equal lengths
};

struct FlowTrainConfig {
    std::vector<int> hidden = {64, 64};
    int train_steps = 4000;
    int batch = 128;
    double lr = 1e-3;
    double lr_final_fraction = 0.1;   // linear decay toward lr * fraction
    int ode_steps = 40;
    double scale_floor = 1e-3;
};

struct FlowDensityModel {
    Mlp net;                      // 8 inputs (chart, tau, t/T) -> 6 velocities
    std::vector<Pose> centers;    // chart center per timestep
    Vector6 scale;                // per-dimension whitening scale
    int ode_steps = 40;
    double final_loss = 0.0;

    int horizon() const { return static_cast<int>(centers.size()) - 1; }
};

// Chart center per timestep: translation at the demo mean, rotation
// re-centered at the Karcher mean once any demo rotation exceeds 2.5 rad
// from identity.
std::vector<Pose> compute_chart_centers(const DemoSet& demos);

FlowDensityModel train_flow(const DemoSet& demos, const FlowTrainConfig& cfg,
                            std::uint64_t seed);

std::vector<Pose> sample(const FlowDensityModel& model, int t, int count,
                         std::uint64_t seed);

double log_density(const FlowDensityModel& model, const Pose& x, int t);

// Batched evaluation; ode_steps_override <= 0 uses the model's step count.
Eigen::VectorXd log_density_many(const FlowDensityModel& model,
                                 const std::vector<Pose>& poses,
                                 const std::vector<int>& ts,
                                 int ode_steps_override = 0);

// Gradient of log_density w.r.t. the 6 chart coordinates of x (central
// differences, step 1e-4).
Vector6 log_density_grad(const FlowDensityModel& model, const Pose& x, int t);

// Value and chart gradient for a batch of poses in one integration pass.
// `central` selects central differences (step 1e-4) or cheaper one-sided
// differences (step 1e-3) for optimization inner loops.
struct DensityEval {
    Eigen::VectorXd value;
    Eigen::MatrixXd grad;   // 6 x N
};
DensityEval log_density_value_and_grad_many(const FlowDensityModel& model,
                                            const std::vector<Pose>& poses,
                                            const std::vector<int>& ts,
                                            int ode_steps_override = 0,
                                            bool central = true);

nlohmann::json flow_to_json(const FlowDensityModel& model);
FlowDensityModel flow_from_json(const nlohmann::json& j);
FlowDensityModel load_flow(const std::string& path);
void save_flow(const FlowDensityModel& model, const std::string& path);

} // namespace jfto

#endif
