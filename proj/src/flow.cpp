#include "jfto/flow.hpp"

#include <cmath>
#include <fstream>
#include <iostream>

#include <nlohmann/json.hpp>

#include "jfto/errors.hpp"
#include "jfto/random.hpp"

namespace jfto {

int DemoSet::horizon() const {
    if (demos.empty()) throw EmptyDemoSet("demo set has no trajectories");
    const size_t len = demos.front().size();
    for (size_t i = 0; i < demos.size(); ++i)
        if (demos[i].size() != len)
            throw ValidationFailure("demos[" + std::to_string(i) + "]",
                                    "trajectories must share one horizon");
    if (len == 0) throw ValidationFailure("demos", "empty trajectory");
    return static_cast<int>(len) - 1;
}

std::vector<Pose> compute_chart_centers(const DemoSet& demos) {
    const int T = demos.horizon();
    std::vector<Pose> centers(T + 1);
    for (int t = 0; t <= T; ++t) {
        Vector3 mean_t = Vector3::Zero();
        double max_angle = 0.0;
        std::vector<Eigen::Quaterniond> rots;
        for (const auto& d : demos.demos) {
            mean_t += d[t].translation;
            max_angle = std::max(max_angle,
                                 rotation_angle(d[t].rotation,
                                                Eigen::Quaterniond::Identity()));
            rots.push_back(d[t].rotation);
        }
        centers[t].translation = mean_t / static_cast<double>(demos.count());
        centers[t].rotation = (max_angle > 2.5) ? karcher_mean_rotation(rots)
                                                : Eigen::Quaterniond::Identity();
    }
    return centers;
}

namespace {

double normalized_timestep(int t, int horizon) {
    return static_cast<double>(t) / std::max(1, horizon);
}

// Velocity and divergence of the learned field for a batch of whitened chart
// states at a shared flow time tau.
struct FieldEval {
    MatrixXd velocity;        // 6 x N
    Eigen::RowVectorXd div;   // 1 x N
};

FieldEval eval_field(const Mlp& net, const MatrixXd& z,
                     const Eigen::RowVectorXd& tnorm, double tau,
                     bool with_divergence) {
    const long n = z.cols();
    MatrixXd input(8, n);
    input.topRows(6) = z;
    input.row(6).setConstant(tau);
    input.row(7) = tnorm;

    FieldEval out;
    if (!with_divergence) {
        out.velocity = forward(net, input);
        return out;
    }
    MatrixXd dirs = MatrixXd::Zero(8, 6);
    dirs.topRows(6).setIdentity();
    std::vector<MatrixXd> tangents;
    out.velocity = forward_multi_jvp(net, input, dirs, tangents);
    out.div = Eigen::RowVectorXd::Zero(n);
    for (int d = 0; d < 6; ++d) out.div += tangents[d].row(d);
    return out;
}

// Backward integration of the flow from tau=1 to tau=0 with divergence
// accumulation; returns log pi0(z0) - integral of div over [0,1].
Eigen::VectorXd integrate_log_density(const Mlp& net, MatrixXd z,
                                      const Eigen::RowVectorXd& tnorm, int steps) {
    const long n = z.cols();
    Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(n);
    const double h = 1.0 / steps;
    const auto f = [&](const MatrixXd& zz, double sigma) {
        FieldEval e = eval_field(net, zz, tnorm, 1.0 - sigma, true);
        e.velocity = -e.velocity;
        return e;
    };
    for (int s = 0; s < steps; ++s) {
        const double sigma = s * h;   // reverse time, tau = 1 - sigma
        const FieldEval k1 = f(z, sigma);
        const FieldEval k2 = f(z + (h / 2) * k1.velocity, sigma + h / 2);
        const FieldEval k3 = f(z + (h / 2) * k2.velocity, sigma + h / 2);
        const FieldEval k4 = f(z + h * k3.velocity, sigma + h);
        z += (h / 6) * (k1.velocity + 2 * k2.velocity + 2 * k3.velocity + k4.velocity);
        acc += (h / 6) * (k1.div + 2 * k2.div + 2 * k3.div + k4.div);
    }
    // log N(z0; 0, I) minus the accumulated divergence
    Eigen::VectorXd logp(n);
    const double c = -0.5 * 6.0 * std::log(2.0 * M_PI);
    for (long i = 0; i < n; ++i)
        logp[i] = c - 0.5 * z.col(i).squaredNorm() - acc[i];
    return logp;
}

MatrixXd integrate_forward(const Mlp& net, MatrixXd z,
                           const Eigen::RowVectorXd& tnorm, int steps) {
    const double h = 1.0 / steps;
    for (int s = 0; s < steps; ++s) {
        const double tau = s * h;
        const MatrixXd k1 = eval_field(net, z, tnorm, tau, false).velocity;
        const MatrixXd k2 =
            eval_field(net, z + (h / 2) * k1, tnorm, tau + h / 2, false).velocity;
        const MatrixXd k3 =
            eval_field(net, z + (h / 2) * k2, tnorm, tau + h / 2, false).velocity;
        const MatrixXd k4 = eval_field(net, z + h * k3, tnorm, tau + h, false).velocity;
        z += (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    return z;
}

void check_timestep(const FlowDensityModel& model, int t) {
    if (t < 0 || t > model.horizon())
        throw LengthMismatch("timestep " + std::to_string(t) +
                             " outside model horizon " + std::to_string(model.horizon()));
}

// whitened chart coordinates of a pose at timestep t
Vector6 whiten(const FlowDensityModel& model, const Pose& x, int t) {
    return chart_at(model.centers[t], x).cwiseQuotient(model.scale);
}

double log_scale_correction(const FlowDensityModel& model) {
    return model.scale.array().log().sum();
}

} // namespace

FlowDensityModel train_flow(const DemoSet& demos, const FlowTrainConfig& cfg,
                            std::uint64_t seed) {
    const int T = demos.horizon();
    const int n = demos.count();
    if (n < 2) throw Error("train_flow: need at least two demonstrations");

    FlowDensityModel model;
    model.centers = compute_chart_centers(demos);
    model.ode_steps = cfg.ode_steps;

    // centered chart data, one column per (demo, timestep)
    MatrixXd data(6, static_cast<long>(n) * (T + 1));
    Eigen::RowVectorXd data_t(data.cols());
    long col = 0;
    for (int t = 0; t <= T; ++t) {
        for (const auto& d : demos.demos) {
            data.col(col) = chart_at(model.centers[t], d[t]);
            data_t[col] = normalized_timestep(t, T);
            ++col;
        }
        // all demos identical at this timestep: density will be a sharp peak
        const long base = static_cast<long>(t) * n;
        double spread = 0.0;
        for (int i = 1; i < n; ++i)
            spread = std::max(spread,
                              (data.col(base + i) - data.col(base)).cwiseAbs().maxCoeff());
        if (spread < 1e-12)
            std::cerr << "[train_flow] warning: degenerate demos at timestep " << t
                      << "; density will be sharply peaked\n";
    }

    for (int i = 0; i < 6; ++i) {
        const double mean = data.row(i).mean();
        const double var =
            (data.row(i).array() - mean).square().sum() / std::max<long>(1, data.cols() - 1);
        model.scale[i] = std::max(cfg.scale_floor, std::sqrt(var));
    }
    MatrixXd zdata = data;
    for (int i = 0; i < 6; ++i) zdata.row(i) /= model.scale[i];

    std::vector<int> widths;
    widths.push_back(8);
    for (int w : cfg.hidden) widths.push_back(w);
    widths.push_back(6);
    model.net = make_mlp(widths, derive_seed(seed, 0xF10A));

    Rng rng = make_rng(derive_seed(seed, 0xBA7C4));
    AdamConfig adam_cfg;
    adam_cfg.lr = cfg.lr;
    AdamState adam =
        make_adam(const_cast<const Mlp&>(model.net).parameters(), adam_cfg);
    std::uniform_int_distribution<long> pick(0, zdata.cols() - 1);

    for (int step = 0; step < cfg.train_steps; ++step) {
        const double progress = static_cast<double>(step) / std::max(1, cfg.train_steps);
        adam.cfg.lr = cfg.lr * (1.0 - (1.0 - cfg.lr_final_fraction) * progress);
        MatrixXd input(8, cfg.batch);
        MatrixXd target(6, cfg.batch);
        for (int b = 0; b < cfg.batch; ++b) {
            const long j = pick(rng);
            const Vector6 z1 = zdata.col(j);
            const Vector6 z0 = gaussian_vector(rng, 6);
            const double tau = uniform(rng, 0.0, 1.0);
            input.col(b).head<6>() = (1.0 - tau) * z0 + tau * z1;
            input(6, b) = tau;
            input(7, b) = data_t[j];
            target.col(b) = z1 - z0;   // time derivative of the straight-line path
        }
        MlpGrad grad = zero_grad_like(model.net);
        model.final_loss = grad_params(
            model.net, input,
            [&](const MatrixXd& y, MatrixXd& dy) {
                dy = 2.0 * (y - target) / cfg.batch;
                return (y - target).squaredNorm() / cfg.batch;
            },
            grad);
        std::vector<const MatrixXd*> gp;
        for (size_t i = 0; i < grad.weights.size(); ++i) {
            gp.push_back(&grad.weights[i]);
            gp.push_back(&grad.biases[i]);
        }
        adam_step(model.net.parameters(), gp, adam);
    }
    return model;
}

std::vector<Pose> sample(const FlowDensityModel& model, int t, int count,
                         std::uint64_t seed) {
    check_timestep(model, t);
    Rng rng = make_rng(seed);
    MatrixXd z = gaussian_matrix(rng, 6, count);
    const Eigen::RowVectorXd tnorm =
        Eigen::RowVectorXd::Constant(count, normalized_timestep(t, model.horizon()));
    z = integrate_forward(model.net, std::move(z), tnorm, model.ode_steps);
    std::vector<Pose> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i)
        out.push_back(chart_from(model.centers[t],
                                 Vector6(z.col(i).cwiseProduct(model.scale))));
    return out;
}

Eigen::VectorXd log_density_many(const FlowDensityModel& model,
                                 const std::vector<Pose>& poses,
                                 const std::vector<int>& ts,
                                 int ode_steps_override) {
    if (poses.size() != ts.size())
        throw LengthMismatch("log_density_many: poses/timesteps length mismatch");
    const int steps = ode_steps_override > 0 ? ode_steps_override : model.ode_steps;
    const long n = static_cast<long>(poses.size());
    MatrixXd z(6, n);
    Eigen::RowVectorXd tnorm(n);
    for (long i = 0; i < n; ++i) {
        check_timestep(model, ts[i]);
        z.col(i) = whiten(model, poses[i], ts[i]);
        tnorm[i] = normalized_timestep(ts[i], model.horizon());
    }
    Eigen::VectorXd logp = integrate_log_density(model.net, std::move(z), tnorm, steps);
    logp.array() -= log_scale_correction(model);
    return logp;
}

double log_density(const FlowDensityModel& model, const Pose& x, int t) {
    return log_density_many(model, {x}, {t})[0];
}

DensityEval log_density_value_and_grad_many(const FlowDensityModel& model,
                                            const std::vector<Pose>& poses,
                                            const std::vector<int>& ts,
                                            int ode_steps_override,
                                            bool central) {
    if (poses.size() != ts.size())
        throw LengthMismatch("density eval: poses/timesteps length mismatch");
    const int steps = ode_steps_override > 0 ? ode_steps_override : model.ode_steps;
    const long n = static_cast<long>(poses.size());
    const double h = central ? 1e-4 : 1e-3;
    const int per = central ? 13 : 7;   // base column plus perturbations

    MatrixXd z(6, n * per);
    Eigen::RowVectorXd tnorm(n * per);
    for (long i = 0; i < n; ++i) {
        check_timestep(model, ts[i]);
        const Vector6 chart = chart_at(model.centers[ts[i]], poses[i]);
        const double tn = normalized_timestep(ts[i], model.horizon());
        long c = i * per;
        z.col(c) = chart.cwiseQuotient(model.scale);
        tnorm[c] = tn;
        ++c;
        for (int d = 0; d < 6; ++d) {
            Vector6 vp = chart;
            vp[d] += h;
            z.col(c) = vp.cwiseQuotient(model.scale);
            tnorm[c] = tn;
            ++c;
            if (central) {
                Vector6 vm = chart;
                vm[d] -= h;
                z.col(c) = vm.cwiseQuotient(model.scale);
                tnorm[c] = tn;
                ++c;
            }
        }
    }

    const Eigen::VectorXd logp =
        integrate_log_density(model.net, std::move(z), tnorm, steps);

    DensityEval out;
    out.value.resize(n);
    out.grad.resize(6, n);
    const double correction = log_scale_correction(model);
    for (long i = 0; i < n; ++i) {
        const long c = i * per;
        out.value[i] = logp[c] - correction;
        if (central) {
            for (int d = 0; d < 6; ++d)
                out.grad(d, i) = (logp[c + 1 + 2 * d] - logp[c + 2 + 2 * d]) / (2 * h);
        } else {
            for (int d = 0; d < 6; ++d) out.grad(d, i) = (logp[c + 1 + d] - logp[c]) / h;
        }
    }
    return out;
}

Vector6 log_density_grad(const FlowDensityModel& model, const Pose& x, int t) {
    return log_density_value_and_grad_many(model, {x}, {t}, 0, true).grad.col(0);
}

nlohmann::json flow_to_json(const FlowDensityModel& model) {
    nlohmann::json j;
    j["schema"] = "jfto-flow/1";
    j["net"] = mlp_to_json(model.net);
    for (const Pose& c : model.centers) j["centers"].push_back(pose_to_array(c));
    j["scale"] = std::vector<double>(model.scale.data(), model.scale.data() + 6);
    j["ode_steps"] = model.ode_steps;
    j["final_loss"] = model.final_loss;
    return j;
}

FlowDensityModel flow_from_json(const nlohmann::json& j) {
    if (!j.contains("schema") || j.at("schema") != "jfto-flow/1")
        throw SchemaVersionMismatch("unsupported flow checkpoint schema");
    FlowDensityModel model;
    model.net = mlp_from_json(j.at("net"));
    if (model.net.input_size() != 8 || model.net.output_size() != 6)
        throw ShapeMismatch("flow net must map 8 inputs to 6 outputs");
    for (const auto& row : j.at("centers"))
        model.centers.push_back(pose_from_array(row.get<std::array<double, 7>>()));
    if (model.centers.empty())
        throw ValidationFailure("centers", "flow model needs chart centers");
    const auto scale = j.at("scale").get<std::vector<double>>();
    if (scale.size() != 6) throw ShapeMismatch("flow scale must have 6 entries");
    for (int i = 0; i < 6; ++i) {
        if (scale[i] <= 0.0)
            throw ValidationFailure("scale", "whitening scale must be positive");
        model.scale[i] = scale[i];
    }
    model.ode_steps = j.at("ode_steps").get<int>();
    model.final_loss = j.value("final_loss", 0.0);
    return model;
}

FlowDensityModel load_flow(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open flow checkpoint: " + path);
    nlohmann::json j;
    in >> j;
    return flow_from_json(j);
}

void save_flow(const FlowDensityModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write flow checkpoint: " + path);
    out << flow_to_json(model).dump() << "\n";
}

} // namespace jfto
