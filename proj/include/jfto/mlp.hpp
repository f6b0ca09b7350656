#ifndef JFTO_MLP_HPP
#define JFTO_MLP_HPP

// Minimal dense feed-forward network with exact reverse-mode parameter
// gradients and exact forward-mode input derivatives. Hidden layers use
// tanh (everything downstream differentiates through this net, so the
// activation must be smooth); the output layer is linear. Columns are
// samples throughout.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "jfto/errors.hpp"

#include <nlohmann/json_fwd.hpp>

namespace jfto {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class Activation { Tanh };

struct Mlp {
    std::vector<int> widths;              // input, hidden..., output
    std::vector<MatrixXd> weights;        // per layer, out x in
    std::vector<MatrixXd> biases;         // per layer, out x 1
    Activation activation = Activation::Tanh;

    int input_size() const { return widths.front(); }
    int output_size() const { return widths.back(); }
    int layer_count() const { return static_cast<int>(weights.size()); }

    std::vector<MatrixXd*> parameters();
    std::vector<const MatrixXd*> parameters() const;
};

// Scaled-uniform fan-in initialization, deterministic per seed.
Mlp make_mlp(const std::vector<int>& widths, std::uint64_t seed);
Mlp make_zero_mlp(const std::vector<int>& widths);

VectorXd forward(const Mlp& net, const VectorXd& x);
MatrixXd forward(const Mlp& net, const MatrixXd& x);

// Layer activations captured during a forward pass, for reuse by backward().
struct ForwardTrace {
    std::vector<MatrixXd> layer_inputs;   // input to each layer
    MatrixXd output;
};

MatrixXd forward_trace(const Mlp& net, const MatrixXd& x, ForwardTrace& trace);

struct MlpGrad {
    std::vector<MatrixXd> weights;
    std::vector<MatrixXd> biases;
};

MlpGrad zero_grad_like(const Mlp& net);

// Reverse mode: given dL/dY for the traced batch, accumulates parameter
// gradients into `grad` and returns dL/dX.
MatrixXd backward(const Mlp& net, const ForwardTrace& trace,
                  const MatrixXd& output_grad, MlpGrad& grad);

// Convenience wrapper: runs the batch forward, lets `loss` fill dL/dY, and
// returns the loss value with parameter gradients in `grad`.
double grad_params(const Mlp& net, const MatrixXd& batch,
                   const std::function<double(const MatrixXd& y, MatrixXd& dy)>& loss,
                   MlpGrad& grad);

// Forward mode for a bundle of input directions shared across all columns:
// dirs is n x D; tangents[d] receives J(x_col) * dirs.col(d) for every
// column. Returns the primal outputs.
MatrixXd forward_multi_jvp(const Mlp& net, const MatrixXd& x,
                           const MatrixXd& dirs,
                           std::vector<MatrixXd>& tangents);

// Exact m x n input Jacobian at a single point (n forward-mode passes).
MatrixXd jacobian_input(const Mlp& net, const VectorXd& x);

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    AdamConfig cfg;
    long step = 0;
    std::vector<MatrixXd> m;   // first moments, one per parameter block
    std::vector<MatrixXd> v;   // second moments
};

AdamState make_adam(const std::vector<const MatrixXd*>& params, const AdamConfig& cfg);

void adam_step(const std::vector<MatrixXd*>& params,
               const std::vector<const MatrixXd*>& grads, AdamState& state);

// Versioned JSON checkpoint; loading validates widths against array shapes.
nlohmann::json mlp_to_json(const Mlp& net);
Mlp mlp_from_json(const nlohmann::json& j);

} // namespace jfto

#endif
