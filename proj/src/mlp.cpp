#include "jfto/mlp.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "jfto/random.hpp"

namespace jfto {

namespace {

void check_widths(const std::vector<int>& widths) {
    if (widths.size() < 2) throw ShapeMismatch("mlp needs at least two widths");
    for (int w : widths)
        if (w <= 0) throw ShapeMismatch("mlp widths must be positive");
}

} // namespace

std::vector<MatrixXd*> Mlp::parameters() {
    std::vector<MatrixXd*> out;
    for (size_t i = 0; i < weights.size(); ++i) {
        out.push_back(&weights[i]);
        out.push_back(&biases[i]);
    }
    return out;
}

std::vector<const MatrixXd*> Mlp::parameters() const {
    std::vector<const MatrixXd*> out;
    for (size_t i = 0; i < weights.size(); ++i) {
        out.push_back(&weights[i]);
        out.push_back(&biases[i]);
    }
    return out;
}

Mlp make_mlp(const std::vector<int>& widths, std::uint64_t seed) {
    check_widths(widths);
    Mlp net;
    net.widths = widths;
    Rng rng = make_rng(seed);
    for (size_t l = 0; l + 1 < widths.size(); ++l) {
        const int in = widths[l], out = widths[l + 1];
        const double bound = 1.0 / std::sqrt(static_cast<double>(in));
        MatrixXd w(out, in);
        for (int c = 0; c < in; ++c)
            for (int r = 0; r < out; ++r) w(r, c) = uniform(rng, -bound, bound);
        net.weights.push_back(std::move(w));
        net.biases.push_back(MatrixXd::Zero(out, 1));
    }
    return net;
}

Mlp make_zero_mlp(const std::vector<int>& widths) {
    check_widths(widths);
    Mlp net;
    net.widths = widths;
    for (size_t l = 0; l + 1 < widths.size(); ++l) {
        net.weights.push_back(MatrixXd::Zero(widths[l + 1], widths[l]));
        net.biases.push_back(MatrixXd::Zero(widths[l + 1], 1));
    }
    return net;
}

MatrixXd forward(const Mlp& net, const MatrixXd& x) {
    if (x.rows() != net.input_size())
        throw ShapeMismatch("forward: input has " + std::to_string(x.rows()) +
                            " rows, net expects " + std::to_string(net.input_size()));
    MatrixXd a = x;
    const int last = net.layer_count() - 1;
    for (int l = 0; l <= last; ++l) {
        MatrixXd z = (net.weights[l] * a).colwise() + net.biases[l].col(0);
        a = (l < last) ? z.array().tanh().matrix() : std::move(z);
    }
    return a;
}

VectorXd forward(const Mlp& net, const VectorXd& x) {
    return forward(net, MatrixXd(x)).col(0);
}

MatrixXd forward_trace(const Mlp& net, const MatrixXd& x, ForwardTrace& trace) {
    if (x.rows() != net.input_size())
        throw ShapeMismatch("forward_trace: input width mismatch");
    trace.layer_inputs.clear();
    MatrixXd a = x;
    const int last = net.layer_count() - 1;
    for (int l = 0; l <= last; ++l) {
        trace.layer_inputs.push_back(a);
        MatrixXd z = (net.weights[l] * a).colwise() + net.biases[l].col(0);
        a = (l < last) ? z.array().tanh().matrix() : std::move(z);
    }
    trace.output = a;
    return a;
}

MlpGrad zero_grad_like(const Mlp& net) {
    MlpGrad g;
    for (int l = 0; l < net.layer_count(); ++l) {
        g.weights.push_back(MatrixXd::Zero(net.weights[l].rows(), net.weights[l].cols()));
        g.biases.push_back(MatrixXd::Zero(net.biases[l].rows(), 1));
    }
    return g;
}

MatrixXd backward(const Mlp& net, const ForwardTrace& trace,
                  const MatrixXd& output_grad, MlpGrad& grad) {
    const int last = net.layer_count() - 1;
    if (output_grad.rows() != net.output_size())
        throw ShapeMismatch("backward: output gradient width mismatch");

    MatrixXd delta = output_grad;  // dL/dz for the current layer
    for (int l = last; l >= 0; --l) {
        if (l < last) {
            // activation of layer l is the input recorded for layer l+1
            const MatrixXd& act = trace.layer_inputs[l + 1];
            delta = delta.cwiseProduct(
                (1.0 - act.array().square()).matrix());
        }
        grad.weights[l].noalias() += delta * trace.layer_inputs[l].transpose();
        grad.biases[l].col(0).noalias() += delta.rowwise().sum();
        if (l > 0) delta = net.weights[l].transpose() * delta;
    }
    return net.weights[0].transpose() * delta;
}

double grad_params(const Mlp& net, const MatrixXd& batch,
                   const std::function<double(const MatrixXd&, MatrixXd&)>& loss,
                   MlpGrad& grad) {
    ForwardTrace trace;
    const MatrixXd y = forward_trace(net, batch, trace);
    MatrixXd dy = MatrixXd::Zero(y.rows(), y.cols());
    const double value = loss(y, dy);
    backward(net, trace, dy, grad);
    return value;
}

MatrixXd forward_multi_jvp(const Mlp& net, const MatrixXd& x,
                           const MatrixXd& dirs,
                           std::vector<MatrixXd>& tangents) {
    if (x.rows() != net.input_size() || dirs.rows() != net.input_size())
        throw ShapeMismatch("forward_multi_jvp: input width mismatch");
    const int cols = static_cast<int>(x.cols());
    const int ndir = static_cast<int>(dirs.cols());
    const int last = net.layer_count() - 1;

    MatrixXd a = x;
    // tangent bundle: blocks of `cols` columns, one block per direction
    MatrixXd tan(net.input_size(), static_cast<long>(cols) * ndir);
    for (int d = 0; d < ndir; ++d)
        tan.middleCols(static_cast<long>(d) * cols, cols).colwise() = dirs.col(d);

    for (int l = 0; l <= last; ++l) {
        MatrixXd z = (net.weights[l] * a).colwise() + net.biases[l].col(0);
        tan = net.weights[l] * tan;
        if (l < last) {
            a = z.array().tanh().matrix();
            const Eigen::ArrayXXd deriv = 1.0 - a.array().square();
            for (int d = 0; d < ndir; ++d)
                tan.middleCols(static_cast<long>(d) * cols, cols).array() *= deriv;
        } else {
            a = std::move(z);
        }
    }
    tangents.resize(ndir);
    for (int d = 0; d < ndir; ++d)
        tangents[d] = tan.middleCols(static_cast<long>(d) * cols, cols);
    return a;
}

MatrixXd jacobian_input(const Mlp& net, const VectorXd& x) {
    const int n = net.input_size();
    std::vector<MatrixXd> tangents;
    forward_multi_jvp(net, MatrixXd(x), MatrixXd::Identity(n, n), tangents);
    MatrixXd jac(net.output_size(), n);
    for (int d = 0; d < n; ++d) jac.col(d) = tangents[d].col(0);
    return jac;
}

AdamState make_adam(const std::vector<const MatrixXd*>& params, const AdamConfig& cfg) {
    AdamState st;
    st.cfg = cfg;
    for (const MatrixXd* p : params) {
        st.m.push_back(MatrixXd::Zero(p->rows(), p->cols()));
        st.v.push_back(MatrixXd::Zero(p->rows(), p->cols()));
    }
    return st;
}

void adam_step(const std::vector<MatrixXd*>& params,
               const std::vector<const MatrixXd*>& grads, AdamState& state) {
    if (params.size() != grads.size() || params.size() != state.m.size())
        throw ShapeMismatch("adam_step: parameter/gradient count mismatch");
    state.step += 1;
    const double c1 = 1.0 - std::pow(state.cfg.beta1, static_cast<double>(state.step));
    const double c2 = 1.0 - std::pow(state.cfg.beta2, static_cast<double>(state.step));
    for (size_t i = 0; i < params.size(); ++i) {
        MatrixXd& p = *params[i];
        const MatrixXd& g = *grads[i];
        if (p.rows() != g.rows() || p.cols() != g.cols())
            throw ShapeMismatch("adam_step: gradient shape mismatch");
        state.m[i] = state.cfg.beta1 * state.m[i] + (1.0 - state.cfg.beta1) * g;
        state.v[i] = state.cfg.beta2 * state.v[i].array().matrix() +
                     (1.0 - state.cfg.beta2) * g.cwiseProduct(g);
        const Eigen::ArrayXXd mhat = state.m[i].array() / c1;
        const Eigen::ArrayXXd vhat = state.v[i].array() / c2;
        p.array() -= state.cfg.lr * mhat / (vhat.sqrt() + state.cfg.eps);
    }
}

nlohmann::json mlp_to_json(const Mlp& net) {
    nlohmann::json j;
    j["schema"] = "jfto-mlp/1";
    j["widths"] = net.widths;
    j["activation"] = "tanh";
    auto dump = [](const MatrixXd& m) {
        std::vector<double> flat;
        flat.reserve(m.size());
        for (int r = 0; r < m.rows(); ++r)          // row-major
            for (int c = 0; c < m.cols(); ++c) flat.push_back(m(r, c));
        return flat;
    };
    for (int l = 0; l < net.layer_count(); ++l) {
        j["weights"].push_back(dump(net.weights[l]));
        j["biases"].push_back(dump(net.biases[l]));
    }
    return j;
}

Mlp mlp_from_json(const nlohmann::json& j) {
    if (!j.contains("schema") || j.at("schema") != "jfto-mlp/1")
        throw SchemaVersionMismatch("unsupported mlp checkpoint schema");
    if (j.at("activation") != "tanh")
        throw ValidationFailure("activation", "unknown activation id");
    Mlp net = make_zero_mlp(j.at("widths").get<std::vector<int>>());
    const auto& ws = j.at("weights");
    const auto& bs = j.at("biases");
    if (static_cast<int>(ws.size()) != net.layer_count() ||
        static_cast<int>(bs.size()) != net.layer_count())
        throw ShapeMismatch("checkpoint layer count mismatch");
    for (int l = 0; l < net.layer_count(); ++l) {
        const auto w = ws[l].get<std::vector<double>>();
        const auto b = bs[l].get<std::vector<double>>();
        MatrixXd& wm = net.weights[l];
        if (static_cast<long>(w.size()) != wm.size() ||
            static_cast<long>(b.size()) != wm.rows())
            throw ShapeMismatch("checkpoint weight shape mismatch at layer " +
                                std::to_string(l));
        for (int r = 0; r < wm.rows(); ++r)
            for (int c = 0; c < wm.cols(); ++c) wm(r, c) = w[r * wm.cols() + c];
        for (int r = 0; r < wm.rows(); ++r) net.biases[l](r, 0) = b[r];
    }
    return net;
}

} // namespace jfto
