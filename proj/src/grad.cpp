#include "apa/grad.hpp"

#include <cmath>
#include <utility>

#include "apa/errors.hpp"

namespace apa {

std::string ParameterId::to_string() const {
    std::string s = "layer" + std::to_string(layer);
    if (is_bias) {
        return s + ".bias[" + std::to_string(row) + "]";
    }
    return s + ".weight[" + std::to_string(row) + "," + std::to_string(col) + "]";
}

DifferentiableNet::DifferentiableNet(std::vector<std::size_t> layer_widths) : widths_(std::move(layer_widths)) {
    if (widths_.size() < 2) {
        throw ShapeError("network needs at least an input and an output width");
    }
    for (std::size_t w : widths_) {
        if (w == 0) {
            throw ShapeError("layer widths must be positive");
        }
    }
    layers_.reserve(widths_.size() - 1);
    for (std::size_t k = 0; k + 1 < widths_.size(); ++k) {
        const auto rows = static_cast<Eigen::Index>(widths_[k + 1]);
        const auto cols = static_cast<Eigen::Index>(widths_[k]);
        layers_.push_back({Matrix::Zero(rows, cols), Vector::Zero(rows)});
    }
}

DifferentiableNet DifferentiableNet::he_normal(std::vector<std::size_t> layer_widths, Rng& rng) {
    DifferentiableNet net(std::move(layer_widths));
    for (auto& layer : net.layers_) {
        const double stddev = std::sqrt(2.0 / static_cast<double>(layer.weight.cols()));
        for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
            for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
                layer.weight(r, c) = stddev * rng.normal();
            }
        }
    }
    return net;
}

std::size_t DifferentiableNet::parameter_count() const {
    std::size_t n = 0;
    for (const auto& layer : layers_) {
        n += static_cast<std::size_t>(layer.weight.size() + layer.bias.size());
    }
    return n;
}

ParameterId DifferentiableNet::parameter_id(std::size_t flat_index) const {
    std::size_t i = flat_index;
    for (std::size_t k = 0; k < layers_.size(); ++k) {
        const auto& layer = layers_[k];
        const auto wsize = static_cast<std::size_t>(layer.weight.size());
        const auto cols = static_cast<std::size_t>(layer.weight.cols());
        if (i < wsize) {
            return {k, false, i / cols, i % cols};
        }
        i -= wsize;
        const auto bsize = static_cast<std::size_t>(layer.bias.size());
        if (i < bsize) {
            return {k, true, i, 0};
        }
        i -= bsize;
    }
    throw std::out_of_range("parameter index " + std::to_string(flat_index) + " out of range");
}

double& DifferentiableNet::parameter(std::size_t flat_index) {
    const ParameterId id = parameter_id(flat_index);
    auto& layer = layers_[id.layer];
    if (id.is_bias) {
        return layer.bias(static_cast<Eigen::Index>(id.row));
    }
    return layer.weight(static_cast<Eigen::Index>(id.row), static_cast<Eigen::Index>(id.col));
}

double DifferentiableNet::parameter(std::size_t flat_index) const {
    return const_cast<DifferentiableNet*>(this)->parameter(flat_index);
}

std::vector<double> DifferentiableNet::forward(std::span<const double> input) const {
    if (input.size() != input_width()) {
        throw ShapeError("layer 0: expected input width " + std::to_string(input_width()) + ", got " +
                         std::to_string(input.size()));
    }
    Matrix x(1, static_cast<Eigen::Index>(input.size()));
    for (std::size_t j = 0; j < input.size(); ++j) {
        x(0, static_cast<Eigen::Index>(j)) = input[j];
    }
    const Matrix y = forward(x);
    return std::vector<double>(y.data(), y.data() + y.size());
}

Matrix DifferentiableNet::forward(const Matrix& batch) const {
    if (static_cast<std::size_t>(batch.cols()) != input_width()) {
        throw ShapeError("layer 0: expected input width " + std::to_string(input_width()) + ", got " +
                         std::to_string(batch.cols()));
    }
    Matrix h = batch;
    for (std::size_t k = 0; k < layers_.size(); ++k) {
        const auto& layer = layers_[k];
        h = affine_forward(h, layer.weight, {layer.bias.data(), static_cast<std::size_t>(layer.bias.size())});
        if (k + 1 < layers_.size()) {
            h = h.unaryExpr([](double v) { return apa::leaky_relu(v); });
        }
    }
    return h;
}

ParameterSet zeros_like(const ParameterSet& params) {
    ParameterSet out;
    out.reserve(params.size());
    for (const auto& layer : params) {
        out.push_back({Matrix::Zero(layer.weight.rows(), layer.weight.cols()), Vector::Zero(layer.bias.size())});
    }
    return out;
}

std::vector<double> flatten(const ParameterSet& params) {
    std::vector<double> flat;
    for (const auto& layer : params) {
        for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
            for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
                flat.push_back(layer.weight(r, c));
            }
        }
        for (Eigen::Index r = 0; r < layer.bias.size(); ++r) {
            flat.push_back(layer.bias(r));
        }
    }
    return flat;
}

Matrix affine_forward(const Matrix& x, const Matrix& weight, std::span<const double> bias) {
    Matrix y = x * weight.transpose();
    y.rowwise() += Eigen::Map<const Eigen::RowVectorXd>(bias.data(), static_cast<Eigen::Index>(bias.size()));
    return y;
}

double leaky_relu(double x, double slope) {
    return x > 0.0 ? x : slope * x;
}

// At exactly zero the negative branch is taken, matching leaky_relu().
double leaky_relu_derivative(double x, double slope) {
    return x > 0.0 ? 1.0 : slope;
}

double softplus(double x) {
    return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

// --- Tape -------------------------------------------------------------------

Var Tape::push(Node node) {
    nodes_.push_back(std::move(node));
    has_grads_ = false;
    return Var{nodes_.size() - 1};
}

void Tape::same_shape(Var a, Var b, const char* op) const {
    const auto& va = value(a);
    const auto& vb = value(b);
    if (va.rows() != vb.rows() || va.cols() != vb.cols()) {
        throw ShapeError(std::string(op) + ": operand shapes differ (" + std::to_string(va.rows()) + "x" +
                         std::to_string(va.cols()) + " vs " + std::to_string(vb.rows()) + "x" +
                         std::to_string(vb.cols()) + ")");
    }
}

Var Tape::constant(Matrix value) {
    return leaf(std::move(value), false);
}

Var Tape::leaf(Matrix value, bool requires_grad) {
    Node n;
    n.op = Op::Leaf;
    n.value = std::move(value);
    n.requires_grad = requires_grad;
    return push(std::move(n));
}

Var Tape::affine(Var x, Var weight, Var bias) {
    const auto& vx = value(x);
    const auto& vw = value(weight);
    const auto& vb = value(bias);
    if (vx.cols() != vw.cols()) {
        throw ShapeError("affine: input width " + std::to_string(vx.cols()) + " does not match weight columns " +
                         std::to_string(vw.cols()));
    }
    if (vb.cols() != 1 || vb.rows() != vw.rows()) {
        throw ShapeError("affine: bias must be a column of " + std::to_string(vw.rows()) + " entries");
    }
    Node n;
    n.op = Op::Affine;
    n.value = affine_forward(vx, vw, {vb.data(), static_cast<std::size_t>(vb.size())});
    n.requires_grad = requires_grad(x) || requires_grad(weight) || requires_grad(bias);
    n.a = x.id;
    n.b = weight.id;
    n.c = bias.id;
    return push(std::move(n));
}

Var Tape::leaky_relu(Var x, double slope) {
    Node n;
    n.op = Op::LeakyRelu;
    n.value = value(x).unaryExpr([slope](double v) { return apa::leaky_relu(v, slope); });
    n.requires_grad = requires_grad(x);
    n.a = x.id;
    n.aux = slope;
    return push(std::move(n));
}

std::vector<bool> Tape::activation_pattern() const {
    std::vector<bool> pattern;
    for (const auto& n : nodes_) {
        if (n.op != Op::LeakyRelu) continue;
        const Matrix& x = nodes_[n.a].value;
        for (Eigen::Index i = 0; i < x.size(); ++i) pattern.push_back(x.data()[i] > 0.0);
    }
    return pattern;
}

Var Tape::softplus(Var x) {
    Node n;
    n.op = Op::Softplus;
    n.value = value(x).unaryExpr([](double v) { return apa::softplus(v); });
    n.requires_grad = requires_grad(x);
    n.a = x.id;
    return push(std::move(n));
}

Var Tape::log(Var x) {
    Node n;
    n.op = Op::Log;
    n.value = value(x).array().log().matrix();
    n.requires_grad = requires_grad(x);
    n.a = x.id;
    return push(std::move(n));
}

Var Tape::neg(Var x) {
    Node n;
    n.op = Op::Neg;
    n.value = -value(x);
    n.requires_grad = requires_grad(x);
    n.a = x.id;
    return push(std::move(n));
}

Var Tape::scale(Var x, double factor) {
    Node n;
    n.op = Op::Scale;
    n.value = factor * value(x);
    n.requires_grad = requires_grad(x);
    n.a = x.id;
    n.aux = factor;
    return push(std::move(n));
}

Var Tape::add_scalar(Var x, double c) {
    Node n;
    n.op = Op::AddScalar;
    n.value = (value(x).array() + c).matrix();
    n.requires_grad = requires_grad(x);
    n.a = x.id;
    n.aux = c;
    return push(std::move(n));
}

Var Tape::add(Var a, Var b) {
    same_shape(a, b, "add");
    Node n;
    n.op = Op::Add;
    n.value = value(a) + value(b);
    n.requires_grad = requires_grad(a) || requires_grad(b);
    n.a = a.id;
    n.b = b.id;
    return push(std::move(n));
}

Var Tape::sub(Var a, Var b) {
    same_shape(a, b, "sub");
    Node n;
    n.op = Op::Sub;
    n.value = value(a) - value(b);
    n.requires_grad = requires_grad(a) || requires_grad(b);
    n.a = a.id;
    n.b = b.id;
    return push(std::move(n));
}

Var Tape::mul(Var a, Var b) {
    same_shape(a, b, "mul");
    Node n;
    n.op = Op::Mul;
    n.value = value(a).cwiseProduct(value(b));
    n.requires_grad = requires_grad(a) || requires_grad(b);
    n.a = a.id;
    n.b = b.id;
    return push(std::move(n));
}

Var Tape::mean(Var x) {
    if (value(x).size() == 0) {
        throw ShapeError("mean: empty operand");
    }
    Node n;
    n.op = Op::Mean;
    n.value = Matrix::Constant(1, 1, value(x).mean());
    n.requires_grad = requires_grad(x);
    n.a = x.id;
    return push(std::move(n));
}

Var Tape::sum(Var x) {
    Node n;
    n.op = Op::Sum;
    n.value = Matrix::Constant(1, 1, value(x).sum());
    n.requires_grad = requires_grad(x);
    n.a = x.id;
    return push(std::move(n));
}

double Tape::scalar(Var v) const {
    const auto& m = value(v);
    if (m.size() != 1) {
        throw ShapeError("scalar: node is " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
    }
    return m(0, 0);
}

Matrix Tape::grad(Var v) const {
    const auto& n = nodes_.at(v.id);
    if (!has_grads_ || !n.requires_grad) {
        return Matrix::Zero(n.value.rows(), n.value.cols());
    }
    return n.grad;
}

void Tape::accumulate(std::size_t id, const Matrix& g) {
    auto& n = nodes_[id];
    if (n.requires_grad) {
        n.grad += g;
    }
}

void Tape::backward(Var loss) {
    const auto& lv = value(loss);
    if (lv.rows() != 1 || lv.cols() != 1) {
        throw ShapeError("backward: loss must be scalar, got " + std::to_string(lv.rows()) + "x" +
                         std::to_string(lv.cols()));
    }
    for (auto& n : nodes_) {
        if (n.requires_grad) {
            n.grad = Matrix::Zero(n.value.rows(), n.value.cols());
        } else {
            n.grad.resize(0, 0);
        }
    }
    has_grads_ = true;
    if (!nodes_[loss.id].requires_grad) {
        return;
    }
    nodes_[loss.id].grad(0, 0) = 1.0;

    for (std::size_t i = loss.id + 1; i-- > 0;) {
        const Node& n = nodes_[i];
        if (!n.requires_grad || n.op == Op::Leaf) {
            continue;
        }
        const Matrix& g = n.grad;
        switch (n.op) {
            case Op::Affine: {
                const Matrix& x = nodes_[n.a].value;
                const Matrix& w = nodes_[n.b].value;
                if (nodes_[n.a].requires_grad) {
                    nodes_[n.a].grad.noalias() += g * w;
                }
                if (nodes_[n.b].requires_grad) {
                    nodes_[n.b].grad.noalias() += g.transpose() * x;
                }
                if (nodes_[n.c].requires_grad) {
                    nodes_[n.c].grad += g.colwise().sum().transpose();
                }
                break;
            }
            case Op::LeakyRelu: {
                const double slope = n.aux;
                const Matrix d =
                    nodes_[n.a].value.unaryExpr([slope](double v) { return leaky_relu_derivative(v, slope); });
                accumulate(n.a, g.cwiseProduct(d));
                break;
            }
            case Op::Softplus: {
                const Matrix d = nodes_[n.a].value.unaryExpr([](double v) { return apa::sigmoid(v); });
                accumulate(n.a, g.cwiseProduct(d));
                break;
            }
            case Op::Log:
                accumulate(n.a, g.cwiseQuotient(nodes_[n.a].value));
                break;
            case Op::Neg:
                accumulate(n.a, -g);
                break;
            case Op::Scale:
                accumulate(n.a, n.aux * g);
                break;
            case Op::AddScalar:
                accumulate(n.a, g);
                break;
            case Op::Add:
                accumulate(n.a, g);
                accumulate(n.b, g);
                break;
            case Op::Sub:
                accumulate(n.a, g);
                accumulate(n.b, -g);
                break;
            case Op::Mul:
                accumulate(n.a, g.cwiseProduct(nodes_[n.b].value));
                accumulate(n.b, g.cwiseProduct(nodes_[n.a].value));
                break;
            case Op::Mean: {
                const Matrix& x = nodes_[n.a].value;
                const double share = g(0, 0) / static_cast<double>(x.size());
                accumulate(n.a, Matrix::Constant(x.rows(), x.cols(), share));
                break;
            }
            case Op::Sum: {
                const Matrix& x = nodes_[n.a].value;
                accumulate(n.a, Matrix::Constant(x.rows(), x.cols(), g(0, 0)));
                break;
            }
            case Op::Leaf:
                break;
        }
    }
}

// --- network binding ----------------------------------------------------------

NetBinding bind(Tape& tape, const DifferentiableNet& net, bool trainable) {
    NetBinding b;
    for (const auto& layer : net.layers()) {
        b.weights.push_back(tape.leaf(layer.weight, trainable));
        b.biases.push_back(tape.leaf(Matrix(layer.bias), trainable));
    }
    return b;
}

Var forward(Tape& tape, const NetBinding& binding, Var input) {
    Var h = input;
    const std::size_t layers = binding.weights.size();
    if (layers > 0 && tape.value(input).cols() != tape.value(binding.weights[0]).cols()) {
        throw ShapeError("layer 0: expected input width " + std::to_string(tape.value(binding.weights[0]).cols()) +
                         ", got " + std::to_string(tape.value(input).cols()));
    }
    for (std::size_t k = 0; k < layers; ++k) {
        h = tape.affine(h, binding.weights[k], binding.biases[k]);
        if (k + 1 < layers) {
            h = tape.leaky_relu(h);
        }
    }
    return h;
}

ParameterSet gradients(const Tape& tape, const NetBinding& binding) {
    ParameterSet out;
    for (std::size_t k = 0; k < binding.weights.size(); ++k) {
        Matrix gb = tape.grad(binding.biases[k]);
        out.push_back({tape.grad(binding.weights[k]), Vector(Eigen::Map<Vector>(gb.data(), gb.size()))});
    }
    return out;
}

// --- Adam ---------------------------------------------------------------------

OptimizerState OptimizerState::for_net(const DifferentiableNet& net, double learning_rate) {
    if (!(learning_rate > 0.0)) {
        throw ConfigError("learning_rate", "must be positive");
    }
    OptimizerState s;
    s.first_moment = zeros_like(net.layers());
    s.second_moment = zeros_like(net.layers());
    s.learning_rate = learning_rate;
    return s;
}

void adam_step(DifferentiableNet& net, const ParameterSet& grads, OptimizerState& state) {
    auto& params = net.layers();
    if (grads.size() != params.size() || state.first_moment.size() != params.size() ||
        state.second_moment.size() != params.size()) {
        throw ShapeError("adam_step: layer count mismatch");
    }
    for (std::size_t k = 0; k < params.size(); ++k) {
        if (grads[k].weight.rows() != params[k].weight.rows() || grads[k].weight.cols() != params[k].weight.cols() ||
            grads[k].bias.size() != params[k].bias.size()) {
            throw ShapeError("adam_step: gradient shape mismatch at layer " + std::to_string(k));
        }
    }
    const std::int64_t next_step = state.step_count + 1;
    {
        std::size_t flat = 0;
        for (const auto& layer : grads) {
            for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
                for (Eigen::Index c = 0; c < layer.weight.cols(); ++c, ++flat) {
                    if (!std::isfinite(layer.weight(r, c))) {
                        throw NonFiniteError(next_step, "gradient of " + net.parameter_id(flat).to_string());
                    }
                }
            }
            for (Eigen::Index r = 0; r < layer.bias.size(); ++r, ++flat) {
                if (!std::isfinite(layer.bias(r))) {
                    throw NonFiniteError(next_step, "gradient of " + net.parameter_id(flat).to_string());
                }
            }
        }
    }

    state.step_count = next_step;
    const double t = static_cast<double>(state.step_count);
    const double bc1 = 1.0 - std::pow(state.beta1, t);
    const double bc2 = 1.0 - std::pow(state.beta2, t);
    const double b1 = state.beta1;
    const double b2 = state.beta2;
    const double lr = state.learning_rate;
    const double eps = state.epsilon;

    auto update = [&](auto& param, const auto& g, auto& m, auto& v) {
        m = b1 * m + (1.0 - b1) * g;
        v = b2 * v + (1.0 - b2) * g.cwiseProduct(g);
        param.array() -= lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + eps);
    };
    for (std::size_t k = 0; k < params.size(); ++k) {
        update(params[k].weight, grads[k].weight, state.first_moment[k].weight, state.second_moment[k].weight);
        update(params[k].bias, grads[k].bias, state.first_moment[k].bias, state.second_moment[k].bias);
    }
}

}  // namespace apa
