#pragma once

// Reverse-mode differentiation over small fully connected networks, and Adam.
//
// Batches are row-major in the sense of "one sample per row": an input batch
// of n two-dimensional points is an n x 2 matrix. Layer k maps width[k] to
// width[k+1] with weight shape (width[k+1] x width[k]).

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "apa/rng.hpp"

namespace apa {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kLeakySlope = 0.2;

struct LayerParams {
    Matrix weight;
    Vector bias;
};

/// Same shapes as a network's parameters; used for gradients and Adam moments.
using ParameterSet = std::vector<LayerParams>;

struct ParameterId {
    std::size_t layer = 0;
    bool is_bias = false;
    std::size_t row = 0;
    std::size_t col = 0;

    std::string to_string() const;
};

/// Multilayer perceptron. Hidden layers use a leaky rectifier with slope 0.2;
/// the output layer is linear.
class DifferentiableNet {
public:
    /// Zero-initialised weights and biases.
    explicit DifferentiableNet(std::vector<std::size_t> layer_widths);

    /// Weights ~ N(0, 2 / fan_in), biases zero, drawn row by row from `rng`.
    static DifferentiableNet he_normal(std::vector<std::size_t> layer_widths, Rng& rng);

    const std::vector<std::size_t>& layer_widths() const { return widths_; }
    std::size_t input_width() const { return widths_.front(); }
    std::size_t output_width() const { return widths_.back(); }
    std::size_t layer_count() const { return layers_.size(); }

    const ParameterSet& layers() const { return layers_; }
    ParameterSet& layers() { return layers_; }

    std::size_t parameter_count() const;
    ParameterId parameter_id(std::size_t flat_index) const;
    double& parameter(std::size_t flat_index);
    double parameter(std::size_t flat_index) const;

    std::vector<double> forward(std::span<const double> input) const;
    Matrix forward(const Matrix& batch) const;

private:
    std::vector<std::size_t> widths_;
    ParameterSet layers_;
};

ParameterSet zeros_like(const ParameterSet& params);
std::vector<double> flatten(const ParameterSet& params);

// Shared by the tape and the plain forward so both give bit-identical values.
Matrix affine_forward(const Matrix& x, const Matrix& weight, std::span<const double> bias);
double leaky_relu(double x, double slope = kLeakySlope);
double leaky_relu_derivative(double x, double slope = kLeakySlope);
double softplus(double x);
double sigmoid(double x);

/// Handle to a node on a Tape.
struct Var {
    std::size_t id = 0;
};

/// Records matrix-valued operations and replays them backwards.
///
/// Nodes are appended in evaluation order, so the reverse of the node list is
/// a valid topological order for backpropagation. Nodes that do not depend on
/// any trainable leaf never receive gradient storage.
class Tape {
public:
    Var constant(Matrix value);
    Var leaf(Matrix value, bool requires_grad = true);

    Var affine(Var x, Var weight, Var bias);
    Var leaky_relu(Var x, double slope = kLeakySlope);
    Var softplus(Var x);
    Var log(Var x);
    Var neg(Var x);
    Var scale(Var x, double factor);
    Var add_scalar(Var x, double c);
    Var add(Var a, Var b);
    Var sub(Var a, Var b);
    Var mul(Var a, Var b);
    Var mean(Var x);
    Var sum(Var x);

    const Matrix& value(Var v) const { return nodes_.at(v.id).value; }
    double scalar(Var v) const;
    bool requires_grad(Var v) const { return nodes_.at(v.id).requires_grad; }

    /// Gradient of the last backward() loss with respect to `v`. Zero for
    /// nodes that do not influence the loss.
    Matrix grad(Var v) const;

    /// Throws ShapeError if `loss` is not 1 x 1.
    void backward(Var loss);

    std::size_t size() const { return nodes_.size(); }

    /// Sign (x > 0) of every leaky-rectifier input, in tape order.
    std::vector<bool> activation_pattern() const;

private:
    enum class Op { Leaf, Affine, LeakyRelu, Softplus, Log, Neg, Scale, AddScalar, Add, Sub, Mul, Mean, Sum };

    struct Node {
        Op op = Op::Leaf;
        Matrix value;
        Matrix grad;
        bool requires_grad = false;
        std::size_t a = 0;
        std::size_t b = 0;
        std::size_t c = 0;
        double aux = 0.0;
    };

    Var push(Node node);
    void same_shape(Var a, Var b, const char* op) const;
    void accumulate(std::size_t id, const Matrix& g);

    std::vector<Node> nodes_;
    bool has_grads_ = false;
};

/// Leaves for one network's parameters on a tape.
struct NetBinding {
    std::vector<Var> weights;
    std::vector<Var> biases;
};

NetBinding bind(Tape& tape, const DifferentiableNet& net, bool trainable = true);
Var forward(Tape& tape, const NetBinding& binding, Var input);
ParameterSet gradients(const Tape& tape, const NetBinding& binding);

struct OptimizerState {
    std::int64_t step_count = 0;
    ParameterSet first_moment;
    ParameterSet second_moment;
    double learning_rate = 1e-3;
    double beta1 = 0.0;
    double beta2 = 0.99;
    double epsilon = 1e-8;

    static OptimizerState for_net(const DifferentiableNet& net, double learning_rate);
};

/// One bias-corrected Adam update. Throws NonFiniteError (naming the
/// parameter) before touching anything if a gradient is NaN or infinite.
void adam_step(DifferentiableNet& net, const ParameterSet& grads, OptimizerState& state);

}  // namespace apa
