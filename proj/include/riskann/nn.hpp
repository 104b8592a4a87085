#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "riskann/label.hpp"
#include "riskann/linalg.hpp"

namespace riskann::nn {

using linalg::Matrix;
using linalg::Vector;

/// Inputs beyond this magnitude saturate the transfer function to +/-1.
inline constexpr double kSaturation = 20.0;

/// Hyperbolic tangent sigmoid, (e^n - e^-n) / (e^n + e^-n).
double tanh_eval(double n) noexcept;

/// 1 - f(n)^2.
double tanh_deriv(double n) noexcept;

/// Identity exists for linear least-squares checks of the trainers; models
/// built by the toolkit always use tanh.
enum class Transfer { tanh, identity };

double transfer_eval(Transfer transfer, double n) noexcept;
double transfer_deriv(Transfer transfer, double n) noexcept;

/// Per-feature range used to map raw inputs onto [-1, 1].
struct FeatureRange {
  double min = 0.0;
  double max = 1.0;

  bool operator==(const FeatureRange&) const = default;
};

/// Multilayer perceptron. weights[m] maps layer m onto layer m + 1 and has
/// shape layer_sizes[m + 1] x layer_sizes[m].
struct Network {
  std::vector<std::size_t> layer_sizes;
  std::vector<Matrix> weights;
  std::vector<Vector> biases;
  Transfer transfer = Transfer::tanh;
  std::vector<FeatureRange> norm;  // empty: inputs are used as given
  ClassOrder class_order = kDefaultClassOrder;
  std::uint64_t seed = 0;

  std::size_t weighted_layers() const noexcept { return weights.size(); }
  std::size_t input_size() const noexcept { return layer_sizes.front(); }
  std::size_t output_size() const noexcept { return layer_sizes.back(); }
  std::size_t parameter_count() const noexcept;

  /// Throws ShapeError/ParameterError if the layout is inconsistent or any
  /// parameter is non-finite.
  void validate() const;

  bool operator==(const Network&) const = default;
};

inline const std::vector<std::size_t> kDefaultTopology{17, 25, 2};

/// Draws every weight and bias uniformly from [-0.5, 0.5). Draw order is
/// layer by layer; within a layer the weights row-major, then the biases.
Network init_network(std::span<const std::size_t> layer_sizes, std::uint64_t seed);

/// Parameters flattened layer-major: W^1 row-major, b^1, W^2, b^2, ...
/// Jacobian columns and gradient vectors use this order.
Vector parameters(const Network& net);
void set_parameters(Network& net, std::span<const double> values);

struct ForwardTrace {
  std::vector<Vector> net_inputs;   // n^1 .. n^M
  std::vector<Vector> activations;  // a^0 = p .. a^M

  const Vector& output() const noexcept { return activations.back(); }
};

ForwardTrace forward(const Network& net, std::span<const double> input);

/// Network output for an input already in network scale.
Vector predict(const Network& net, std::span<const double> input);

/// Sum of squares over count: sum(e_i^2) / N.
double mse(std::span<const double> errors);

struct TrainingPair {
  Vector input;   // normalized to [-1, 1]
  Vector target;  // +1 at the true class, -1 elsewhere
};

/// One-hot target in {-1, +1} laid out by class order.
Vector encode_target(Label label, const ClassOrder& order = kDefaultClassOrder);

/// Mean over the batch of per-sample e^T e, with e = t - a.
double batch_mse(const Network& net, std::span<const TrainingPair> batch);

/// s^M = -2 F'(n^M) (t - a).
Vector output_sensitivity(const Network& net, const ForwardTrace& trace,
                          std::span<const double> target);

/// layers[m - 1] holds s^m for m = 1..M.
struct Sensitivity {
  std::vector<Vector> layers;
};

/// Runs s^m = F'(n^m) (W^{m+1})^T s^{m+1} backward from the output layer.
Sensitivity backprop_sensitivities(const Network& net, const ForwardTrace& trace,
                                   std::span<const double> output);

struct Gradient {
  std::vector<Matrix> weights;
  std::vector<Vector> biases;

  /// Same order as parameters().
  Vector flatten() const;
};

/// Gradient of batch_mse: per-sample s^m (a^{m-1})^T and s^m averaged over
/// the batch.
Gradient gradient(const Network& net, std::span<const TrainingPair> batch);

struct ErrorJacobian {
  Matrix jacobian;  // rows: sample-major, output-minor; columns: parameters()
  Vector errors;    // t - a stacked the same way
};

/// Jacobian of the stacked error vector with respect to every parameter.
/// The gradient of the batch sum of squared errors equals 2 J^T e.
ErrorJacobian jacobian_lm(const Network& net, std::span<const TrainingPair> batch);

/// Min-max ranges of each column of `rows`.
std::vector<FeatureRange> fit_normalization(std::span<const Vector> rows);

/// Maps raw features onto [-1, 1] with the network's ranges, clipping values
/// outside the training range. A constant feature maps to 0.
Vector normalize_input(const Network& net, std::span<const double> raw);

inline constexpr int kModelFormatVersion = 1;

nlohmann::ordered_json to_json(const Network& net);
Network network_from_json(const nlohmann::json& json);

}  // namespace riskann::nn
