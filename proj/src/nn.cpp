#include "riskann/nn.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "riskann/error.hpp"
#include "riskann/rng.hpp"

namespace riskann::nn {

namespace {

void require_size(std::size_t got, std::size_t want, const char* what) {
  if (got != want) {
    std::ostringstream msg;
    msg << what << ": expected length " << want << ", got " << got;
    throw ShapeError(msg.str());
  }
}

void require_batch(std::span<const TrainingPair> batch, const char* op) {
  if (batch.empty()) {
    throw ParameterError(std::string(op) + ": empty batch");
  }
}

}  // namespace

double tanh_eval(double n) noexcept {
  if (n > kSaturation) {
    return 1.0;
  }
  if (n < -kSaturation) {
    return -1.0;
  }
  // Dividing numerator and denominator by e^|n| keeps the exponential below 1;
  // expm1 keeps full relative precision near the origin.
  const double em = std::expm1(-2.0 * std::abs(n));
  return std::copysign(-em / (2.0 + em), n);
}

double tanh_deriv(double n) noexcept {
  const double f = tanh_eval(n);
  return 1.0 - f * f;
}

double transfer_eval(Transfer transfer, double n) noexcept {
  return transfer == Transfer::tanh ? tanh_eval(n) : n;
}

double transfer_deriv(Transfer transfer, double n) noexcept {
  return transfer == Transfer::tanh ? tanh_deriv(n) : 1.0;
}

std::size_t Network::parameter_count() const noexcept {
  std::size_t count = 0;
  for (std::size_t m = 0; m + 1 < layer_sizes.size(); ++m) {
    count += layer_sizes[m + 1] * (layer_sizes[m] + 1);
  }
  return count;
}

void Network::validate() const {
  if (layer_sizes.size() < 2) {
    throw ParameterError("network needs at least an input and an output layer");
  }
  for (std::size_t size : layer_sizes) {
    if (size == 0) {
      throw ParameterError("layer sizes must be positive");
    }
  }
  const std::size_t layers = layer_sizes.size() - 1;
  if (weights.size() != layers || biases.size() != layers) {
    throw ShapeError("network has " + std::to_string(weights.size()) + " weight and " +
                     std::to_string(biases.size()) + " bias layers, expected " +
                     std::to_string(layers));
  }
  for (std::size_t m = 0; m < layers; ++m) {
    if (weights[m].rows() != layer_sizes[m + 1] || weights[m].cols() != layer_sizes[m]) {
      std::ostringstream msg;
      msg << "weight layer " << m << " is " << weights[m].rows() << "x" << weights[m].cols()
          << ", expected " << layer_sizes[m + 1] << "x" << layer_sizes[m];
      throw ShapeError(msg.str());
    }
    require_size(biases[m].size(), layer_sizes[m + 1], "bias layer");
    for (double w : weights[m].data()) {
      if (!std::isfinite(w)) {
        throw ParameterError("non-finite weight in layer " + std::to_string(m));
      }
    }
    for (double b : biases[m]) {
      if (!std::isfinite(b)) {
        throw ParameterError("non-finite bias in layer " + std::to_string(m));
      }
    }
  }
  if (!norm.empty()) {
    require_size(norm.size(), input_size(), "normalization ranges");
  }
}

Network init_network(std::span<const std::size_t> layer_sizes, std::uint64_t seed) {
  Network net;
  net.layer_sizes.assign(layer_sizes.begin(), layer_sizes.end());
  net.seed = seed;
  if (net.layer_sizes.size() < 2 ||
      std::find(net.layer_sizes.begin(), net.layer_sizes.end(), 0u) != net.layer_sizes.end()) {
    throw ParameterError("init_network: need at least two positive layer sizes");
  }

  Rng rng(seed);
  for (std::size_t m = 0; m + 1 < net.layer_sizes.size(); ++m) {
    Matrix w(net.layer_sizes[m + 1], net.layer_sizes[m]);
    for (double& x : w.data()) {
      x = rng.uniform(-0.5, 0.5);
    }
    Vector b(net.layer_sizes[m + 1]);
    for (double& x : b) {
      x = rng.uniform(-0.5, 0.5);
    }
    net.weights.push_back(std::move(w));
    net.biases.push_back(std::move(b));
  }
  return net;
}

Vector parameters(const Network& net) {
  Vector out;
  out.reserve(net.parameter_count());
  for (std::size_t m = 0; m < net.weighted_layers(); ++m) {
    const auto w = net.weights[m].data();
    out.insert(out.end(), w.begin(), w.end());
    out.insert(out.end(), net.biases[m].begin(), net.biases[m].end());
  }
  return out;
}

void set_parameters(Network& net, std::span<const double> values) {
  require_size(values.size(), net.parameter_count(), "set_parameters");
  auto it = values.begin();
  for (std::size_t m = 0; m < net.weighted_layers(); ++m) {
    auto w = net.weights[m].data();
    std::copy_n(it, w.size(), w.begin());
    it += static_cast<std::ptrdiff_t>(w.size());
    std::copy_n(it, net.biases[m].size(), net.biases[m].begin());
    it += static_cast<std::ptrdiff_t>(net.biases[m].size());
  }
}

ForwardTrace forward(const Network& net, std::span<const double> input) {
  require_size(input.size(), net.input_size(), "forward input");
  ForwardTrace trace;
  trace.activations.emplace_back(input.begin(), input.end());
  for (std::size_t m = 0; m < net.weighted_layers(); ++m) {
    Vector n = linalg::mat_vec(net.weights[m], trace.activations.back());
    Vector a(n.size());
    for (std::size_t i = 0; i < n.size(); ++i) {
      n[i] += net.biases[m][i];
      a[i] = transfer_eval(net.transfer, n[i]);
    }
    trace.net_inputs.push_back(std::move(n));
    trace.activations.push_back(std::move(a));
  }
  return trace;
}

Vector predict(const Network& net, std::span<const double> input) {
  return forward(net, input).output();
}

double mse(std::span<const double> errors) {
  if (errors.empty()) {
    throw ParameterError("mse: no errors given");
  }
  double sum = 0.0;
  for (double e : errors) {
    sum += e * e;
  }
  return sum / static_cast<double>(errors.size());
}

Vector encode_target(Label label, const ClassOrder& order) {
  Vector t(order.size(), -1.0);
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (order[i] == label) {
      t[i] = 1.0;
    }
  }
  return t;
}

double batch_mse(const Network& net, std::span<const TrainingPair> batch) {
  require_batch(batch, "batch_mse");
  double total = 0.0;
  for (const auto& pair : batch) {
    require_size(pair.target.size(), net.output_size(), "target");
    const Vector a = predict(net, pair.input);
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double e = pair.target[i] - a[i];
      total += e * e;
    }
  }
  return total / static_cast<double>(batch.size());
}

Vector output_sensitivity(const Network& net, const ForwardTrace& trace,
                          std::span<const double> target) {
  const Vector& a = trace.output();
  const Vector& n = trace.net_inputs.back();
  require_size(target.size(), a.size(), "output_sensitivity target");
  Vector s(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    s[i] = -2.0 * transfer_deriv(net.transfer, n[i]) * (target[i] - a[i]);
  }
  return s;
}

Sensitivity backprop_sensitivities(const Network& net, const ForwardTrace& trace,
                                   std::span<const double> output) {
  const std::size_t layers = net.weighted_layers();
  require_size(trace.net_inputs.size(), layers, "trace layers");
  require_size(output.size(), net.output_size(), "output sensitivity");

  Sensitivity sens;
  sens.layers.resize(layers);
  sens.layers[layers - 1].assign(output.begin(), output.end());
  for (std::size_t k = layers - 1; k-- > 0;) {
    Vector s = linalg::mat_t_vec(net.weights[k + 1], sens.layers[k + 1]);
    const Vector& n = trace.net_inputs[k];
    for (std::size_t i = 0; i < s.size(); ++i) {
      s[i] *= transfer_deriv(net.transfer, n[i]);
    }
    sens.layers[k] = std::move(s);
  }
  return sens;
}

Vector Gradient::flatten() const {
  Vector out;
  for (std::size_t m = 0; m < weights.size(); ++m) {
    const auto w = weights[m].data();
    out.insert(out.end(), w.begin(), w.end());
    out.insert(out.end(), biases[m].begin(), biases[m].end());
  }
  return out;
}

Gradient gradient(const Network& net, std::span<const TrainingPair> batch) {
  require_batch(batch, "gradient");
  Gradient grad;
  for (std::size_t m = 0; m < net.weighted_layers(); ++m) {
    grad.weights.emplace_back(net.weights[m].rows(), net.weights[m].cols());
    grad.biases.emplace_back(net.biases[m].size(), 0.0);
  }

  for (const auto& pair : batch) {
    const ForwardTrace trace = forward(net, pair.input);
    const Vector s_out = output_sensitivity(net, trace, pair.target);
    const Sensitivity sens = backprop_sensitivities(net, trace, s_out);
    for (std::size_t m = 0; m < net.weighted_layers(); ++m) {
      const Vector& s = sens.layers[m];
      const Vector& a_prev = trace.activations[m];
      for (std::size_t i = 0; i < s.size(); ++i) {
        auto row = grad.weights[m].row(i);
        for (std::size_t j = 0; j < a_prev.size(); ++j) {
          row[j] += s[i] * a_prev[j];
        }
        grad.biases[m][i] += s[i];
      }
    }
  }

  const double scale = 1.0 / static_cast<double>(batch.size());
  for (std::size_t m = 0; m < net.weighted_layers(); ++m) {
    for (double& x : grad.weights[m].data()) {
      x *= scale;
    }
    for (double& x : grad.biases[m]) {
      x *= scale;
    }
  }
  return grad;
}

ErrorJacobian jacobian_lm(const Network& net, std::span<const TrainingPair> batch) {
  require_batch(batch, "jacobian_lm");
  const std::size_t outputs = net.output_size();
  const std::size_t rows = batch.size() * outputs;
  ErrorJacobian out{Matrix(rows, net.parameter_count()), Vector(rows)};

  std::size_t r = 0;
  for (const auto& pair : batch) {
    require_size(pair.target.size(), outputs, "target");
    const ForwardTrace trace = forward(net, pair.input);
    const Vector& a = trace.output();
    const Vector& n_out = trace.net_inputs.back();
    for (std::size_t i = 0; i < outputs; ++i, ++r) {
      out.errors[r] = pair.target[i] - a[i];

      // de_i/dn^M is -f'(n^M_i) at unit i and zero elsewhere.
      Vector seed(outputs, 0.0);
      seed[i] = -transfer_deriv(net.transfer, n_out[i]);
      const Sensitivity sens = backprop_sensitivities(net, trace, seed);

      auto row = out.jacobian.row(r);
      std::size_t col = 0;
      for (std::size_t m = 0; m < net.weighted_layers(); ++m) {
        const Vector& s = sens.layers[m];
        const Vector& a_prev = trace.activations[m];
        for (double si : s) {
          for (double aj : a_prev) {
            row[col++] = si * aj;
          }
        }
        for (double si : s) {
          row[col++] = si;
        }
      }
    }
  }
  return out;
}

std::vector<FeatureRange> fit_normalization(std::span<const Vector> rows) {
  if (rows.empty()) {
    throw ParameterError("fit_normalization: no samples");
  }
  std::vector<FeatureRange> ranges;
  for (double x : rows.front()) {
    ranges.push_back({x, x});
  }
  for (const auto& row : rows) {
    require_size(row.size(), ranges.size(), "fit_normalization row");
    for (std::size_t j = 0; j < row.size(); ++j) {
      ranges[j].min = std::min(ranges[j].min, row[j]);
      ranges[j].max = std::max(ranges[j].max, row[j]);
    }
  }
  return ranges;
}

Vector normalize_input(const Network& net, std::span<const double> raw) {
  if (net.norm.empty()) {
    require_size(raw.size(), net.input_size(), "input features");
    return {raw.begin(), raw.end()};
  }
  require_size(raw.size(), net.norm.size(), "input features");
  Vector out(raw.size());
  for (std::size_t j = 0; j < raw.size(); ++j) {
    const auto [lo, hi] = net.norm[j];
    if (!(hi > lo)) {
      out[j] = 0.0;
      continue;
    }
    out[j] = std::clamp(2.0 * (raw[j] - lo) / (hi - lo) - 1.0, -1.0, 1.0);
  }
  return out;
}

nlohmann::ordered_json to_json(const Network& net) {
  nlohmann::ordered_json out;
  out["format_version"] = kModelFormatVersion;
  out["layer_sizes"] = net.layer_sizes;
  out["transfer"] = net.transfer == Transfer::tanh ? "tanh" : "identity";
  auto weights = nlohmann::ordered_json::array();
  for (const auto& w : net.weights) {
    auto rows = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < w.rows(); ++i) {
      const auto r = w.row(i);
      rows.push_back(std::vector<double>(r.begin(), r.end()));
    }
    weights.push_back(std::move(rows));
  }
  out["weights"] = std::move(weights);
  out["biases"] = net.biases;
  auto norm = nlohmann::ordered_json::array();
  for (const auto& range : net.norm) {
    norm.push_back({{"min", range.min}, {"max", range.max}});
  }
  out["norm_params"] = std::move(norm);
  out["class_order"] = {std::string(label_name(net.class_order[0])),
                        std::string(label_name(net.class_order[1]))};
  out["seed"] = net.seed;
  return out;
}

Network network_from_json(const nlohmann::json& json) {
  Network net;
  try {
    const int version = json.at("format_version").get<int>();
    if (version != kModelFormatVersion) {
      throw SchemaError("unsupported model format_version " + std::to_string(version));
    }
    net.layer_sizes = json.at("layer_sizes").get<std::vector<std::size_t>>();
    if (json.contains("transfer")) {
      const auto transfer = json.at("transfer").get<std::string>();
      if (transfer == "tanh") {
        net.transfer = Transfer::tanh;
      } else if (transfer == "identity") {
        net.transfer = Transfer::identity;
      } else {
        throw SchemaError("unknown transfer '" + transfer + "'");
      }
    }
    for (const auto& layer : json.at("weights")) {
      const auto rows = layer.get<std::vector<std::vector<double>>>();
      if (rows.empty() || rows.front().empty()) {
        throw SchemaError("empty weight layer in model");
      }
      std::vector<double> flat;
      for (const auto& r : rows) {
        if (r.size() != rows.front().size()) {
          throw SchemaError("ragged weight layer in model");
        }
        flat.insert(flat.end(), r.begin(), r.end());
      }
      net.weights.emplace_back(rows.size(), rows.front().size(), std::move(flat));
    }
    net.biases = json.at("biases").get<std::vector<Vector>>();
    for (const auto& range : json.at("norm_params")) {
      net.norm.push_back({range.at("min").get<double>(), range.at("max").get<double>()});
    }
    const auto order = json.at("class_order").get<std::vector<std::string>>();
    if (order.size() != 2) {
      throw SchemaError("class_order must name exactly two classes");
    }
    for (std::size_t i = 0; i < 2; ++i) {
      const auto label = parse_label(order[i]);
      if (!label) {
        throw SchemaError("unknown class '" + order[i] + "' in class_order");
      }
      net.class_order[i] = *label;
    }
    if (net.class_order[0] == net.class_order[1]) {
      throw SchemaError("class_order repeats a class");
    }
    net.seed = json.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed model: ") + e.what());
  }
  try {
    net.validate();
  } catch (const Error& e) {
    throw SchemaError(std::string("inconsistent model: ") + e.what());
  }
  return net;
}

}  // namespace riskann::nn
