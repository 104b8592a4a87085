#include "riskann/train.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "riskann/error.hpp"
#include "riskann/rng.hpp"
#include "riskann/text.hpp"

namespace riskann::train {

namespace {

std::size_t round_share(double ratio, std::size_t n) {
  // Half away from zero; the epsilon keeps exact halves such as 0.15 * 10
  // from slipping below .5 through representation error.
  return static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n) + 0.5 + 1e-9));
}

/// Largest-remainder apportionment of `total` over weights `sizes`.
std::array<std::size_t, 3> apportion(std::size_t total, const std::array<std::size_t, 3>& sizes) {
  const std::size_t n = sizes[0] + sizes[1] + sizes[2];
  std::array<std::size_t, 3> out{};
  std::array<double, 3> remainder{};
  std::size_t assigned = 0;
  for (std::size_t k = 0; k < 3; ++k) {
    const double quota = static_cast<double>(total) * static_cast<double>(sizes[k]) /
                         static_cast<double>(n);
    out[k] = static_cast<std::size_t>(std::floor(quota));
    remainder[k] = quota - static_cast<double>(out[k]);
    assigned += out[k];
  }
  std::array<std::size_t, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t i = 0; assigned < total; ++i, ++assigned) {
    ++out[order[i % 3]];
  }
  return out;
}

data::Dataset subset(const data::Dataset& data, std::vector<std::size_t> indices) {
  std::sort(indices.begin(), indices.end());
  data::Dataset out{data.schema, {}};
  out.samples.reserve(indices.size());
  for (std::size_t i : indices) {
    out.samples.push_back(data.samples[i]);
  }
  return out;
}

double l2_norm(std::span<const double> v) {
  double sum = 0.0;
  for (double x : v) {
    sum += x * x;
  }
  return std::sqrt(sum);
}

linalg::Matrix gram(const linalg::Matrix& j) {
  const std::size_t p = j.cols();
  linalg::Matrix out(p, p);
  for (std::size_t r = 0; r < j.rows(); ++r) {
    const auto row = j.row(r);
    for (std::size_t a = 0; a < p; ++a) {
      const double ja = row[a];
      if (ja == 0.0) {
        continue;
      }
      auto out_row = out.row(a);
      for (std::size_t b = a; b < p; ++b) {
        out_row[b] += ja * row[b];
      }
    }
  }
  for (std::size_t a = 0; a < p; ++a) {
    for (std::size_t b = a + 1; b < p; ++b) {
      out(b, a) = out(a, b);
    }
  }
  return out;
}

double sum_squared_error(const Network& net, std::span<const TrainingPair> batch) {
  return nn::batch_mse(net, batch) * static_cast<double>(batch.size());
}

class SteepestDescent final : public Optimizer {
 public:
  explicit SteepestDescent(double learning_rate) : learning_rate_(learning_rate) {}

  bool step(Network& net, std::span<const TrainingPair> train) override {
    const Vector grad = nn::gradient(net, train).flatten();
    Vector x = nn::parameters(net);
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] -= learning_rate_ * grad[i];
    }
    nn::set_parameters(net, x);
    return true;
  }

 private:
  double learning_rate_;
};

class LevenbergMarquardt final : public Optimizer {
 public:
  explicit LevenbergMarquardt(const TrainConfig& config)
      : mu_(config.mu0),
        increase_(config.mu_increase),
        decrease_(config.mu_decrease),
        mu_max_(config.mu_max) {}

  bool step(Network& net, std::span<const TrainingPair> train) override {
    const auto [j, e] = nn::jacobian_lm(net, train);
    const linalg::Matrix jtj = gram(j);
    const Vector jte = linalg::mat_t_vec(j, e);
    const double sse = std::inner_product(e.begin(), e.end(), e.begin(), 0.0);
    const Vector x = nn::parameters(net);

    Network trial = net;
    Vector candidate(x.size());
    while (mu_ <= mu_max_) {
      linalg::Matrix damped = jtj;
      for (std::size_t i = 0; i < damped.rows(); ++i) {
        damped(i, i) += mu_;
      }
      Vector delta;
      try {
        delta = linalg::solve_spd(damped, jte);
      } catch (const DefinitenessError&) {
        mu_ *= increase_;
        continue;
      }
      for (std::size_t i = 0; i < x.size(); ++i) {
        candidate[i] = x[i] - delta[i];
      }
      nn::set_parameters(trial, candidate);
      const double trial_sse = sum_squared_error(trial, train);
      if (std::isfinite(trial_sse) && trial_sse < sse) {
        net = std::move(trial);
        mu_ *= decrease_;
        return true;
      }
      mu_ *= increase_;
    }
    return false;
  }

  std::optional<double> mu() const override { return mu_; }

 private:
  double mu_;
  double increase_;
  double decrease_;
  double mu_max_;
};

}  // namespace

std::string_view algorithm_name(Algorithm algorithm) noexcept {
  return algorithm == Algorithm::gd ? "gd" : "lm";
}

std::string_view stop_reason_name(StopReason reason) noexcept {
  switch (reason) {
    case StopReason::validation_failures:
      return "validation_failures";
    case StopReason::max_epochs:
      return "max_epochs";
    case StopReason::gradient_floor:
      return "gradient_floor";
    case StopReason::mu_ceiling:
      return "mu_ceiling";
  }
  return "unknown";
}

void TrainConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) {
      throw ParameterError(what);
    }
  };
  require(std::isfinite(learning_rate) && learning_rate >= 0.0,
          "learning rate must be finite and non-negative");
  require(std::isfinite(mu0) && mu0 > 0.0, "mu0 must be positive");
  require(mu_increase > 1.0, "mu increase factor must exceed 1");
  require(mu_decrease > 0.0 && mu_decrease < 1.0, "mu decrease factor must lie in (0, 1)");
  require(mu_max >= mu0, "mu_max must be at least mu0");
  require(max_validation_failures >= 1, "max validation failures must be at least 1");
  require(min_gradient_norm >= 0.0, "minimum gradient norm must be non-negative");
  require(split.train > 0.0 && split.validation > 0.0 && split.test > 0.0,
          "split ratios must be positive");
  require(std::abs(split.train + split.validation + split.test - 1.0) <= 1e-9,
          "split ratios must sum to 1");
}

DatasetSplits split_dataset(const data::Dataset& data, const SplitRatios& ratios,
                            std::uint64_t seed, bool stratified) {
  if (!(ratios.train > 0.0 && ratios.validation > 0.0 && ratios.test > 0.0) ||
      std::abs(ratios.train + ratios.validation + ratios.test - 1.0) > 1e-9) {
    throw ParameterError("split ratios must be positive and sum to 1");
  }
  const std::size_t n = data.size();
  if (n == 0) {
    throw ParameterError("cannot split an empty dataset");
  }
  const std::size_t n_val = round_share(ratios.validation, n);
  const std::size_t n_test = round_share(ratios.test, n);
  if (n_val == 0 || n_test == 0 || n_val + n_test >= n) {
    std::ostringstream msg;
    msg << "split of " << n << " samples at " << ratios.train << "/" << ratios.validation << "/"
        << ratios.test << " leaves an empty split";
    throw ParameterError(msg.str());
  }
  const std::array<std::size_t, 3> sizes{n - n_val - n_test, n_val, n_test};

  Rng rng(seed);
  std::array<std::vector<std::size_t>, 3> parts;
  auto deal = [&](std::vector<std::size_t>& pool, const std::array<std::size_t, 3>& counts) {
    rng.shuffle(std::span<std::size_t>(pool));
    std::size_t pos = 0;
    for (std::size_t k = 0; k < 3; ++k) {
      parts[k].insert(parts[k].end(), pool.begin() + static_cast<std::ptrdiff_t>(pos),
                      pool.begin() + static_cast<std::ptrdiff_t>(pos + counts[k]));
      pos += counts[k];
    }
  };

  if (stratified) {
    std::vector<std::size_t> successes;
    std::vector<std::size_t> failures;
    for (std::size_t i = 0; i < n; ++i) {
      (data.samples[i].label == Label::success ? successes : failures).push_back(i);
    }
    const auto success_counts = apportion(successes.size(), sizes);
    std::array<std::size_t, 3> failure_counts{};
    for (std::size_t k = 0; k < 3; ++k) {
      failure_counts[k] = sizes[k] - success_counts[k];
    }
    deal(successes, success_counts);
    deal(failures, failure_counts);
  } else {
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), std::size_t{0});
    deal(all, sizes);
  }

  return {subset(data, std::move(parts[0])), subset(data, std::move(parts[1])),
          subset(data, std::move(parts[2]))};
}

std::vector<TrainingPair> to_pairs(const Network& net, const data::Dataset& data) {
  std::vector<TrainingPair> pairs;
  pairs.reserve(data.size());
  for (const auto& s : data.samples) {
    pairs.push_back({nn::normalize_input(net, s.features), nn::encode_target(s.label, net.class_order)});
  }
  return pairs;
}

EarlyStopping::EarlyStopping(std::size_t max_failures)
    : max_failures_(max_failures), best_mse_(std::numeric_limits<double>::infinity()) {
  if (max_failures == 0) {
    throw ParameterError("early stopping needs a positive failure budget");
  }
}

EarlyStopping::Decision EarlyStopping::update(std::size_t epoch, double validation_mse) {
  Decision decision;
  if (!seen_any_ || validation_mse < best_mse_) {
    seen_any_ = true;
    best_mse_ = validation_mse;
    best_epoch_ = epoch;
    failures_ = 0;
    decision.improved = true;
  } else {
    ++failures_;
  }
  decision.stop = failures_ >= max_failures_;
  return decision;
}

TrainOutcome run_training(Network net, const PairSplits& splits, const TrainConfig& config,
                          Optimizer& optimizer) {
  config.validate();
  net.validate();
  if (splits.train.empty() || splits.validation.empty() || splits.test.empty()) {
    throw ParameterError("training needs non-empty train, validation and test splits");
  }

  auto evaluate = [&](std::size_t epoch) {
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_mse = nn::batch_mse(net, splits.train);
    rec.validation_mse = nn::batch_mse(net, splits.validation);
    rec.test_mse = nn::batch_mse(net, splits.test);
    rec.gradient_norm = l2_norm(nn::gradient(net, splits.train).flatten());
    rec.mu = optimizer.mu();
    if (!std::isfinite(rec.train_mse) || !std::isfinite(rec.validation_mse) ||
        !std::isfinite(rec.test_mse) || !std::isfinite(rec.gradient_norm)) {
      throw DivergenceError("training diverged: non-finite loss at epoch " + std::to_string(epoch),
                            epoch);
    }
    return rec;
  };

  TrainOutcome outcome;
  EarlyStopping stopper(config.max_validation_failures);

  outcome.records.push_back(evaluate(0));
  stopper.update(0, outcome.records.back().validation_mse);
  outcome.best_network = net;

  outcome.stop_reason = StopReason::max_epochs;
  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    if (outcome.records.back().gradient_norm < config.min_gradient_norm) {
      outcome.stop_reason = StopReason::gradient_floor;
      break;
    }
    if (!optimizer.step(net, splits.train)) {
      outcome.stop_reason = StopReason::mu_ceiling;
      break;
    }
    ++outcome.accepted_steps;

    EpochRecord rec = evaluate(epoch);
    const auto decision = stopper.update(epoch, rec.validation_mse);
    rec.validation_failures = stopper.failures();
    outcome.records.push_back(rec);
    if (decision.improved) {
      outcome.best_network = net;
    }
    if (decision.stop) {
      outcome.stop_reason = StopReason::validation_failures;
      break;
    }
  }
  outcome.best_validation_epoch = stopper.best_epoch();
  return outcome;
}

TrainOutcome train_gd(Network net, const PairSplits& splits, const TrainConfig& config) {
  if (config.algorithm != Algorithm::gd) {
    throw ParameterError("train_gd called with a non-gd configuration");
  }
  SteepestDescent optimizer(config.learning_rate);
  return run_training(std::move(net), splits, config, optimizer);
}

Vector lm_step(const Network& net, std::span<const TrainingPair> batch, double mu) {
  if (!(mu > 0.0)) {
    throw ParameterError("lm_step: mu must be positive");
  }
  const auto [j, e] = nn::jacobian_lm(net, batch);
  linalg::Matrix damped = gram(j);
  for (std::size_t i = 0; i < damped.rows(); ++i) {
    damped(i, i) += mu;
  }
  Vector delta = linalg::solve_spd(damped, linalg::mat_t_vec(j, e));
  for (double& d : delta) {
    d = -d;
  }
  return delta;
}

TrainOutcome train_lm(Network net, const PairSplits& splits, const TrainConfig& config) {
  if (config.algorithm != Algorithm::lm) {
    throw ParameterError("train_lm called with a non-lm configuration");
  }
  LevenbergMarquardt optimizer(config);
  return run_training(std::move(net), splits, config, optimizer);
}

TrainOutcome train(Network net, const PairSplits& splits, const TrainConfig& config) {
  return config.algorithm == Algorithm::gd ? train_gd(std::move(net), splits, config)
                                           : train_lm(std::move(net), splits, config);
}

std::string training_log_csv(std::span<const EpochRecord> records) {
  std::ostringstream out;
  out << "epoch,train_mse,validation_mse,test_mse,gradient_norm,mu,val_failures\n";
  for (const auto& r : records) {
    out << r.epoch << ',' << text::format_double(r.train_mse) << ','
        << text::format_double(r.validation_mse) << ',' << text::format_double(r.test_mse) << ','
        << text::format_double(r.gradient_norm) << ','
        << (r.mu ? text::format_double(*r.mu) : std::string()) << ',' << r.validation_failures
        << '\n';
  }
  return out.str();
}

}  // namespace riskann::train
