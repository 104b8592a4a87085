#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "riskann/data.hpp"
#include "riskann/nn.hpp"

namespace riskann::train {

using nn::Network;
using nn::TrainingPair;
using linalg::Vector;

enum class Algorithm { gd, lm };

std::string_view algorithm_name(Algorithm algorithm) noexcept;

struct SplitRatios {
  double train = 0.70;
  double validation = 0.15;
  double test = 0.15;
};

struct TrainConfig {
  Algorithm algorithm = Algorithm::lm;
  double learning_rate = 0.01;
  double mu0 = 0.001;
  double mu_increase = 10.0;
  double mu_decrease = 0.1;
  double mu_max = 1e10;
  std::size_t max_epochs = 1000;
  std::size_t max_validation_failures = 6;
  double min_gradient_norm = 1e-7;
  std::uint64_t seed = 0;
  SplitRatios split;
  bool stratified = true;

  /// Throws ParameterError naming the first violated constraint.
  void validate() const;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_mse = 0.0;
  double validation_mse = 0.0;
  double test_mse = 0.0;
  double gradient_norm = 0.0;
  std::optional<double> mu;
  std::size_t validation_failures = 0;

  bool operator==(const EpochRecord&) const = default;
};

enum class StopReason { validation_failures, max_epochs, gradient_floor, mu_ceiling };

std::string_view stop_reason_name(StopReason reason) noexcept;

struct TrainOutcome {
  Network best_network;
  std::vector<EpochRecord> records;  // records[0] is the untrained network
  StopReason stop_reason = StopReason::max_epochs;
  std::size_t best_validation_epoch = 0;
  std::size_t accepted_steps = 0;
};

struct DatasetSplits {
  data::Dataset train;
  data::Dataset validation;
  data::Dataset test;
};

/// Sizes of the validation and test splits are the ratios times n rounded
/// half away from zero; training takes the remainder. Stratified splits
/// apportion each class by largest remainder so every split holds each
/// class within one sample of its proportional share. Samples keep their
/// original relative order inside each split.
DatasetSplits split_dataset(const data::Dataset& data, const SplitRatios& ratios,
                            std::uint64_t seed, bool stratified);

struct PairSplits {
  std::vector<TrainingPair> train;
  std::vector<TrainingPair> validation;
  std::vector<TrainingPair> test;
};

/// Normalizes inputs with the network's ranges and encodes targets.
std::vector<TrainingPair> to_pairs(const Network& net, const data::Dataset& data);

/// Consecutive-failure counter over validation MSE. A strict improvement on
/// the best value so far resets the counter; anything else counts as a
/// failure.
class EarlyStopping {
 public:
  struct Decision {
    bool improved = false;
    bool stop = false;
  };

  explicit EarlyStopping(std::size_t max_failures);

  Decision update(std::size_t epoch, double validation_mse);

  std::size_t failures() const noexcept { return failures_; }
  std::size_t best_epoch() const noexcept { return best_epoch_; }
  double best_mse() const noexcept { return best_mse_; }

 private:
  std::size_t max_failures_;
  std::size_t failures_ = 0;
  std::size_t best_epoch_ = 0;
  double best_mse_;
  bool seen_any_ = false;
};

/// One parameter update per epoch. Returning false ends training with
/// StopReason::mu_ceiling.
class Optimizer {
 public:
  virtual ~Optimizer() = default;
  virtual bool step(Network& net, std::span<const TrainingPair> train) = 0;
  virtual std::optional<double> mu() const { return std::nullopt; }
};

/// Shared epoch loop: records epoch 0 for the starting network, then steps,
/// evaluates all three splits, and applies early stopping, the gradient
/// floor and the epoch budget. The returned network is the checkpoint at
/// the best validation epoch.
TrainOutcome run_training(Network net, const PairSplits& splits, const TrainConfig& config,
                          Optimizer& optimizer);

/// Full-batch steepest descent, W <- W - alpha * grad.
TrainOutcome train_gd(Network net, const PairSplits& splits, const TrainConfig& config);

/// Parameter change of one damped Gauss-Newton step: -(J^T J + mu I)^-1 J^T e.
Vector lm_step(const Network& net, std::span<const TrainingPair> batch, double mu);

TrainOutcome train_lm(Network net, const PairSplits& splits, const TrainConfig& config);

TrainOutcome train(Network net, const PairSplits& splits, const TrainConfig& config);

/// CSV: epoch,train_mse,validation_mse,test_mse,gradient_norm,mu,val_failures
std::string training_log_csv(std::span<const EpochRecord> records);

}  // namespace riskann::train
