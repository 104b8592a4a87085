#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "riskann/data.hpp"
#include "riskann/nn.hpp"
#include "riskann/train.hpp"

namespace riskann::eval {

using linalg::Vector;
using nn::Network;

enum class SplitName { training, validation, test, all };

std::string_view split_name(SplitName split) noexcept;

struct Classification {
  Label label = Label::failure;
  Vector outputs;
};

/// Class with the larger output; an exact tie goes to failure.
Label decide(std::span<const double> outputs, const ClassOrder& order = kDefaultClassOrder);

/// Normalizes raw features with the network's ranges, then runs it.
Classification classify(const Network& net, std::span<const double> raw_features);

/// counts[actual][predicted], both indexed by class order.
struct ConfusionMatrix {
  std::array<std::array<std::size_t, 2>, 2> counts{};
  ClassOrder class_order = kDefaultClassOrder;
  SplitName split = SplitName::all;

  std::size_t total() const noexcept;
  std::size_t correct() const noexcept;
};

ConfusionMatrix confusion_matrix(const Network& net, const data::Dataset& samples,
                                 SplitName split);

/// Elementwise sum, labelled "all".
ConfusionMatrix combine(std::span<const ConfusionMatrix> parts);

/// 100 * part / whole rounded half away from zero to one decimal.
double percent_1dp(std::size_t part, std::size_t whole);

double accuracy_percent(const ConfusionMatrix& cm);

/// t - a for every output of every sample; negative when the output
/// overshoots its target.
Vector output_errors(const Network& net, const data::Dataset& samples);

struct SplitErrors {
  Vector training;
  Vector validation;
  Vector test;
};

struct Histogram {
  Vector edges;                                   // bins + 1 ascending values
  std::array<std::vector<std::size_t>, 3> counts;  // training, validation, test

  std::size_t bins() const noexcept { return edges.size() - 1; }
};

inline constexpr std::size_t kDefaultHistogramBins = 20;

/// Equal-width bins over [min, max] of all pooled errors. When every error
/// is identical the histogram collapses to one narrow bin centred on it.
Histogram error_histogram(const SplitErrors& errors, std::size_t bins = kDefaultHistogramBins);

struct PeriodRate {
  int period = 0;
  std::string label;
  data::Tally tally;
  double rate_percent = 0.0;         // one decimal
  std::size_t truncated_percent = 0;  // whole percent, rounded down
};

/// Failure share per period, in period order starting at 1.
std::vector<PeriodRate> failure_rate_report(std::span<const data::Tally> tallies);

/// Full evaluation report for a trained network and its three splits.
nlohmann::ordered_json build_report(const Network& net, const train::DatasetSplits& splits,
                                    std::size_t bins = kDefaultHistogramBins);

/// Fixed-width text tables for a report produced by build_report.
std::string render_report_text(const nlohmann::json& report);

}  // namespace riskann::eval
