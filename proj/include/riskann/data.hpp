#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "riskann/label.hpp"
#include "riskann/linalg.hpp"
#include "riskann/rais.hpp"

namespace riskann::data {

using linalg::Vector;

inline constexpr int kFirmCount = 10;
inline constexpr int kPeriodCount = 4;
inline constexpr std::size_t kReferenceSampleCount = 220;

struct Tally {
  std::size_t successes = 0;
  std::size_t failures = 0;

  std::size_t total() const noexcept { return successes + failures; }
  bool operator==(const Tally&) const = default;
};

/// Success/failure project counts per firm (rows, 1-10) and period
/// (columns, 1-4) of the pharmaceutical case study.
using FirmPeriodTallies = std::array<std::array<Tally, kPeriodCount>, kFirmCount>;
const FirmPeriodTallies& reference_tallies();

/// Printed per-period totals of the same study (164 successes, 56 failures).
const std::array<Tally, kPeriodCount>& reference_period_totals();

/// Period index (1-4) to its year span, e.g. "2000-2002".
std::string_view period_label(int period);

struct Sample {
  int firm = 1;
  int period = 1;
  Vector features;  // unit-interval scores in schema order
  Label label = Label::success;

  bool operator==(const Sample&) const = default;
};

struct Dataset {
  rais::RaisSchema schema;
  std::vector<Sample> samples;

  std::size_t size() const noexcept { return samples.size(); }
  std::size_t feature_count() const noexcept { return schema.size(); }
  std::vector<Vector> feature_rows() const;

  /// Throws ParameterError if a sample breaks a range or width invariant.
  void validate() const;
};

std::array<Tally, kPeriodCount> period_tallies(const Dataset& data);
FirmPeriodTallies firm_period_tallies(const Dataset& data);

/// Header: firm,period,<schema codes in order>,label. Labels are S or F.
Dataset load_csv(const std::string& path,
                 const rais::RaisSchema& schema = rais::default_retained_schema());
Dataset parse_csv(std::string_view content, const std::string& source,
                  const rais::RaisSchema& schema = rais::default_retained_schema());
std::string to_csv(const Dataset& data);
void save_csv(const Dataset& data, const std::string& path);

struct SynthParams {
  double success_mean = 0.65;
  double failure_mean = 0.40;
  double sd = 0.15;

  void validate() const;
};

/// 220 samples whose firm x period x label counts equal the reference
/// tallies. Features are drawn independently per label from a normal
/// truncated to [0, 1].
Dataset synth_generate(std::uint64_t seed, const SynthParams& params = {});

}  // namespace riskann::data
