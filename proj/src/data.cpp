#include "riskann/data.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "riskann/error.hpp"
#include "riskann/rng.hpp"
#include "riskann/text.hpp"

namespace riskann {

std::optional<Label> parse_label(std::string_view text) noexcept {
  if (text == "S" || text == "success") {
    return Label::success;
  }
  if (text == "F" || text == "failure") {
    return Label::failure;
  }
  return std::nullopt;
}

}  // namespace riskann

namespace riskann::data {

namespace {

// The printed cells for 2006-2009 add up to 46 S / 17 F while the printed
// period totals (and the quoted failure rate) say 47 S / 16 F. Firm 10's
// cell in that period is printed as 4 S / 1 F and is carried here as 5 S / 0 F
// so that every row and column total agrees with the printed sums.
// clang-format off
constexpr FirmPeriodTallies kReferenceTallies{{
    {{{2, 1}, {3, 2}, {5, 2}, {5, 1}}},
    {{{1, 1}, {4, 2}, {5, 1}, {8, 2}}},
    {{{1, 3}, {4, 1}, {5, 2}, {5, 2}}},
    {{{1, 2}, {3, 1}, {2, 2}, {5, 1}}},
    {{{4, 2}, {6, 3}, {6, 3}, {7, 1}}},
    {{{2, 1}, {4, 1}, {4, 2}, {5, 1}}},
    {{{0, 3}, {2, 1}, {3, 1}, {4, 0}}},
    {{{3, 1}, {4, 1}, {5, 2}, {7, 1}}},
    {{{3, 0}, {5, 0}, {7, 1}, {7, 0}}},
    {{{4, 2}, {3, 2}, {5, 0}, {5, 1}}},
}};
// clang-format on

constexpr std::array<Tally, kPeriodCount> kReferencePeriodTotals{{
    {21, 16}, {38, 14}, {47, 16}, {58, 10}}};

constexpr std::array<std::string_view, kPeriodCount> kPeriodLabels{
    "2000-2002", "2003-2006", "2006-2009", "2010-2013"};

constexpr int kMaxTruncationDraws = 1000;

std::string expected_header_text(const rais::RaisSchema& schema) {
  return "firm,period," + text::join(schema.codes(), ",") + ",label";
}

void check_header(const std::vector<std::string>& header, const rais::RaisSchema& schema,
                  const std::string& source) {
  std::vector<std::string> expected{"firm", "period"};
  for (const auto& code : schema.codes()) {
    expected.push_back(code);
  }
  expected.push_back("label");

  const std::string context = " in '" + source + "' (expected " +
                              std::to_string(schema.size()) + " features: " +
                              expected_header_text(schema) + ")";
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (i >= header.size()) {
      throw SchemaError("missing column '" + expected[i] + "'" + context);
    }
    if (header[i] != expected[i]) {
      bool present = false;
      for (const auto& h : header) {
        present = present || h == expected[i];
      }
      if (!present) {
        throw SchemaError("missing column '" + expected[i] + "'" + context);
      }
      throw SchemaError("column " + std::to_string(i + 1) + " is '" + header[i] +
                        "', expected '" + expected[i] + "'" + context);
    }
  }
  if (header.size() > expected.size()) {
    throw SchemaError("unexpected extra column '" + header[expected.size()] + "'" + context);
  }
}

[[noreturn]] void row_error(const std::string& source, std::size_t line, const std::string& what) {
  throw ParseError(source + ":" + std::to_string(line) + ": " + what, line);
}

double truncated_normal(Rng& rng, double mean, double sd) {
  for (int i = 0; i < kMaxTruncationDraws; ++i) {
    const double x = mean + sd * rng.normal();
    if (x >= 0.0 && x <= 1.0) {
      return x;
    }
  }
  // Only reachable for means far outside the unit interval.
  return std::clamp(mean, 0.0, 1.0);
}

}  // namespace

const FirmPeriodTallies& reference_tallies() { return kReferenceTallies; }

const std::array<Tally, kPeriodCount>& reference_period_totals() {
  return kReferencePeriodTotals;
}

std::string_view period_label(int period) {
  if (period < 1 || period > kPeriodCount) {
    throw ParameterError("period must be in 1.." + std::to_string(kPeriodCount));
  }
  return kPeriodLabels[static_cast<std::size_t>(period - 1)];
}

std::vector<Vector> Dataset::feature_rows() const {
  std::vector<Vector> rows;
  rows.reserve(samples.size());
  for (const auto& s : samples) {
    rows.push_back(s.features);
  }
  return rows;
}

void Dataset::validate() const {
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    const std::string where = "sample " + std::to_string(i) + ": ";
    if (s.firm < 1 || s.firm > kFirmCount) {
      throw ParameterError(where + "firm out of range 1.." + std::to_string(kFirmCount));
    }
    if (s.period < 1 || s.period > kPeriodCount) {
      throw ParameterError(where + "period out of range 1.." + std::to_string(kPeriodCount));
    }
    if (s.features.size() != schema.size()) {
      throw ShapeError(where + "has " + std::to_string(s.features.size()) +
                       " features, schema has " + std::to_string(schema.size()));
    }
    for (double x : s.features) {
      if (!(x >= 0.0 && x <= 1.0)) {
        throw ParameterError(where + "feature outside [0, 1]");
      }
    }
  }
}

std::array<Tally, kPeriodCount> period_tallies(const Dataset& data) {
  std::array<Tally, kPeriodCount> out{};
  for (const auto& s : data.samples) {
    auto& t = out[static_cast<std::size_t>(s.period - 1)];
    (s.label == Label::success ? t.successes : t.failures) += 1;
  }
  return out;
}

FirmPeriodTallies firm_period_tallies(const Dataset& data) {
  FirmPeriodTallies out{};
  for (const auto& s : data.samples) {
    auto& t = out[static_cast<std::size_t>(s.firm - 1)][static_cast<std::size_t>(s.period - 1)];
    (s.label == Label::success ? t.successes : t.failures) += 1;
  }
  return out;
}

Dataset parse_csv(std::string_view content, const std::string& source,
                  const rais::RaisSchema& schema) {
  const auto table = text::parse_csv(content, source);
  check_header(table.header, schema, source);

  Dataset data{schema, {}};
  const std::size_t width = schema.size() + 3;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::size_t line = table.line_numbers[r];
    if (row.size() != width) {
      row_error(source, line,
                "expected " + std::to_string(width) + " fields, got " + std::to_string(row.size()));
    }
    Sample s;
    long long firm = 0;
    long long period = 0;
    if (!text::parse_int(row[0], firm) || firm < 1 || firm > kFirmCount) {
      row_error(source, line, "firm '" + row[0] + "' is not an integer in 1..10");
    }
    if (!text::parse_int(row[1], period) || period < 1 || period > kPeriodCount) {
      row_error(source, line, "period '" + row[1] + "' is not an integer in 1..4");
    }
    s.firm = static_cast<int>(firm);
    s.period = static_cast<int>(period);
    s.features.resize(schema.size());
    for (std::size_t j = 0; j < schema.size(); ++j) {
      const auto& field = row[j + 2];
      double x = 0.0;
      if (!text::parse_double(field, x)) {
        row_error(source, line,
                  "feature " + schema.variables[j].code + " value '" + field + "' is not numeric");
      }
      if (!(x >= 0.0 && x <= 1.0)) {
        row_error(source, line,
                  "feature " + schema.variables[j].code + " value " + field + " outside [0, 1]");
      }
      s.features[j] = x;
    }
    const auto label = parse_label(row.back());
    if (!label) {
      row_error(source, line, "label '" + row.back() + "' is not S or F");
    }
    s.label = *label;
    data.samples.push_back(std::move(s));
  }
  return data;
}

Dataset load_csv(const std::string& path, const rais::RaisSchema& schema) {
  return parse_csv(text::read_file(path), path, schema);
}

std::string to_csv(const Dataset& data) {
  std::ostringstream out;
  out << expected_header_text(data.schema) << '\n';
  for (const auto& s : data.samples) {
    out << s.firm << ',' << s.period;
    for (double x : s.features) {
      out << ',' << text::format_double(x);
    }
    out << ',' << label_code(s.label) << '\n';
  }
  return out.str();
}

void save_csv(const Dataset& data, const std::string& path) {
  text::write_file(path, to_csv(data));
}

void SynthParams::validate() const {
  if (!(sd > 0.0) || !std::isfinite(sd)) {
    throw ParameterError("synthetic sd must be positive");
  }
  if (!(success_mean >= 0.0 && success_mean <= 1.0) ||
      !(failure_mean >= 0.0 && failure_mean <= 1.0)) {
    throw ParameterError("synthetic class means must lie in [0, 1]");
  }
}

Dataset synth_generate(std::uint64_t seed, const SynthParams& params) {
  params.validate();
  Dataset data{rais::default_retained_schema(), {}};
  data.samples.reserve(kReferenceSampleCount);
  const std::size_t width = data.schema.size();

  Rng rng(seed);
  auto draw = [&](int firm, int period, Label label, double mean) {
    Sample s{firm, period, Vector(width), label};
    for (double& x : s.features) {
      x = truncated_normal(rng, mean, params.sd);
    }
    data.samples.push_back(std::move(s));
  };

  for (int firm = 1; firm <= kFirmCount; ++firm) {
    for (int period = 1; period <= kPeriodCount; ++period) {
      const Tally& cell = kReferenceTallies[static_cast<std::size_t>(firm - 1)]
                                           [static_cast<std::size_t>(period - 1)];
      for (std::size_t i = 0; i < cell.successes; ++i) {
        draw(firm, period, Label::success, params.success_mean);
      }
      for (std::size_t i = 0; i < cell.failures; ++i) {
        draw(firm, period, Label::failure, params.failure_mean);
      }
    }
  }
  return data;
}

}  // namespace riskann::data
