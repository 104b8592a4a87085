#include "riskann/eval.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "riskann/error.hpp"

namespace riskann::eval {

namespace {

std::size_t class_index(Label label, const ClassOrder& order) {
  return order[0] == label ? 0 : 1;
}

constexpr const char* kLayoutNote = "rows = actual class, columns = predicted class";

std::string fixed_1dp(double value) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(1) << value;
  return out.str();
}

}  // namespace

std::string_view split_name(SplitName split) noexcept {
  switch (split) {
    case SplitName::training:
      return "training";
    case SplitName::validation:
      return "validation";
    case SplitName::test:
      return "test";
    case SplitName::all:
      return "all";
  }
  return "unknown";
}

Label decide(std::span<const double> outputs, const ClassOrder& order) {
  if (outputs.size() != order.size()) {
    throw ShapeError("decide: expected " + std::to_string(order.size()) + " outputs, got " +
                     std::to_string(outputs.size()));
  }
  if (outputs[0] == outputs[1]) {
    return Label::failure;
  }
  return outputs[0] > outputs[1] ? order[0] : order[1];
}

Classification classify(const Network& net, std::span<const double> raw_features) {
  Classification out;
  out.outputs = nn::predict(net, nn::normalize_input(net, raw_features));
  out.label = decide(out.outputs, net.class_order);
  return out;
}

std::size_t ConfusionMatrix::total() const noexcept {
  return counts[0][0] + counts[0][1] + counts[1][0] + counts[1][1];
}

std::size_t ConfusionMatrix::correct() const noexcept { return counts[0][0] + counts[1][1]; }

ConfusionMatrix confusion_matrix(const Network& net, const data::Dataset& samples,
                                 SplitName split) {
  if (samples.samples.empty()) {
    throw ParameterError("confusion_matrix: split '" + std::string(split_name(split)) +
                         "' is empty");
  }
  ConfusionMatrix cm;
  cm.class_order = net.class_order;
  cm.split = split;
  for (const auto& s : samples.samples) {
    const Label predicted = classify(net, s.features).label;
    ++cm.counts[class_index(s.label, net.class_order)][class_index(predicted, net.class_order)];
  }
  return cm;
}

ConfusionMatrix combine(std::span<const ConfusionMatrix> parts) {
  ConfusionMatrix all;
  all.split = SplitName::all;
  if (!parts.empty()) {
    all.class_order = parts.front().class_order;
  }
  for (const auto& part : parts) {
    if (part.class_order != all.class_order) {
      throw ParameterError("combine: confusion matrices use different class orders");
    }
    for (std::size_t a = 0; a < 2; ++a) {
      for (std::size_t p = 0; p < 2; ++p) {
        all.counts[a][p] += part.counts[a][p];
      }
    }
  }
  return all;
}

double percent_1dp(std::size_t part, std::size_t whole) {
  if (whole == 0) {
    throw ParameterError("percentage of an empty total");
  }
  // floor(1000 * part / whole + 1/2) in integers, so halves round up exactly.
  const std::size_t tenths = (2000 * part + whole) / (2 * whole);
  return static_cast<double>(tenths) / 10.0;
}

double accuracy_percent(const ConfusionMatrix& cm) {
  if (cm.total() == 0) {
    throw ParameterError("accuracy of an empty confusion matrix");
  }
  return percent_1dp(cm.correct(), cm.total());
}

Vector output_errors(const Network& net, const data::Dataset& samples) {
  Vector errors;
  errors.reserve(samples.size() * net.output_size());
  for (const auto& s : samples.samples) {
    const Vector t = nn::encode_target(s.label, net.class_order);
    const Vector a = classify(net, s.features).outputs;
    for (std::size_t i = 0; i < a.size(); ++i) {
      errors.push_back(t[i] - a[i]);
    }
  }
  return errors;
}

Histogram error_histogram(const SplitErrors& errors, std::size_t bins) {
  if (bins == 0) {
    throw ParameterError("histogram needs at least one bin");
  }
  const std::array<const Vector*, 3> parts{&errors.training, &errors.validation, &errors.test};
  double lo = 0.0;
  double hi = 0.0;
  bool any = false;
  for (const Vector* part : parts) {
    for (double e : *part) {
      if (!std::isfinite(e)) {
        throw ParameterError("histogram: non-finite error value");
      }
      lo = any ? std::min(lo, e) : e;
      hi = any ? std::max(hi, e) : e;
      any = true;
    }
  }
  if (!any) {
    throw ParameterError("histogram: no error values");
  }

  Histogram h;
  if (hi == lo) {
    const double width = 1e-9 * std::max(1.0, std::abs(lo));
    h.edges = {lo - width / 2.0, lo + width / 2.0};
    for (std::size_t k = 0; k < 3; ++k) {
      h.counts[k] = {parts[k]->size()};
    }
    return h;
  }

  const double width = (hi - lo) / static_cast<double>(bins);
  h.edges.resize(bins + 1);
  for (std::size_t i = 0; i < bins; ++i) {
    h.edges[i] = lo + width * static_cast<double>(i);
  }
  h.edges[bins] = hi;

  for (std::size_t k = 0; k < 3; ++k) {
    h.counts[k].assign(bins, 0);
    for (double e : *parts[k]) {
      auto idx = static_cast<std::size_t>(std::clamp(std::floor((e - lo) / width), 0.0,
                                                      static_cast<double>(bins - 1)));
      // Snap to the stored edges so bin membership agrees with edges[].
      while (idx > 0 && e < h.edges[idx]) {
        --idx;
      }
      while (idx + 1 < bins && e >= h.edges[idx + 1]) {
        ++idx;
      }
      ++h.counts[k][idx];
    }
  }
  return h;
}

std::vector<PeriodRate> failure_rate_report(std::span<const data::Tally> tallies) {
  std::vector<PeriodRate> out;
  for (std::size_t i = 0; i < tallies.size(); ++i) {
    const auto& t = tallies[i];
    const int period = static_cast<int>(i) + 1;
    if (t.total() == 0) {
      throw ParameterError("period " + std::to_string(period) + " has no projects");
    }
    PeriodRate rate;
    rate.period = period;
    rate.label = period <= data::kPeriodCount ? std::string(data::period_label(period))
                                              : "period " + std::to_string(period);
    rate.tally = t;
    rate.rate_percent = percent_1dp(t.failures, t.total());
    rate.truncated_percent = 100 * t.failures / t.total();
    out.push_back(std::move(rate));
  }
  return out;
}

nlohmann::ordered_json build_report(const Network& net, const train::DatasetSplits& splits,
                                    std::size_t bins) {
  const std::array<std::pair<const data::Dataset*, SplitName>, 3> parts{{
      {&splits.train, SplitName::training},
      {&splits.validation, SplitName::validation},
      {&splits.test, SplitName::test},
  }};

  std::vector<ConfusionMatrix> matrices;
  SplitErrors errors;
  std::array<Vector*, 3> error_slots{&errors.training, &errors.validation, &errors.test};
  std::array<double, 3> mses{};
  for (std::size_t k = 0; k < 3; ++k) {
    const auto& [samples, name] = parts[k];
    matrices.push_back(confusion_matrix(net, *samples, name));
    *error_slots[k] = output_errors(net, *samples);
    mses[k] = nn::mse(*error_slots[k]) * static_cast<double>(net.output_size());
  }
  matrices.push_back(combine(matrices));

  nlohmann::ordered_json report;
  report["format_version"] = 1;
  report["layout"] = kLayoutNote;
  report["class_order"] = {std::string(label_name(net.class_order[0])),
                           std::string(label_name(net.class_order[1]))};

  auto confusion = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < matrices.size(); ++k) {
    const auto& cm = matrices[k];
    nlohmann::ordered_json entry;
    entry["split"] = std::string(split_name(cm.split));
    entry["counts"] = {{cm.counts[0][0], cm.counts[0][1]}, {cm.counts[1][0], cm.counts[1][1]}};
    entry["total"] = cm.total();
    entry["correct"] = cm.correct();
    entry["accuracy_percent"] = accuracy_percent(cm);
    if (k < 3) {
      entry["mse"] = mses[k];
    }
    confusion.push_back(std::move(entry));
  }
  report["confusion"] = std::move(confusion);

  const Histogram h = error_histogram(errors, bins);
  nlohmann::ordered_json hist;
  hist["bins"] = h.bins();
  hist["edges"] = h.edges;
  hist["counts"] = {{"training", h.counts[0]}, {"validation", h.counts[1]}, {"test", h.counts[2]}};
  hist["sign"] = "error = target - output";
  report["histogram"] = std::move(hist);

  std::array<data::Tally, data::kPeriodCount> tallies{};
  for (const auto& [samples, name] : parts) {
    const auto part = data::period_tallies(*samples);
    for (std::size_t p = 0; p < tallies.size(); ++p) {
      tallies[p].successes += part[p].successes;
      tallies[p].failures += part[p].failures;
    }
  }
  auto periods = nlohmann::ordered_json::array();
  for (const auto& rate : failure_rate_report(tallies)) {
    periods.push_back({{"period", rate.period},
                       {"label", rate.label},
                       {"successes", rate.tally.successes},
                       {"failures", rate.tally.failures},
                       {"total", rate.tally.total()},
                       {"rate_percent", rate.rate_percent},
                       {"truncated_percent", rate.truncated_percent}});
  }
  report["failure_rates"] = {
      {"note", "rate_percent is rounded to one decimal; truncated_percent drops the fraction"},
      {"periods", std::move(periods)}};
  return report;
}

std::string render_report_text(const nlohmann::json& report) {
  std::ostringstream out;
  try {
    const auto order = report.at("class_order").get<std::vector<std::string>>();
    out << "Confusion matrices (" << report.at("layout").get<std::string>() << ")\n";
    for (const auto& entry : report.at("confusion")) {
      const auto counts = entry.at("counts").get<std::vector<std::vector<std::size_t>>>();
      const auto total = entry.at("total").get<std::size_t>();
      out << "\n[" << entry.at("split").get<std::string>() << "]  n = " << total << "\n";
      out << std::left << std::setw(12) << "actual" << std::right;
      for (const auto& name : order) {
        out << std::setw(18) << name;
      }
      out << std::setw(10) << "total" << "\n";
      std::array<std::size_t, 2> column_totals{};
      for (std::size_t a = 0; a < 2; ++a) {
        out << std::left << std::setw(12) << order[a] << std::right;
        for (std::size_t p = 0; p < 2; ++p) {
          column_totals[p] += counts[a][p];
          const std::string cell = std::to_string(counts[a][p]) + " (" +
                                   fixed_1dp(percent_1dp(counts[a][p], total)) + "%)";
          out << std::setw(18) << cell;
        }
        out << std::setw(10) << counts[a][0] + counts[a][1] << "\n";
      }
      out << std::left << std::setw(12) << "total" << std::right;
      for (std::size_t p = 0; p < 2; ++p) {
        out << std::setw(18) << column_totals[p];
      }
      out << std::setw(10) << total << "\n";
      out << "accuracy " << fixed_1dp(entry.at("accuracy_percent").get<double>()) << "%";
      if (entry.contains("mse")) {
        out << "   mse " << std::setprecision(6) << entry.at("mse").get<double>();
      }
      out << "\n";
    }

    const auto& hist = report.at("histogram");
    const auto edges = hist.at("edges").get<std::vector<double>>();
    const auto& counts = hist.at("counts");
    const auto train_counts = counts.at("training").get<std::vector<std::size_t>>();
    const auto val_counts = counts.at("validation").get<std::vector<std::size_t>>();
    const auto test_counts = counts.at("test").get<std::vector<std::size_t>>();
    out << "\nError histogram (" << hist.at("sign").get<std::string>() << ")\n";
    out << std::setw(12) << "from" << std::setw(12) << "to" << std::setw(10) << "training"
        << std::setw(12) << "validation" << std::setw(8) << "test" << "\n";
    for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
      out << std::fixed << std::setprecision(4) << std::setw(12) << edges[b] << std::setw(12)
          << edges[b + 1] << std::setw(10) << train_counts.at(b) << std::setw(12)
          << val_counts.at(b) << std::setw(8) << test_counts.at(b) << "\n";
    }
    out.unsetf(std::ios::floatfield);

    const auto& rates = report.at("failure_rates");
    out << "\nFailure rate by period\n";
    out << std::left << std::setw(12) << "period" << std::right << std::setw(10) << "success"
        << std::setw(10) << "failure" << std::setw(8) << "total" << std::setw(10) << "rate %"
        << std::setw(12) << "truncated" << "\n";
    for (const auto& p : rates.at("periods")) {
      out << std::left << std::setw(12) << p.at("label").get<std::string>() << std::right
          << std::setw(10) << p.at("successes").get<std::size_t>() << std::setw(10)
          << p.at("failures").get<std::size_t>() << std::setw(8) << p.at("total").get<std::size_t>()
          << std::setw(10) << fixed_1dp(p.at("rate_percent").get<double>()) << std::setw(11)
          << p.at("truncated_percent").get<std::size_t>() << "%\n";
    }
    out << "note: " << rates.at("note").get<std::string>() << "\n";
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed report: ") + e.what());
  }
  return out.str();
}

}  // namespace riskann::eval
