#include "riskann/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "riskann/data.hpp"
#include "riskann/error.hpp"
#include "riskann/eval.hpp"
#include "riskann/nn.hpp"
#include "riskann/rais.hpp"
#include "riskann/text.hpp"
#include "riskann/train.hpp"

namespace riskann::cli {

namespace {

using ojson = nlohmann::ordered_json;

/// A trained network plus what eval/predict need to replay its data handling.
struct Model {
  nn::Network net;
  std::vector<std::string> feature_codes;
  train::SplitRatios split;
  bool stratified = true;
};

train::SplitRatios parse_split(const std::string& text) {
  const auto fields = text::split_csv_line(text);
  std::vector<double> values;
  for (const auto& f : fields) {
    double v = 0.0;
    if (!text::parse_double(f, v)) {
      throw ParameterError("--split: '" + f + "' is not a number");
    }
    values.push_back(v);
  }
  if (values.size() != 3) {
    throw ParameterError("--split expects three comma-separated ratios train,validation,test");
  }
  return {values[0], values[1], values[2]};
}

rais::RaisSchema schema_for_codes(const std::vector<std::string>& codes) {
  const auto candidates = rais::default_candidate_schema();
  rais::RaisSchema schema{{}, "model"};
  for (const auto& code : codes) {
    const auto it = std::find_if(candidates.variables.begin(), candidates.variables.end(),
                                 [&](const rais::RiskVariable& v) { return v.code == code; });
    if (it != candidates.variables.end()) {
      schema.variables.push_back(*it);
      continue;
    }
    if (code.empty() || code.front() < 'A' || code.front() > 'F') {
      throw SchemaError("model feature code '" + code + "' has no risk content letter A-F");
    }
    schema.variables.push_back(
        {code, code, static_cast<rais::RiskContent>(code.front() - 'A')});
  }
  schema.validate();
  return schema;
}

ojson model_to_json(const Model& model) {
  ojson out = nn::to_json(model.net);
  out["feature_codes"] = model.feature_codes;
  out["split"] = {{"train", model.split.train},
                  {"validation", model.split.validation},
                  {"test", model.split.test},
                  {"stratified", model.stratified}};
  return out;
}

Model load_model(const std::string& path) {
  nlohmann::json json;
  try {
    json = nlohmann::json::parse(text::read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("model file '" + path + "' is not valid JSON: " + e.what());
  }
  Model model;
  try {
    model.net = nn::network_from_json(json);
  } catch (const SchemaError& e) {
    throw SchemaError("model file '" + path + "': " + e.what());
  }
  try {
    model.feature_codes = json.at("feature_codes").get<std::vector<std::string>>();
    const auto& split = json.at("split");
    model.split = {split.at("train").get<double>(), split.at("validation").get<double>(),
                   split.at("test").get<double>()};
    model.stratified = split.at("stratified").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("model file '" + path + "': " + e.what());
  }
  if (model.feature_codes.size() != model.net.input_size()) {
    throw SchemaError("model file '" + path + "' lists " +
                      std::to_string(model.feature_codes.size()) + " feature codes for " +
                      std::to_string(model.net.input_size()) + " inputs");
  }
  return model;
}

void write_json(const std::string& path, const ojson& json) {
  text::write_file(path, json.dump(2) + "\n");
}

void print_config(const CLI::App& sub) {
  std::cerr << "[" << sub.get_name() << "] resolved configuration:\n"
            << sub.config_to_str(true, false);
}

int cmd_synth(std::uint64_t seed, const std::string& out, const data::SynthParams& params) {
  const auto dataset = data::synth_generate(seed, params);
  data::save_csv(dataset, out);
  std::cerr << "wrote " << dataset.size() << " samples to " << out << "\n";
  return kExitOk;
}

int cmd_rais(const std::string& in, const std::string& schema_path, const std::string& out,
             double kaiser, double communality) {
  const auto schema = rais::load_schema(schema_path);
  const auto table = text::read_csv(in);

  std::vector<std::size_t> columns;
  for (const auto& code : schema.codes()) {
    const auto it = std::find(table.header.begin(), table.header.end(), code);
    if (it == table.header.end()) {
      throw SchemaError("'" + in + "' has no column for variable '" + code + "'");
    }
    columns.push_back(static_cast<std::size_t>(it - table.header.begin()));
  }
  if (table.rows.empty()) {
    throw SchemaError("'" + in + "' has no data rows");
  }

  linalg::Matrix x(table.rows.size(), columns.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::size_t line = table.line_numbers[r];
    if (row.size() != table.header.size()) {
      throw ParseError(in + ":" + std::to_string(line) + ": expected " +
                           std::to_string(table.header.size()) + " fields",
                       line);
    }
    for (std::size_t j = 0; j < columns.size(); ++j) {
      double v = 0.0;
      if (!text::parse_double(row[columns[j]], v) || !std::isfinite(v)) {
        throw ParseError(in + ":" + std::to_string(line) + ": value '" + row[columns[j]] +
                             "' for " + schema.variables[j].code + " is not numeric",
                         line);
      }
      x(r, j) = v;
    }
  }

  const auto codes = schema.codes();
  rais::Standardized z;
  try {
    z = rais::standardize(x, codes);
  } catch (const DegenerateVariableError& e) {
    throw SchemaError(e.what());
  }
  const auto result = rais::pca(z.z, kaiser);
  for (const auto& w : result.warnings) {
    std::cerr << "warning: " << w << "\n";
  }
  const auto selection = rais::select_variables(schema, result, communality);
  ojson json = rais::to_json(result, selection);
  json["kaiser_threshold"] = kaiser;
  json["communality_threshold"] = communality;
  write_json(out, json);
  std::cerr << "retained " << result.retained_component_count << " components, kept "
            << selection.schema.size() << " of " << schema.size() << " variables\n";
  return kExitOk;
}

struct TrainArgs {
  std::string data;
  std::string model;
  std::string log;
  std::string schema;
  std::string split = "0.70,0.15,0.15";
  std::vector<std::size_t> hidden{25};
  bool no_stratify = false;
};

int cmd_train(const TrainArgs& args, train::TrainConfig config) {
  config.split = parse_split(args.split);
  config.stratified = !args.no_stratify;
  config.validate();
  if (args.hidden.empty() ||
      std::find(args.hidden.begin(), args.hidden.end(), 0u) != args.hidden.end()) {
    throw ParameterError("--hidden needs positive layer sizes");
  }

  const auto schema =
      args.schema.empty() ? rais::default_retained_schema() : rais::load_schema(args.schema);
  const auto dataset = data::load_csv(args.data, schema);
  const auto splits = train::split_dataset(dataset, config.split, config.seed, config.stratified);

  std::vector<std::size_t> topology{dataset.feature_count()};
  topology.insert(topology.end(), args.hidden.begin(), args.hidden.end());
  topology.push_back(2);
  nn::Network net = nn::init_network(topology, config.seed);
  net.norm = nn::fit_normalization(splits.train.feature_rows());

  const train::PairSplits pairs{train::to_pairs(net, splits.train),
                                train::to_pairs(net, splits.validation),
                                train::to_pairs(net, splits.test)};
  std::cerr << "split sizes: training " << splits.train.size() << ", validation "
            << splits.validation.size() << ", test " << splits.test.size() << "\n";

  const auto outcome = train::train(std::move(net), pairs, config);
  text::write_file(args.log, train::training_log_csv(outcome.records));

  const auto& best = outcome.records[outcome.best_validation_epoch];
  std::cerr << "stopped after epoch " << outcome.records.back().epoch << " ("
            << train::stop_reason_name(outcome.stop_reason) << "); best validation epoch "
            << outcome.best_validation_epoch << ": train " << best.train_mse << ", validation "
            << best.validation_mse << ", test " << best.test_mse << "\n";

  if (outcome.stop_reason == train::StopReason::mu_ceiling && outcome.accepted_steps == 0) {
    std::cerr << "error: damping reached mu_max without an accepted step; no model written\n";
    return kExitNumerical;
  }

  write_json(args.model, model_to_json({outcome.best_network, schema.codes(), config.split,
                                        config.stratified}));
  return kExitOk;
}

int cmd_eval(const std::string& model_path, const std::string& data_path,
             const std::string& report_path, std::size_t bins) {
  const Model model = load_model(model_path);
  const auto schema = schema_for_codes(model.feature_codes);
  const auto dataset = data::load_csv(data_path, schema);
  if (dataset.feature_count() != model.net.input_size()) {
    throw SchemaError("model expects " + std::to_string(model.net.input_size()) +
                      " features, data provides " + std::to_string(dataset.feature_count()));
  }
  const auto splits =
      train::split_dataset(dataset, model.split, model.net.seed, model.stratified);
  const auto report = eval::build_report(model.net, splits, bins);
  write_json(report_path, report);
  for (const auto& entry : report.at("confusion")) {
    std::cerr << entry.at("split").get<std::string>() << ": "
              << entry.at("correct").get<std::size_t>() << "/"
              << entry.at("total").get<std::size_t>() << " correct ("
              << entry.at("accuracy_percent").get<double>() << "%)\n";
  }
  return kExitOk;
}

int cmd_predict(const std::string& model_path, const std::string& in, const std::string& out) {
  const Model model = load_model(model_path);
  const auto table = text::read_csv(in);

  std::vector<std::size_t> columns;
  for (const auto& code : model.feature_codes) {
    const auto it = std::find(table.header.begin(), table.header.end(), code);
    if (it == table.header.end()) {
      throw SchemaError("'" + in + "' has no column '" + code + "' (model expects " +
                        std::to_string(model.feature_codes.size()) +
                        " features: " + text::join(model.feature_codes, ",") + ")");
    }
    columns.push_back(static_cast<std::size_t>(it - table.header.begin()));
  }

  std::ostringstream csv;
  csv << text::join(model.feature_codes, ",") << ",output_"
      << label_name(model.net.class_order[0]) << ",output_"
      << label_name(model.net.class_order[1]) << ",predicted\n";
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::size_t line = table.line_numbers[r];
    if (row.size() != table.header.size()) {
      throw ParseError(in + ":" + std::to_string(line) + ": expected " +
                           std::to_string(table.header.size()) + " fields",
                       line);
    }
    linalg::Vector features(columns.size());
    for (std::size_t j = 0; j < columns.size(); ++j) {
      if (!text::parse_double(row[columns[j]], features[j]) || !std::isfinite(features[j])) {
        throw ParseError(in + ":" + std::to_string(line) + ": value '" + row[columns[j]] +
                             "' for " + model.feature_codes[j] + " is not numeric",
                         line);
      }
    }
    const auto result = eval::classify(model.net, features);
    for (double x : features) {
      csv << text::format_double(x) << ',';
    }
    csv << text::format_double(result.outputs[0]) << ','
        << text::format_double(result.outputs[1]) << ',' << label_code(result.label) << '\n';
  }
  text::write_file(out, csv.str());
  std::cerr << "wrote " << table.rows.size() << " predictions to " << out << "\n";
  return kExitOk;
}

int cmd_report(const std::string& report_path, const std::string& out) {
  nlohmann::json report;
  try {
    report = nlohmann::json::parse(text::read_file(report_path));
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("report file '" + report_path + "' is not valid JSON: " + e.what());
  }
  text::write_file(out, eval::render_report_text(report));
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Project risk classifier: index construction, MLP training and evaluation",
               "riskann"};
  app.require_subcommand(1, 1);

  // synth
  std::uint64_t synth_seed = 42;
  std::string synth_out;
  data::SynthParams synth_params;
  auto* synth = app.add_subcommand("synth", "Generate the 220-sample synthetic dataset");
  synth->add_option("--seed", synth_seed, "Generator seed")->capture_default_str();
  synth->add_option("--out", synth_out, "Output CSV")->required();
  synth->add_option("--success-mean", synth_params.success_mean, "Feature mean of successes")
      ->capture_default_str();
  synth->add_option("--failure-mean", synth_params.failure_mean, "Feature mean of failures")
      ->capture_default_str();
  synth->add_option("--sd", synth_params.sd, "Feature standard deviation")->capture_default_str();

  // rais
  std::string rais_in;
  std::string rais_schema;
  std::string rais_out;
  double kaiser = 1.0;
  double communality = 0.5;
  auto* rais_cmd = app.add_subcommand("rais", "Select index variables by PCA");
  rais_cmd->add_option("--in", rais_in, "Candidate variable CSV")->required();
  rais_cmd->add_option("--schema", rais_schema, "Candidate schema JSON")->required();
  rais_cmd->add_option("--out", rais_out, "Selection report JSON")->required();
  rais_cmd->add_option("--kaiser", kaiser, "Retain components with eigenvalue above this")
      ->capture_default_str();
  rais_cmd->add_option("--communality", communality, "Keep variables at or above this")
      ->capture_default_str();

  // train
  TrainArgs train_args;
  train::TrainConfig config;
  std::string algo = "lm";
  auto* train_cmd = app.add_subcommand("train", "Train the classifier");
  train_cmd->add_option("--data", train_args.data, "Dataset CSV")->required();
  train_cmd->add_option("--algo", algo, "Training algorithm")
      ->check(CLI::IsMember({"gd", "lm"}))
      ->capture_default_str();
  train_cmd->add_option("--seed", config.seed, "Split and initialization seed")
      ->capture_default_str();
  train_cmd->add_option("--model", train_args.model, "Output model JSON")->required();
  train_cmd->add_option("--log", train_args.log, "Output training log CSV")->required();
  train_cmd->add_option("--alpha", config.learning_rate, "Learning rate (gd)")
      ->capture_default_str();
  train_cmd->add_option("--mu0", config.mu0, "Initial damping (lm)")->capture_default_str();
  train_cmd->add_option("--max-epochs", config.max_epochs, "Epoch budget")->capture_default_str();
  train_cmd->add_option("--max-fail", config.max_validation_failures,
                        "Consecutive validation failures before stopping")
      ->capture_default_str();
  train_cmd->add_option("--split", train_args.split, "train,validation,test ratios")
      ->capture_default_str();
  train_cmd->add_flag("--no-stratify", train_args.no_stratify, "Shuffle without stratifying");
  train_cmd->add_option("--hidden", train_args.hidden, "Hidden layer sizes")
      ->delimiter(',')
      ->capture_default_str();
  train_cmd->add_option("--schema", train_args.schema, "Feature schema JSON");

  // eval
  std::string eval_model;
  std::string eval_data;
  std::string eval_report;
  std::size_t bins = eval::kDefaultHistogramBins;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a model on its splits");
  eval_cmd->add_option("--model", eval_model, "Model JSON")->required();
  eval_cmd->add_option("--data", eval_data, "Dataset CSV")->required();
  eval_cmd->add_option("--report", eval_report, "Output report JSON")->required();
  eval_cmd->add_option("--bins", bins, "Error histogram bins")->capture_default_str();

  // predict
  std::string predict_model;
  std::string predict_in;
  std::string predict_out;
  auto* predict_cmd = app.add_subcommand("predict", "Classify feature rows");
  predict_cmd->add_option("--model", predict_model, "Model JSON")->required();
  predict_cmd->add_option("--in", predict_in, "Feature CSV")->required();
  predict_cmd->add_option("--out", predict_out, "Output CSV")->required();

  // report
  std::string report_in;
  std::string report_out;
  auto* report_cmd = app.add_subcommand("report", "Render a report as text tables");
  report_cmd->add_option("--report", report_in, "Report JSON")->required();
  report_cmd->add_option("--out", report_out, "Output text file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      return app.exit(e, std::cerr, std::cerr);
    }
    std::cerr << "error: " << e.what() << "\n\n";
    const CLI::App* target = &app;
    for (const auto* sub : app.get_subcommands()) {
      target = sub;
    }
    std::cerr << target->help();
    return kExitUsage;
  }

  const CLI::App* selected = app.get_subcommands().front();
  print_config(*selected);

  try {
    if (selected == synth) {
      return cmd_synth(synth_seed, synth_out, synth_params);
    }
    if (selected == rais_cmd) {
      return cmd_rais(rais_in, rais_schema, rais_out, kaiser, communality);
    }
    if (selected == train_cmd) {
      config.algorithm = algo == "gd" ? train::Algorithm::gd : train::Algorithm::lm;
      return cmd_train(train_args, config);
    }
    if (selected == eval_cmd) {
      return cmd_eval(eval_model, eval_data, eval_report, bins);
    }
    if (selected == predict_cmd) {
      return cmd_predict(predict_model, predict_in, predict_out);
    }
    return cmd_report(report_in, report_out);
  } catch (const ParameterError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DivergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const DefinitenessError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const SymmetryError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
}

int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) {
    argv.push_back(a.c_str());
  }
  return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace riskann::cli
