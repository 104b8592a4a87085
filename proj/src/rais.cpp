#include "riskann/rais.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "riskann/error.hpp"

namespace riskann::rais {

namespace {

struct ContentInfo {
  RiskContent content;
  std::string_view name;
  char letter;
};

constexpr std::array<ContentInfo, 6> kContents{{
    {RiskContent::rnd, "R&D", 'A'},
    {RiskContent::technical, "Technical", 'B'},
    {RiskContent::production, "Production", 'C'},
    {RiskContent::marketing, "Marketing", 'D'},
    {RiskContent::management, "Management", 'E'},
    {RiskContent::environmental, "Environmental", 'F'},
}};

const ContentInfo& info(RiskContent content) {
  return kContents[static_cast<std::size_t>(content)];
}

std::vector<RiskVariable> candidate_variables() {
  using RC = RiskContent;
  return {
      {"A1", "The financial resources availability", RC::rnd},
      {"A2", "Capable human resources", RC::rnd},
      {"A3", "Knowledge resources", RC::rnd},
      {"B1", "Technical Maturity", RC::technical},
      {"B2", "Technology substitutability", RC::technical},
      {"B3", "Technology advantage", RC::technical},
      {"C1", "The standardization degree of the production tools", RC::production},
      {"C2", "The standardization degree of the production process", RC::production},
      {"C3", "The supply capability of the raw material", RC::production},
      {"D1", "Market prospects", RC::marketing},
      {"D2", "Substitute products", RC::marketing},
      {"D3", "The Product life cycles", RC::marketing},
      {"D4", "Product competitiveness", RC::marketing},
      {"D5", "Possibility of new entrants", RC::marketing},
      {"E1", "The degree of managers' technical competencies", RC::management},
      {"E2", "The maturity of Project management methods", RC::management},
      {"E3", "The scientific weights of decisions", RC::management},
      {"E4", "The quality of managers' behavior", RC::management},
      {"F1", "The quality of conformation to cultural norms", RC::environmental},
      {"F2", "The degree of governmental support", RC::environmental},
  };
}

}  // namespace

std::string_view content_name(RiskContent content) noexcept { return info(content).name; }

char content_letter(RiskContent content) noexcept { return info(content).letter; }

RiskContent parse_content(std::string_view name) {
  for (const auto& c : kContents) {
    if (c.name == name) {
      return c.content;
    }
  }
  throw SchemaError("unknown risk content '" + std::string(name) + "'");
}

std::vector<std::string> RaisSchema::codes() const {
  std::vector<std::string> out;
  out.reserve(variables.size());
  for (const auto& v : variables) {
    out.push_back(v.code);
  }
  return out;
}

void RaisSchema::validate() const {
  if (variables.empty()) {
    throw SchemaError("schema has no variables");
  }
  std::set<std::string> seen;
  for (const auto& v : variables) {
    if (v.code.empty()) {
      throw SchemaError("schema variable with empty code");
    }
    if (!seen.insert(v.code).second) {
      throw SchemaError("duplicate variable code '" + v.code + "'");
    }
    if (v.code.front() != content_letter(v.content)) {
      throw SchemaError("variable '" + v.code + "' does not belong to content " +
                        std::string(content_name(v.content)));
    }
  }
}

RaisSchema default_candidate_schema() {
  return {candidate_variables(), "candidates-20"};
}

RaisSchema default_retained_schema() {
  auto vars = candidate_variables();
  std::erase_if(vars, [](const RiskVariable& v) {
    return v.code == "B2" || v.code == "D3" || v.code == "E2";
  });
  return {std::move(vars), "rais-17"};
}

Standardized standardize(const Matrix& x, std::span<const std::string> names) {
  const std::size_t n = x.rows();
  const std::size_t p = x.cols();
  if (n < 2) {
    throw ParameterError("standardize: need at least 2 samples");
  }
  Standardized out{Matrix(n, p), Vector(p, 0.0), Vector(p, 0.0)};
  for (std::size_t j = 0; j < p; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      mean += x(i, j);
    }
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = x(i, j) - mean;
      ss += d * d;
    }
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (!(sd > 1e-12 * std::max(1.0, std::abs(mean)))) {
      const std::string column =
          j < names.size() ? "'" + names[j] + "'" : std::to_string(j);
      throw DegenerateVariableError("standardize: column " + column + " has zero variance");
    }
    out.means[j] = mean;
    out.stds[j] = sd;
    for (std::size_t i = 0; i < n; ++i) {
      out.z(i, j) = (x(i, j) - mean) / sd;
    }
  }
  return out;
}

PcaResult pca(const Matrix& z, double kaiser_threshold) {
  const std::size_t n = z.rows();
  const std::size_t p = z.cols();
  if (n < 2) {
    throw ParameterError("pca: need at least 2 samples");
  }

  PcaResult out;
  if (n <= p) {
    out.warnings.push_back("pca: " + std::to_string(n) + " samples for " + std::to_string(p) +
                           " variables; correlation matrix is rank deficient");
  }

  Matrix corr(p, p);
  for (std::size_t a = 0; a < p; ++a) {
    for (std::size_t b = a; b < p; ++b) {
      double sum = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        sum += z(i, a) * z(i, b);
      }
      corr(a, b) = corr(b, a) = sum / static_cast<double>(n - 1);
    }
  }

  auto eig = linalg::sym_eig(corr);
  double total = 0.0;
  for (double& lambda : eig.values) {
    // A correlation matrix is positive semidefinite; negatives are rounding.
    lambda = std::max(lambda, 0.0);
    total += lambda;
  }

  out.eigenvalues = eig.values;
  out.loadings = Matrix(p, p);
  for (std::size_t k = 0; k < p; ++k) {
    const double root = std::sqrt(eig.values[k]);
    for (std::size_t i = 0; i < p; ++i) {
      out.loadings(i, k) = eig.vectors(i, k) * root;
    }
  }
  out.explained_variance_ratio.resize(p);
  for (std::size_t k = 0; k < p; ++k) {
    out.explained_variance_ratio[k] = eig.values[k] / total;
  }

  out.retained_component_count = static_cast<std::size_t>(
      std::count_if(eig.values.begin(), eig.values.end(),
                    [&](double lambda) { return lambda > kaiser_threshold; }));
  out.retained_component_count = std::max<std::size_t>(out.retained_component_count, 1);

  out.communalities.assign(p, 0.0);
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t k = 0; k < out.retained_component_count; ++k) {
      out.communalities[i] += out.loadings(i, k) * out.loadings(i, k);
    }
  }
  return out;
}

Selection select_variables(const RaisSchema& candidates, const PcaResult& result,
                           double communality_threshold) {
  if (!(communality_threshold >= 0.0 && communality_threshold <= 1.0)) {
    throw ParameterError("communality threshold must lie in [0, 1]");
  }
  if (result.communalities.size() != candidates.size()) {
    std::ostringstream msg;
    msg << "select_variables: PCA covers " << result.communalities.size()
        << " variables, schema has " << candidates.size();
    throw ShapeError(msg.str());
  }

  Selection out;
  out.schema.version = candidates.version + "-selected";
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto& var = candidates.variables[i];
    const double h = result.communalities[i];
    const bool kept = h >= communality_threshold;
    out.report.push_back({var.code, h, kept});
    if (kept) {
      out.schema.variables.push_back(var);
    }
  }
  if (out.schema.variables.empty()) {
    throw ParameterError("no variable reaches communality threshold " +
                         std::to_string(communality_threshold));
  }
  return out;
}

nlohmann::ordered_json to_json(const RaisSchema& schema) {
  auto out = nlohmann::ordered_json::array();
  for (const auto& v : schema.variables) {
    out.push_back({{"code", v.code},
                   {"label", v.label},
                   {"content", std::string(content_name(v.content))}});
  }
  return out;
}

RaisSchema schema_from_json(const nlohmann::json& json) {
  if (!json.is_array()) {
    throw SchemaError("schema file must hold a JSON list of {code, label, content}");
  }
  RaisSchema schema;
  schema.version = "file";
  try {
    for (const auto& item : json) {
      schema.variables.push_back({item.at("code").get<std::string>(),
                                  item.at("label").get<std::string>(),
                                  parse_content(item.at("content").get<std::string>())});
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed schema entry: ") + e.what());
  }
  schema.validate();
  return schema;
}

RaisSchema load_schema(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open schema file '" + path + "'");
  }
  nlohmann::json json;
  try {
    in >> json;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("schema file '" + path + "' is not valid JSON: " + e.what());
  }
  return schema_from_json(json);
}

nlohmann::ordered_json to_json(const PcaResult& result, const Selection& selection) {
  nlohmann::ordered_json out;
  out["eigenvalues"] = result.eigenvalues;
  out["explained_variance_ratio"] = result.explained_variance_ratio;
  out["retained_components"] = result.retained_component_count;
  auto report = nlohmann::ordered_json::array();
  for (const auto& entry : selection.report) {
    report.push_back(
        {{"code", entry.code}, {"communality", entry.communality}, {"kept", entry.kept}});
  }
  out["report"] = std::move(report);
  out["retained_schema"] = to_json(selection.schema);
  out["warnings"] = result.warnings;
  return out;
}

}  // namespace riskann::rais
