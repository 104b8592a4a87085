#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "riskann/linalg.hpp"

namespace riskann::rais {

using linalg::Matrix;
using linalg::Vector;

/// The six risk contents; each owns one code letter, A through F.
enum class RiskContent { rnd, technical, production, marketing, management, environmental };

std::string_view content_name(RiskContent content) noexcept;
char content_letter(RiskContent content) noexcept;
RiskContent parse_content(std::string_view name);

struct RiskVariable {
  std::string code;
  std::string label;
  RiskContent content;

  bool operator==(const RiskVariable&) const = default;
};

struct RaisSchema {
  std::vector<RiskVariable> variables;
  std::string version;

  std::size_t size() const noexcept { return variables.size(); }
  std::vector<std::string> codes() const;

  /// Throws SchemaError unless the schema is non-empty, codes are unique and
  /// each code starts with its content letter.
  void validate() const;
};

/// The twenty candidate risk variables grouped into six contents.
RaisSchema default_candidate_schema();

/// The seventeen-variable index system used as classifier input.
RaisSchema default_retained_schema();

struct Standardized {
  Matrix z;
  Vector means;
  Vector stds;
};

/// Column-wise z-scores with the n-1 sample standard deviation. `names`, when
/// given, labels columns in error messages.
Standardized standardize(const Matrix& x, std::span<const std::string> names = {});

struct PcaResult {
  Vector eigenvalues;
  Matrix loadings;  // variables x components, eigenvector * sqrt(eigenvalue)
  Vector explained_variance_ratio;
  Vector communalities;
  std::size_t retained_component_count = 0;
  std::vector<std::string> warnings;
};

/// Correlation-matrix PCA on standardized data. Components whose eigenvalue
/// exceeds kaiser_threshold are retained (at least one always is).
PcaResult pca(const Matrix& z, double kaiser_threshold = 1.0);

struct SelectionEntry {
  std::string code;
  double communality = 0.0;
  bool kept = false;
};

struct Selection {
  RaisSchema schema;
  std::vector<SelectionEntry> report;
};

Selection select_variables(const RaisSchema& candidates, const PcaResult& result,
                           double communality_threshold = 0.5);

nlohmann::ordered_json to_json(const RaisSchema& schema);
RaisSchema schema_from_json(const nlohmann::json& json);
RaisSchema load_schema(const std::string& path);

nlohmann::ordered_json to_json(const PcaResult& result, const Selection& selection);

}  // namespace riskann::rais
