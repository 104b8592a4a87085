#include <cmath>
#include <set>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "riskann/error.hpp"
#include "riskann/rais.hpp"

namespace {

using riskann::Rng;
using riskann::linalg::Matrix;
using riskann::linalg::Vector;
namespace rais = riskann::rais;

TEST(Schema, CandidateHasTwentyVariablesInSixContents) {
  const auto schema = rais::default_candidate_schema();
  ASSERT_EQ(schema.size(), 20u);
  EXPECT_NO_THROW(schema.validate());
  std::set<rais::RiskContent> contents;
  for (const auto& v : schema.variables) {
    contents.insert(v.content);
    EXPECT_EQ(v.code.front(), rais::content_letter(v.content));
  }
  EXPECT_EQ(contents.size(), 6u);
}

TEST(Schema, RetainedIsCandidateMinusThreeVariables) {
  const auto candidates = rais::default_candidate_schema();
  const auto retained = rais::default_retained_schema();
  ASSERT_EQ(retained.size(), 17u);
  std::vector<rais::RiskVariable> expected;
  for (const auto& v : candidates.variables) {
    if (v.code != "B2" && v.code != "D3" && v.code != "E2") {
      expected.push_back(v);
    }
  }
  EXPECT_EQ(retained.variables, expected);
}

TEST(Schema, ValidationRejectsBadSchemas) {
  rais::RaisSchema empty;
  EXPECT_THROW(empty.validate(), riskann::SchemaError);
  rais::RaisSchema dup{{{"A1", "x", rais::RiskContent::rnd}, {"A1", "y", rais::RiskContent::rnd}},
                       "t"};
  EXPECT_THROW(dup.validate(), riskann::SchemaError);
  rais::RaisSchema wrong_letter{{{"B1", "x", rais::RiskContent::rnd}}, "t"};
  EXPECT_THROW(wrong_letter.validate(), riskann::SchemaError);
}

TEST(Schema, ContentNamesRoundTrip) {
  for (auto c : {rais::RiskContent::rnd, rais::RiskContent::technical,
                 rais::RiskContent::production, rais::RiskContent::marketing,
                 rais::RiskContent::management, rais::RiskContent::environmental}) {
    EXPECT_EQ(rais::parse_content(rais::content_name(c)), c);
  }
  EXPECT_EQ(rais::content_name(rais::RiskContent::rnd), "R&D");
  EXPECT_THROW(rais::parse_content("Legal"), riskann::SchemaError);
}

TEST(Schema, JsonRoundTrip) {
  const auto schema = rais::default_candidate_schema();
  const auto back = rais::schema_from_json(nlohmann::json::parse(rais::to_json(schema).dump()));
  EXPECT_EQ(back.variables, schema.variables);
}

TEST(Schema, ShippedFilesMatchBuiltInDefaults) {
  const std::string dir = std::string(RISKANN_SOURCE_DIR) + "/data/";
  EXPECT_EQ(rais::load_schema(dir + "schema_candidates.json").variables,
            rais::default_candidate_schema().variables);
  EXPECT_EQ(rais::load_schema(dir + "schema_rais.json").variables,
            rais::default_retained_schema().variables);
}

TEST(Schema, MissingFileIsIoError) {
  EXPECT_THROW(rais::load_schema("/nonexistent/schema.json"), riskann::IoError);
}

TEST(Standardize, HandColumn) {
  const auto s = rais::standardize(Matrix{{1}, {2}, {3}});
  EXPECT_DOUBLE_EQ(s.z(0, 0), -1.0);
  EXPECT_DOUBLE_EQ(s.z(1, 0), 0.0);
  EXPECT_DOUBLE_EQ(s.z(2, 0), 1.0);
  EXPECT_DOUBLE_EQ(s.means[0], 2.0);
  EXPECT_DOUBLE_EQ(s.stds[0], 1.0);
}

TEST(Standardize, Idempotent) {
  Rng rng(4);
  const auto once = rais::standardize(riskann::testing::random_matrix(rng, 30, 4));
  const auto twice = rais::standardize(once.z);
  for (std::size_t i = 0; i < once.z.data().size(); ++i) {
    EXPECT_NEAR(once.z.data()[i], twice.z.data()[i], 1e-12);
  }
}

TEST(Standardize, ColumnsHaveZeroMeanUnitSd) {
  Rng rng(8);
  const auto s = rais::standardize(riskann::testing::random_matrix(rng, 40, 5, 0.0, 7.0));
  for (std::size_t j = 0; j < 5; ++j) {
    double mean = 0.0;
    double ss = 0.0;
    for (std::size_t i = 0; i < 40; ++i) {
      mean += s.z(i, j);
      ss += s.z(i, j) * s.z(i, j);
    }
    EXPECT_NEAR(mean / 40.0, 0.0, 1e-12);
    EXPECT_NEAR(ss / 39.0, 1.0, 1e-12);
  }
}

TEST(Standardize, ConstantColumnNamesTheColumn) {
  const std::vector<std::string> names{"A1", "C4"};
  try {
    rais::standardize(Matrix{{1, 5}, {2, 5}, {3, 5}}, names);
    FAIL() << "expected DegenerateVariableError";
  } catch (const riskann::DegenerateVariableError& e) {
    EXPECT_NE(std::string(e.what()).find("C4"), std::string::npos);
  }
}

TEST(Standardize, NeedsTwoSamples) {
  EXPECT_THROW(rais::standardize(Matrix{{1, 2}}), riskann::ParameterError);
}

TEST(Pca, PerfectlyCorrelatedPair) {
  const auto s = rais::standardize(Matrix{{1, 2}, {2, 4}, {3, 6}, {4, 8}});
  const auto r = rais::pca(s.z);
  EXPECT_NEAR(r.eigenvalues[0], 2.0, 1e-12);
  EXPECT_NEAR(r.eigenvalues[1], 0.0, 1e-12);
  EXPECT_EQ(r.retained_component_count, 1u);
  EXPECT_NEAR(r.communalities[0], 1.0, 1e-12);
  EXPECT_NEAR(r.communalities[1], 1.0, 1e-12);
}

TEST(Pca, UncorrelatedVariablesGiveUnitEigenvalues) {
  Rng rng(31);
  const std::size_t n = 20000;
  const std::size_t p = 4;
  Matrix x(n, p);
  for (double& v : x.data()) {
    v = rng.normal();
  }
  const auto r = rais::pca(rais::standardize(x).z);
  for (std::size_t k = 0; k < p; ++k) {
    EXPECT_NEAR(r.eigenvalues[k], 1.0, 0.05);
    EXPECT_NEAR(r.explained_variance_ratio[k], 0.25, 0.0125);
  }
}

Matrix correlated_block(Rng& rng, std::size_t n, std::size_t p) {
  Matrix x(n, p);
  for (std::size_t i = 0; i < n; ++i) {
    const double factor = rng.normal();
    for (std::size_t j = 0; j < p; ++j) {
      x(i, j) = factor + 0.4 * rng.normal() + 0.1 * static_cast<double>(j);
    }
  }
  return x;
}

TEST(Pca, ResultInvariants) {
  Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t p = 2 + rng.below(8);
    const std::size_t n = 5 + rng.below(60);
    const auto r = rais::pca(rais::standardize(riskann::testing::random_matrix(rng, n, p)).z);
    double ratio_sum = 0.0;
    double communality_sum = 0.0;
    for (std::size_t k = 0; k < p; ++k) {
      EXPECT_GE(r.eigenvalues[k], -1e-10);
      ratio_sum += r.explained_variance_ratio[k];
      EXPECT_GE(r.communalities[k], 0.0);
      EXPECT_LE(r.communalities[k], 1.0 + 1e-9);
      communality_sum += r.communalities[k];
      if (k > 0) {
        EXPECT_GE(r.eigenvalues[k - 1], r.eigenvalues[k]);
      }
    }
    EXPECT_NEAR(ratio_sum, 1.0, 1e-9);
    double retained_sum = 0.0;
    for (std::size_t k = 0; k < r.retained_component_count; ++k) {
      retained_sum += r.eigenvalues[k];
    }
    EXPECT_NEAR(communality_sum, retained_sum, 1e-9);
    EXPECT_LE(communality_sum, static_cast<double>(p) + 1e-9);
    EXPECT_GE(r.retained_component_count, 1u);
  }
}

TEST(Pca, ScaleInvariance) {
  Rng rng(21);
  const Matrix x = correlated_block(rng, 200, 5);
  Matrix scaled = x;
  const std::vector<double> factors{3.0, 0.01, 250.0, 1.0, 7.5};
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < x.cols(); ++j) {
      scaled(i, j) *= factors[j];
    }
  }
  const auto a = rais::pca(rais::standardize(x).z);
  const auto b = rais::pca(rais::standardize(scaled).z);
  ASSERT_EQ(a.retained_component_count, b.retained_component_count);
  for (std::size_t k = 0; k < 5; ++k) {
    EXPECT_NEAR(a.eigenvalues[k], b.eigenvalues[k], 1e-9);
    EXPECT_NEAR(a.communalities[k], b.communalities[k], 1e-9);
    for (std::size_t i = 0; i < 5; ++i) {
      EXPECT_NEAR(a.loadings(i, k), b.loadings(i, k), 1e-9);
    }
  }
}

TEST(Pca, FewSamplesWarns) {
  const auto r = rais::pca(rais::standardize(Matrix{{1, 2, 0}, {2, 1, 1}, {0, 3, 5}}).z);
  EXPECT_FALSE(r.warnings.empty());
}

// Correlation matrix straight from raw data, then power iteration with
// deflation for every eigenvalue above 1; returns each variable's
// communality over those components.
std::vector<double> communality_oracle(const Matrix& x) {
  const std::size_t n = x.rows();
  const std::size_t p = x.cols();
  std::vector<double> mean(p, 0.0);
  std::vector<double> sd(p, 0.0);
  for (std::size_t j = 0; j < p; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      mean[j] += x(i, j) / static_cast<double>(n);
    }
    for (std::size_t i = 0; i < n; ++i) {
      sd[j] += (x(i, j) - mean[j]) * (x(i, j) - mean[j]);
    }
    sd[j] = std::sqrt(sd[j]);
  }
  std::vector<std::vector<double>> c(p, std::vector<double>(p, 0.0));
  for (std::size_t a = 0; a < p; ++a) {
    for (std::size_t b = 0; b < p; ++b) {
      for (std::size_t i = 0; i < n; ++i) {
        c[a][b] += (x(i, a) - mean[a]) * (x(i, b) - mean[b]);
      }
      c[a][b] /= sd[a] * sd[b];
    }
  }
  std::vector<double> h(p, 0.0);
  for (std::size_t k = 0; k < p; ++k) {
    std::vector<double> v(p, 1.0);
    v[k % p] += 0.5;
    double lambda = 0.0;
    for (int it = 0; it < 20000; ++it) {
      std::vector<double> w(p, 0.0);
      for (std::size_t a = 0; a < p; ++a) {
        for (std::size_t b = 0; b < p; ++b) {
          w[a] += c[a][b] * v[b];
        }
      }
      double norm = 0.0;
      for (double e : w) {
        norm += e * e;
      }
      norm = std::sqrt(norm);
      lambda = norm;
      for (std::size_t a = 0; a < p; ++a) {
        v[a] = w[a] / norm;
      }
    }
    if (lambda <= 1.0) {
      break;
    }
    for (std::size_t a = 0; a < p; ++a) {
      h[a] += lambda * v[a] * v[a];
      for (std::size_t b = 0; b < p; ++b) {
        c[a][b] -= lambda * v[a] * v[b];
      }
    }
  }
  return h;
}

TEST(Selection, AppendedNoiseVariableIsDropped) {
  Rng rng(1);
  const std::size_t n = 300;
  Matrix x(n, 4);
  for (std::size_t i = 0; i < n; ++i) {
    const double factor = rng.normal();
    for (std::size_t j = 0; j < 3; ++j) {
      x(i, j) = factor + 0.5 * rng.normal();
    }
    x(i, 3) = rng.normal();
  }
  const auto oracle = communality_oracle(x);
  ASSERT_LT(oracle[3], 0.5);

  const rais::RaisSchema candidates{{{"A1", "a", rais::RiskContent::rnd},
                                     {"A2", "b", rais::RiskContent::rnd},
                                     {"A3", "c", rais::RiskContent::rnd},
                                     {"F9", "noise", rais::RiskContent::environmental}},
                                    "t"};
  const auto result = rais::pca(rais::standardize(x).z);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_NEAR(result.communalities[i], oracle[i], 1e-8);
  }
  const auto sel = rais::select_variables(candidates, result, 0.5);
  EXPECT_EQ(sel.schema.codes(), (std::vector<std::string>{"A1", "A2", "A3"}));
  EXPECT_FALSE(sel.report[3].kept);
}

TEST(Selection, StrongLoadingsKeepEverything) {
  Rng rng(2);
  const auto candidates = rais::RaisSchema{{{"A1", "a", rais::RiskContent::rnd},
                                            {"A2", "b", rais::RiskContent::rnd},
                                            {"A3", "c", rais::RiskContent::rnd}},
                                           "t"};
  const auto result = rais::pca(rais::standardize(correlated_block(rng, 200, 3)).z);
  const auto sel = rais::select_variables(candidates, result, 0.5);
  EXPECT_EQ(sel.schema.variables, candidates.variables);
}

TEST(Selection, OutputIsSubsequenceOfCandidates) {
  Rng rng(6);
  const auto candidates = rais::default_candidate_schema();
  for (int trial = 0; trial < 10; ++trial) {
    Matrix x = riskann::testing::random_matrix(rng, 60, 20);
    const auto result = rais::pca(rais::standardize(x).z);
    rais::Selection sel;
    try {
      sel = rais::select_variables(candidates, result, rng.uniform(0.0, 1.0));
    } catch (const riskann::ParameterError&) {
      continue;
    }
    std::size_t cursor = 0;
    for (const auto& v : sel.schema.variables) {
      while (cursor < candidates.size() && !(candidates.variables[cursor] == v)) {
        ++cursor;
      }
      ASSERT_LT(cursor, candidates.size());
      ++cursor;
    }
  }
}

TEST(Selection, ThresholdOutsideUnitIntervalRejected) {
  const auto r = rais::pca(rais::standardize(Matrix{{1, 2}, {2, 1}, {3, 5}}).z);
  const rais::RaisSchema s{{{"A1", "a", rais::RiskContent::rnd}, {"A2", "b", rais::RiskContent::rnd}},
                           "t"};
  EXPECT_THROW(rais::select_variables(s, r, -0.1), riskann::ParameterError);
  EXPECT_THROW(rais::select_variables(s, r, 1.5), riskann::ParameterError);
}

}  // namespace
