#include <cmath>
#include <filesystem>
#include <string>

#include <gtest/gtest.h>

#include "riskann/data.hpp"
#include "riskann/error.hpp"
#include "riskann/rng.hpp"
#include "riskann/text.hpp"

namespace {

using riskann::Label;
namespace data = riskann::data;
namespace fs = std::filesystem;
namespace text = riskann::text;

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("riskann-data-" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
             "-" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

std::string header_without(const std::string& code) {
  std::string h = "firm,period";
  for (const auto& c : riskann::rais::default_retained_schema().codes()) {
    if (c != code) {
      h += "," + c;
    }
  }
  return h + ",label\n";
}

TEST(Text, FormatDoubleRoundTrips) {
  riskann::Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double x = rng.normal() * std::pow(10.0, rng.uniform(-20, 20));
    double back = 0.0;
    ASSERT_TRUE(text::parse_double(text::format_double(x), back));
    EXPECT_EQ(back, x);
  }
  EXPECT_EQ(text::format_double(0.5), "0.5");
}

TEST(Text, ParsersRejectTrailingJunk) {
  double d = 0.0;
  long long n = 0;
  EXPECT_FALSE(text::parse_double("1.5x", d));
  EXPECT_FALSE(text::parse_double("", d));
  EXPECT_FALSE(text::parse_int("3.0", n));
  EXPECT_TRUE(text::parse_int("42", n));
  EXPECT_EQ(n, 42);
}

TEST(Text, CsvSkipsBlankLinesAndTracksLineNumbers) {
  const auto t = text::parse_csv("a,b\r\n1,2\n\n3,4\n", "mem");
  EXPECT_EQ(t.header, (std::vector<std::string>{"a", "b"}));
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.line_numbers, (std::vector<std::size_t>{2, 4}));
  EXPECT_EQ(t.rows[1], (std::vector<std::string>{"3", "4"}));
}

TEST(Text, MissingFileIsIoError) {
  EXPECT_THROW(text::read_file("/nonexistent/riskann.csv"), riskann::IoError);
}

TEST(ReferenceTallies, CellsSumToPrintedTotals) {
  const auto& cells = data::reference_tallies();
  const auto& totals = data::reference_period_totals();
  std::size_t s = 0;
  std::size_t f = 0;
  for (int p = 0; p < data::kPeriodCount; ++p) {
    data::Tally sum;
    for (int firm = 0; firm < data::kFirmCount; ++firm) {
      sum.successes += cells[firm][p].successes;
      sum.failures += cells[firm][p].failures;
    }
    EXPECT_EQ(sum, totals[p]) << "period " << p + 1;
    s += sum.successes;
    f += sum.failures;
  }
  EXPECT_EQ(s, 164u);
  EXPECT_EQ(f, 56u);
  EXPECT_EQ(s + f, data::kReferenceSampleCount);
  EXPECT_EQ(totals[0], (data::Tally{21, 16}));
  EXPECT_EQ(totals[3], (data::Tally{58, 10}));
}

TEST(Synth, TalliesMatchReferenceForAnySeed) {
  for (std::uint64_t seed : {0ull, 1ull, 42ull, 123456789ull}) {
    const auto d = data::synth_generate(seed);
    EXPECT_EQ(d.size(), 220u);
    EXPECT_EQ(data::firm_period_tallies(d), data::reference_tallies());
    const auto periods = data::period_tallies(d);
    EXPECT_EQ(periods, data::reference_period_totals());
    EXPECT_EQ(periods[0], (data::Tally{21, 16}));
  }
}

TEST(Synth, FeaturesInUnitIntervalAndDeterministic) {
  const auto a = data::synth_generate(42);
  const auto b = data::synth_generate(42);
  EXPECT_EQ(a.samples, b.samples);
  EXPECT_NE(a.samples, data::synth_generate(43).samples);
  EXPECT_NO_THROW(a.validate());
  for (const auto& s : a.samples) {
    ASSERT_EQ(s.features.size(), 17u);
    for (double x : s.features) {
      EXPECT_GE(x, 0.0);
      EXPECT_LE(x, 1.0);
    }
  }
}

TEST(Synth, ClassMeansSeparate) {
  const auto d = data::synth_generate(8);
  double succ = 0.0;
  double fail = 0.0;
  for (const auto& s : d.samples) {
    for (double x : s.features) {
      (s.label == Label::success ? succ : fail) += x;
    }
  }
  succ /= 164.0 * 17.0;
  fail /= 56.0 * 17.0;
  // Truncation to [0, 1] pulls both means slightly toward 0.5.
  EXPECT_NEAR(succ, 0.65, 0.03);
  EXPECT_NEAR(fail, 0.40, 0.03);
}

TEST(Synth, ParameterValidation) {
  EXPECT_THROW(data::synth_generate(0, {0.65, 0.4, 0.0}), riskann::ParameterError);
  EXPECT_THROW(data::synth_generate(0, {1.5, 0.4, 0.1}), riskann::ParameterError);
}

TEST(Csv, SaveLoadRoundTrip) {
  TempDir dir;
  const auto d = data::synth_generate(3);
  data::save_csv(d, dir.file("d.csv"));
  const auto back = data::load_csv(dir.file("d.csv"));
  EXPECT_EQ(back.samples, d.samples);
  EXPECT_EQ(back.schema.variables, d.schema.variables);
  EXPECT_EQ(data::to_csv(back), data::to_csv(d));
}

TEST(Csv, MissingColumnNamed) {
  try {
    data::parse_csv(header_without("D4"), "mem");
    FAIL() << "expected SchemaError";
  } catch (const riskann::SchemaError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("'D4'"), std::string::npos) << msg;
    EXPECT_NE(msg.find("17"), std::string::npos) << msg;
  }
}

TEST(Csv, MisorderedColumnReported) {
  auto codes = riskann::rais::default_retained_schema().codes();
  std::swap(codes[0], codes[1]);
  std::string h = "firm,period";
  for (const auto& c : codes) {
    h += "," + c;
  }
  try {
    data::parse_csv(h + ",label\n", "mem");
    FAIL() << "expected SchemaError";
  } catch (const riskann::SchemaError& e) {
    EXPECT_NE(std::string(e.what()).find("column 3"), std::string::npos) << e.what();
  }
}

TEST(Csv, RowErrorsCarryLineNumbers) {
  const std::string head = data::to_csv({riskann::rais::default_retained_schema(), {}});
  std::string good = "1,1";
  for (int i = 0; i < 17; ++i) {
    good += ",0.5";
  }
  const std::string bad_value = "2,3,abc" + good.substr(7) + ",F\n";
  try {
    data::parse_csv(head + good + ",S\n" + bad_value, "rows.csv");
    FAIL() << "expected ParseError";
  } catch (const riskann::ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_NE(std::string(e.what()).find("rows.csv:3"), std::string::npos) << e.what();
  }
  EXPECT_THROW(data::parse_csv(head + good + ",X\n", "m"), riskann::ParseError);
  EXPECT_THROW(data::parse_csv(head + "11" + good.substr(1) + ",S\n", "m"), riskann::ParseError);
  EXPECT_THROW(data::parse_csv(head + good + ",1.5,S\n", "m"), riskann::ParseError);
  std::string out_of_range = "1,1,1.5";
  for (int i = 0; i < 16; ++i) {
    out_of_range += ",0.5";
  }
  EXPECT_THROW(data::parse_csv(head + out_of_range + ",S\n", "m"), riskann::ParseError);
}

TEST(Csv, LabelSpellings) {
  const std::string head = data::to_csv({riskann::rais::default_retained_schema(), {}});
  std::string row = "1,1";
  for (int i = 0; i < 17; ++i) {
    row += ",0";
  }
  const auto d = data::parse_csv(head + row + ",success\n" + row + ",failure\n" + row + ",S\n",
                                 "m");
  EXPECT_EQ(d.samples[0].label, Label::success);
  EXPECT_EQ(d.samples[1].label, Label::failure);
  EXPECT_EQ(d.samples[2].label, Label::success);
}

TEST(Dataset, ValidateChecksWidthAndRanges) {
  data::Dataset d{riskann::rais::default_retained_schema(), {}};
  d.samples.push_back({1, 1, std::vector<double>(16, 0.5), Label::success});
  EXPECT_THROW(d.validate(), riskann::ShapeError);
  d.samples[0].features.assign(17, 0.5);
  d.samples[0].period = 5;
  EXPECT_THROW(d.validate(), riskann::ParameterError);
}

}  // namespace
