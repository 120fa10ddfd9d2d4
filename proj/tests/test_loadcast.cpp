#include "robustfit/loadcast.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "test_support.hpp"

using namespace robustfit;

namespace {

std::string day_csv() {
  std::ostringstream os;
  os << "timestamp,load,temperature\n";
  for (int h = 0; h < 24; ++h) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "2014-03-05T%02d:00:00,%d,%d.5\n", h, 1000 + 10 * h, 40 + h);
    os << buf;
  }
  return os.str();
}

LoadTable parse(const std::string& text) {
  std::istringstream in(text);
  return parse_csv(in);
}

LoadTable one_year(std::uint64_t seed = 0) {
  SyntheticLoadSpec spec;
  spec.years = 1;
  spec.seed = seed;
  return synthetic_load_table(spec);
}

}  // namespace

TEST(HourStamp, CalendarArithmetic) {
  const HourStamp t{2014, 3, 5, 7};
  EXPECT_EQ(t.weekday(), 2u);  // Wednesday
  EXPECT_EQ(HourStamp::from_ordinal(t.ordinal()), t);
  EXPECT_EQ(HourStamp::from_ordinal(t.ordinal() + 17), (HourStamp{2014, 3, 6, 0}));
  EXPECT_EQ((HourStamp{1970, 1, 1, 5}).ordinal(), 5);
  EXPECT_EQ(HourStamp::from_ordinal(-1), (HourStamp{1969, 12, 31, 23}));
  EXPECT_EQ(t.iso(), "2014-03-05T07:00:00");
}

TEST(HourStamp, Parsing) {
  EXPECT_EQ(parse_hour_stamp("2015-12-31 23"), (HourStamp{2015, 12, 31, 23}));
  EXPECT_EQ(parse_hour_stamp("2015-12-31T23:00"), (HourStamp{2015, 12, 31, 23}));
  EXPECT_EQ(parse_hour_stamp("2015-12-31T23:00:00Z"), (HourStamp{2015, 12, 31, 23}));
  EXPECT_FALSE(parse_hour_stamp("2015-12-31T23:30:00"));
  EXPECT_FALSE(parse_hour_stamp("2015-02-30T01:00:00"));
  EXPECT_FALSE(parse_hour_stamp("2015-12-31T24:00:00"));
  EXPECT_FALSE(parse_hour_stamp("yesterday"));
}

TEST(Ingest, TwentyFourRowDay) {
  const LoadTable t = parse(day_csv());
  ASSERT_EQ(t.size(), 24u);
  EXPECT_TRUE(t.gaps().empty());
  EXPECT_EQ(t.records[5].load, 1050.0);
  EXPECT_EQ(t.records[5].temperature, 45.5);
  EXPECT_EQ(t.records[23].timestamp.hour, 23u);
}

TEST(Ingest, ColumnsFoundByNameWithBom) {
  const LoadTable t = parse("\xEF\xBB\xBFtemperature,zone,load,timestamp\n50,A,900,2014-01-01T00:00:00\n");
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(t.records[0].load, 900.0);
  EXPECT_EQ(t.records[0].temperature, 50.0);
}

TEST(Ingest, GapsAreReportedNotFilled) {
  const LoadTable t = parse(
      "timestamp,load,temperature\n2014-01-01T00:00:00,1,1\n2014-01-01T01:00:00,1,1\n2014-01-01T05:00:00,1,1\n");
  ASSERT_EQ(t.gaps().size(), 1u);
  EXPECT_EQ(t.gaps()[0].after, 1u);
  EXPECT_EQ(t.gaps()[0].missing, 3);
  EXPECT_EQ(t.size(), 3u);
}

TEST(Ingest, ShuffledRowsRejected) {
  std::istringstream in(day_csv());
  std::string header, line;
  std::getline(in, header);
  std::vector<std::string> rows;
  while (std::getline(in, line)) rows.push_back(line);
  std::mt19937_64 g(3);
  std::shuffle(rows.begin(), rows.end(), g);
  std::string text = header + "\n";
  for (const auto& r : rows) text += r + "\n";
  EXPECT_ERROR_CODE(parse(text), ErrorCode::NonMonotoneTimestamps);
  EXPECT_ERROR_CODE(parse("timestamp,load,temperature\n2014-01-01T00,1,1\n2014-01-01T00,1,1\n"),
                    ErrorCode::NonMonotoneTimestamps);
}

TEST(Ingest, MalformedInputs) {
  EXPECT_ERROR_CODE(parse("timestamp,load\n2014-01-01T00:00:00,5\n"), ErrorCode::MissingColumn);
  EXPECT_ERROR_CODE(parse(""), ErrorCode::MissingColumn);
  try {
    parse("timestamp,load,temperature\n2014-01-01T00:00:00,5,1\n2014-01-01T01:00:00,abc,1\n");
    FAIL() << "no throw";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
  EXPECT_ERROR_CODE(parse("timestamp,load,temperature\n2014-01-01T00:00:00,-5,1\n"), ErrorCode::ParseError);
  EXPECT_ERROR_CODE(parse("timestamp,load,temperature\n2014-01-01T00:00:00,5\n"), ErrorCode::ParseError);
  EXPECT_ERROR_CODE(ingest_csv("/nonexistent/load.csv"), ErrorCode::IoError);
}

TEST(Ingest, WriteThenReadIsLossless) {
  const LoadTable t = one_year(4).slice(0, 500);
  std::ostringstream os;
  write_csv(os, t);
  const LoadTable back = parse(os.str());
  ASSERT_EQ(back.size(), t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    EXPECT_EQ(back.records[i].timestamp, t.records[i].timestamp);
    EXPECT_EQ(back.records[i].load, t.records[i].load);
    EXPECT_EQ(back.records[i].temperature, t.records[i].temperature);
  }
}

TEST(Features, FullRankTwoHundredEightyFiveColumns) {
  const FeatureSet f = build_features(one_year());
  EXPECT_EQ(f.X.cols(), 285u);
  EXPECT_EQ(f.schema.size(), 285u);
  EXPECT_EQ(f.X.rows(), 8760u);
  EXPECT_EQ(f.schema.columns.front(), "intercept");
  EXPECT_NO_THROW(cholesky_upper(gram(f.X)));
  for (std::size_t i = 0; i < f.X.rows(); ++i) EXPECT_EQ(f.X(i, 0), 1.0);
  EXPECT_EQ(f.X(0, 1), 0.0);
  EXPECT_EQ(f.X(8759, 1), 1.0);
}

TEST(Features, ColumnNamesAreUnique) {
  auto names = detail::tao_column_names();
  std::sort(names.begin(), names.end());
  EXPECT_EQ(std::adjacent_find(names.begin(), names.end()), names.end());
}

TEST(Features, ReferenceLevelsAreZeroRows) {
  // 2013-01-07 is a Monday, so midnight that day sits at every reference level.
  const LoadTable year = one_year();
  const FeatureSet f = build_features(year);
  std::size_t i = 0;
  while (!(year.records[i].timestamp == HourStamp{2013, 1, 7, 0})) ++i;
  std::size_t nonzero = 0;
  for (std::size_t j = 2; j < 2 + 23 + 6 + 11 + 138; ++j) nonzero += f.X(i, j) != 0.0 ? 1 : 0;
  EXPECT_EQ(nonzero, 0u);
}

TEST(Features, TestSplitUsesTrainingBounds) {
  SyntheticLoadSpec spec;
  spec.years = 2;
  const LoadTable all = synthetic_load_table(spec);
  const FeatureSet train = build_features(all.years(2013, 2013));
  const FeatureSet test = build_features(all.years(2014, 2014), train.schema);
  EXPECT_EQ(test.schema.trend_min, train.schema.trend_min);
  EXPECT_EQ(test.schema.temp_max, train.schema.temp_max);
  EXPECT_GT(test.X(0, 1), 1.0);  // trend extrapolates past the training window
}

TEST(Features, CoverageFailures) {
  LoadTable constant_temp = one_year();
  for (auto& r : constant_temp.records) r.temperature = 50.0;
  EXPECT_ERROR_CODE(build_features(constant_temp), ErrorCode::InsufficientCoverage);
  EXPECT_ERROR_CODE(build_features(one_year().slice(0, 24 * 40)), ErrorCode::InsufficientCoverage);
  EXPECT_ERROR_CODE(build_features(one_year().slice(0, 1)), ErrorCode::InsufficientCoverage);
}

TEST(Attack, CountsAndBounds) {
  const LoadTable base = one_year().slice(0, 1000);
  AttackSpec none{AttackKind::PosUniform, 0.0, 20, 50, 1, Split::Train};
  const AttackResult r0 = apply_attack(base, none);
  EXPECT_TRUE(r0.mask.empty());
  EXPECT_EQ(r0.attacked.loads(), base.loads());

  AttackSpec half{AttackKind::PosUniform, 50.0, 20, 50, 2, Split::Train};
  const AttackResult r = apply_attack(base, half);
  EXPECT_EQ(r.mask.size(), 500u);
  EXPECT_TRUE(std::is_sorted(r.mask.begin(), r.mask.end()));
  for (double f : r.factors) {
    EXPECT_GE(f, 1.2);
    EXPECT_LE(f, 1.5);
  }

  AttackSpec fixed{AttackKind::PosUniform, 10.0, 50, 50, 3, Split::Train};
  for (double f : apply_attack(base, fixed).factors) EXPECT_DOUBLE_EQ(f, 1.5);

  AttackSpec neg{AttackKind::NegUniform, 10.0, 20, 50, 4, Split::Train};
  for (double f : apply_attack(base, neg).factors) {
    EXPECT_GE(f, 0.5);
    EXPECT_LE(f, 0.8);
  }
  AttackSpec wipe{AttackKind::NegUniform, 10.0, 120, 150, 4, Split::Train};
  for (double f : apply_attack(base, wipe).factors) EXPECT_EQ(f, kMinAttackFactor);
}

TEST(Attack, OnlyMaskedRowsChangeAndFactorsRecover) {
  const LoadTable base = one_year().slice(0, 2000);
  const AttackResult r = apply_attack(base, AttackSpec::gaussian(20.0, 30.0, 10.0, 9));
  EXPECT_EQ(r.mask.size(), 400u);
  std::size_t k = 0;
  for (std::size_t i = 0; i < base.size(); ++i) {
    const auto& before = base.records[i];
    const auto& after = r.attacked.records[i];
    EXPECT_EQ(after.timestamp, before.timestamp);
    EXPECT_EQ(after.temperature, before.temperature);
    if (k < r.mask.size() && r.mask[k] == i) {
      EXPECT_NEAR(after.load / before.load, r.factors[k], 1e-12);
      ++k;
    } else {
      EXPECT_EQ(after.load, before.load);
    }
  }
}

TEST(Attack, DeterministicPerSeed) {
  const LoadTable base = one_year().slice(0, 500);
  const AttackSpec s{AttackKind::PosUniform, 30.0, 20, 50, 11, Split::Train};
  EXPECT_EQ(apply_attack(base, s).factors, apply_attack(base, s).factors);
  EXPECT_EQ(apply_attack(base, s).mask, apply_attack(base, s).mask);
}

TEST(Attack, InvalidSpecs) {
  const LoadTable base = one_year().slice(0, 10);
  AttackSpec s{AttackKind::PosUniform, 10.0, 20, 50, 0, Split::Test};
  EXPECT_ERROR_CODE(apply_attack(base, s), ErrorCode::InvalidSpec);
  s.target = Split::Train;
  s.fraction_k = 120;
  EXPECT_ERROR_CODE(apply_attack(base, s), ErrorCode::InvalidSpec);
  s.fraction_k = 10;
  s.a = 60;
  EXPECT_ERROR_CODE(apply_attack(base, s), ErrorCode::InvalidSpec);
  EXPECT_ERROR_CODE(parse_attack_kind("sideways"), ErrorCode::InvalidSpec);
}

TEST(Attack, JsonRoundTrip) {
  const AttackSpec s = AttackSpec::gaussian(12.5, 25.0, 5.0, 77);
  const nlohmann::json j = s;
  const AttackSpec back = j.get<AttackSpec>();
  EXPECT_EQ(back.kind, s.kind);
  EXPECT_EQ(back.fraction_k, s.fraction_k);
  EXPECT_EQ(back.a, s.a);
  EXPECT_EQ(back.b, s.b);
  EXPECT_EQ(back.seed, s.seed);
}

TEST(Mape, Examples) {
  EXPECT_EQ(mape(Vector{100, 200}, Vector{100, 200}), 0.0);
  EXPECT_DOUBLE_EQ(mape(Vector{100, 200}, Vector{110, 180}), 10.0);
  EXPECT_DOUBLE_EQ(mape(Vector{-50}, Vector{-25}), 50.0);
  EXPECT_ERROR_CODE(mape(Vector{0, 1}, Vector{1, 1}), ErrorCode::ZeroActual);
  EXPECT_ERROR_CODE(mape(Vector{1}, Vector{1, 1}), ErrorCode::ShapeMismatch);
}

TEST(Forecast, CleanMethodsAgreeAndAttackHurtsMlr) {
  SyntheticLoadSpec spec;
  spec.years = 2;
  spec.seed = 1;
  const LoadTable all = synthetic_load_table(spec);
  const LoadTable train = all.years(2013, 2013);
  const LoadTable test = all.years(2014, 2014);
  const ForecastReport mlr = run_forecast_experiment(train, test, std::nullopt, ForecastMethod::MLR);
  const ForecastReport ts = run_forecast_experiment(train, test, std::nullopt, ForecastMethod::TSSARM);
  EXPECT_EQ(mlr.features, 285u);
  EXPECT_LT(mlr.mape, 3.0);
  EXPECT_NEAR(ts.mape, mlr.mape, 0.1 * mlr.mape);
  EXPECT_GT(ts.sigma, 0.0);
  EXPECT_DOUBLE_EQ(ts.delta, 6.0 * ts.sigma * ts.sigma);

  const AttackSpec atk{AttackKind::PosUniform, 30.0, 20, 50, 5, Split::Train};
  const ForecastReport mlr_atk = run_forecast_experiment(train, test, atk, ForecastMethod::MLR);
  const ForecastReport ts_atk = run_forecast_experiment(train, test, atk, ForecastMethod::TSSARM);
  EXPECT_EQ(mlr_atk.attacked_rows, static_cast<std::size_t>(std::llround(0.3 * 8760)));
  EXPECT_GT(mlr_atk.mape, 2.0 * mlr.mape);
  EXPECT_LT(ts_atk.mape, mlr_atk.mape);
  const nlohmann::json j = ts_atk;
  EXPECT_EQ(j.at("method"), "TSSARM");
  EXPECT_EQ(j.at("attack").at("kind"), to_string(AttackKind::PosUniform));
}

TEST(Forecast, MethodNames) {
  EXPECT_EQ(parse_forecast_method("OLS"), ForecastMethod::MLR);
  EXPECT_EQ(parse_forecast_method("TSSARM"), ForecastMethod::TSSARM);
  EXPECT_ERROR_CODE(parse_forecast_method("ridge"), ErrorCode::InvalidSpec);
}
