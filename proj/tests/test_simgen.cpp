#include "robustfit/simgen.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "test_support.hpp"

using namespace robustfit;

namespace {

SimSpec spec_of(SimType type, std::size_t n, double p, std::uint64_t seed) {
  SimSpec s;
  s.type = type;
  s.m = default_rows(type);
  s.n = n;
  s.p = p;
  s.seed = seed;
  if (type == SimType::T5) s.kappa = 16.0;
  return s;
}

}  // namespace

TEST(Generate, CleanInstanceHasNoCorruption) {
  const SimInstance inst = generate(spec_of(SimType::T1, 16, 0.0, 1));
  EXPECT_EQ(max_abs(inst.z_true.span()), 0.0);
  EXPECT_TRUE(inst.support().empty());
  EXPECT_EQ(inst.X.rows(), 512u);
  EXPECT_EQ(inst.X.cols(), 16u);
}

TEST(Generate, TypeTwoValuesArePlusMinusTwentyFive) {
  const SimInstance inst = generate(spec_of(SimType::T2, 50, 0.3, 2));
  EXPECT_EQ(inst.X.rows(), 600u);
  EXPECT_EQ(inst.sigma, 1.0);
  std::size_t pos = 0;
  for (std::size_t i : inst.support()) {
    EXPECT_EQ(std::abs(inst.z_true[i]), 25.0);
    pos += inst.z_true[i] > 0 ? 1 : 0;
  }
  EXPECT_GT(pos, 50u);
  EXPECT_LT(pos, 130u);
  for (double x : inst.X.span()) {
    EXPECT_GE(x, 0.0);
    EXPECT_LT(x, 1.0);
  }
}

TEST(Generate, TypeFourValuesAreTwentyFive) {
  const SimInstance inst = generate(spec_of(SimType::T4, 50, 0.2, 3));
  for (std::size_t i : inst.support()) EXPECT_EQ(inst.z_true[i], 25.0);
}

TEST(Generate, TypeThreeIsOneSided) {
  const SimInstance inst = generate(spec_of(SimType::T3, 16, 0.4, 3));
  double sum = 0.0;
  for (std::size_t i : inst.support()) sum += inst.z_true[i];
  EXPECT_NEAR(sum / static_cast<double>(inst.support().size()), 12.0 * inst.sigma, 1.0 * inst.sigma);
}

TEST(Generate, SupportSizeIsRoundedFraction) {
  for (double p : {0.0, 0.1, 0.25, 0.3, 0.45}) {
    const SimInstance inst = generate(spec_of(SimType::T1, 8, p, 4));
    EXPECT_EQ(inst.support().size(), static_cast<std::size_t>(std::llround(p * 512))) << p;
  }
}

TEST(Generate, ResponseIsSumOfParts) {
  for (SimType t : {SimType::T1, SimType::T2, SimType::T3, SimType::T4, SimType::T5, SimType::T6}) {
    const SimInstance inst = generate(spec_of(t, 12, 0.3, 5));
    const Vector rebuilt = matvec(inst.X, inst.w_true) + inst.e + inst.z_true;
    EXPECT_LE(testutil::max_abs_diff(rebuilt, inst.y), 1e-12 * (1.0 + max_abs(inst.y.span()))) << to_string(t);
  }
}

TEST(Generate, NoiseScaleFollowsMedianResponse) {
  const SimInstance inst = generate(spec_of(SimType::T1, 16, 0.0, 6));
  std::vector<double> mags;
  const Vector clean = matvec(inst.X, inst.w_true);
  for (double v : clean) mags.push_back(std::abs(v));
  EXPECT_DOUBLE_EQ(inst.sigma, median(mags) / 16.0);
}

TEST(Generate, DeterministicPerSeed) {
  const SimSpec s = spec_of(SimType::T5, 16, 0.3, 7);
  const SimInstance a = generate(s);
  const SimInstance b = generate(s);
  EXPECT_EQ(a.X, b.X);
  EXPECT_EQ(a.y, b.y);
  EXPECT_EQ(a.z_true, b.z_true);
  const SimInstance c = generate(spec_of(SimType::T5, 16, 0.3, 8));
  EXPECT_NE(a.y, c.y);
}

TEST(Generate, TypeSixIsIllConditioned) {
  std::size_t above = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const SimInstance inst = generate(spec_of(SimType::T6, 64, 0.0, seed));
    const auto e = sym_eig(gram(inst.X));
    if (std::sqrt(e.values[0] / e.values[63]) > 200.0) ++above;
  }
  EXPECT_GE(above, 45u);
}

TEST(Generate, TypeSixMixingDiagonal) {
  const Matrix B = type6_mixing(4);
  EXPECT_NEAR(B(0, 0), std::exp(-0.1), 1e-15);
  EXPECT_NEAR(B(3, 3), 1.1 / 4, 1e-15);
  for (std::size_t j = 0; j < 4; ++j) {
    double col = 0.0;
    for (std::size_t i = 0; i < 4; ++i) col += B(i, j);
    EXPECT_NEAR(col, 1.0, 1e-15);
  }
}

TEST(Generate, InvalidSpecs) {
  SimSpec s = spec_of(SimType::T1, 16, 0.3, 0);
  s.p = 1.5;
  EXPECT_ERROR_CODE(generate(s), ErrorCode::InvalidSpec);
  s = spec_of(SimType::T5, 16, 0.3, 0);
  s.kappa.reset();
  EXPECT_ERROR_CODE(generate(s), ErrorCode::InvalidSpec);
  s = spec_of(SimType::T1, 16, 0.3, 0);
  s.kappa = 4.0;
  EXPECT_ERROR_CODE(generate(s), ErrorCode::InvalidSpec);
  s = spec_of(SimType::T1, 0, 0.3, 0);
  EXPECT_ERROR_CODE(generate(s), ErrorCode::InvalidSpec);
  EXPECT_ERROR_CODE(parse_sim_type("T7"), ErrorCode::InvalidSpec);
}

TEST(RelativeError, Examples) {
  EXPECT_EQ(relative_l2_error(Vector{1, 0}, Vector{1, 0}), 0.0);
  EXPECT_DOUBLE_EQ(relative_l2_error(Vector{0, 0}, Vector{3, 4}), 1.0);
  EXPECT_DOUBLE_EQ(relative_l2_error(Vector{3, 0}, Vector{0, 4}), 1.25);
  EXPECT_ERROR_CODE(relative_l2_error(Vector{1}, Vector{0}), ErrorCode::ZeroTruth);
  EXPECT_ERROR_CODE(relative_l2_error(Vector{1}, Vector{1, 2}), ErrorCode::ShapeMismatch);
}

TEST(SpecSerialization, JsonRoundTrip) {
  SimSpec s = spec_of(SimType::T5, 64, 0.35, 99);
  s.kappa = 0.1 + 0.2;
  const nlohmann::json j = s;
  const SimSpec back = j.get<SimSpec>();
  EXPECT_EQ(back.type, s.type);
  EXPECT_EQ(back.m, s.m);
  EXPECT_EQ(back.n, s.n);
  EXPECT_EQ(back.p, s.p);
  EXPECT_EQ(back.kappa, s.kappa);
  EXPECT_EQ(back.seed, s.seed);
}

TEST(SpecSerialization, KeyValueRoundTrip) {
  for (SimType t : {SimType::T1, SimType::T5}) {
    SimSpec s = spec_of(t, 20, 0.1 + 0.2, 12345678901234ULL);
    const SimSpec back = from_key_value(to_key_value(s));
    EXPECT_EQ(back.type, s.type);
    EXPECT_EQ(back.p, s.p);
    EXPECT_EQ(back.kappa, s.kappa);
    EXPECT_EQ(back.seed, s.seed);
    EXPECT_EQ(back.m, s.m);
  }
  const SimSpec d = from_key_value("# comment\ntype=T2\nn=50\n");
  EXPECT_EQ(d.m, 600u);
  EXPECT_ERROR_CODE(from_key_value("type=T1\n"), ErrorCode::InvalidSpec);
  EXPECT_ERROR_CODE(from_key_value("type=T1\nn=abc\n"), ErrorCode::InvalidSpec);
  EXPECT_ERROR_CODE(from_key_value("garbage\n"), ErrorCode::InvalidSpec);
}
