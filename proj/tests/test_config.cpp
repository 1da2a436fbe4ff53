#include <gtest/gtest.h>

#include "baytomo/config.hpp"

using namespace baytomo;

namespace {

std::string error_of(const std::string& text) {
  try {
    resolve_config(parse_ini(text, "run.ini"));
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST(Ini, ParsesSectionsAndComments) {
  const auto doc = parse_ini("# top\n[geometry]\nangles = 10 ; trailing\n\n[prior]\nname=tv\n");
  ASSERT_EQ(doc.entries.size(), 2u);
  EXPECT_EQ(doc.entries.at("geometry.angles").value, "10");
  EXPECT_EQ(doc.entries.at("geometry.angles").line, 3u);
  EXPECT_EQ(doc.entries.at("prior.name").value, "tv");
}

TEST(Ini, SyntaxErrorsNameTheLine) {
  EXPECT_NE(error_of("[run]\nseed = 3\nthis line is wrong\n").find("run.ini:3"), std::string::npos);
  EXPECT_NE(error_of("[run\n").find("run.ini:1"), std::string::npos);
  EXPECT_NE(error_of("[run]\nseed = 1\nseed = 2\n").find("run.ini:3"), std::string::npos);
  EXPECT_NE(error_of("key = 1\n").find("run.ini:1"), std::string::npos);
}

TEST(Config, BadValuesAndUnknownKeysNameTheLine) {
  EXPECT_NE(error_of("[geometry]\nangles = ten\n").find("run.ini:2"), std::string::npos);
  EXPECT_NE(error_of("[geometry]\n\nanglez = 10\n").find("run.ini:3"), std::string::npos);
  EXPECT_NE(error_of("[colour]\nred = 1\n").find("run.ini:2"), std::string::npos);
  EXPECT_NE(error_of("[prior]\nname = gaussian\nalpha = 2\n").find("run.ini:3"), std::string::npos);
  EXPECT_NE(error_of("[noise]\nfraction = -1\n").find("run.ini:2"), std::string::npos);
}

TEST(Config, MwgWithoutSamplesIsRejected) {
  const std::string e = error_of("[run]\nestimator = mwg\n[mwg]\nsamples = 0\n");
  EXPECT_NE(e.find("mwg.samples"), std::string::npos);
  EXPECT_TRUE(error_of("[run]\nestimator = map\n[mwg]\nsamples = 0\n").empty());
}

TEST(Config, DefaultsAreMaterialized) {
  const auto cfg = resolve_config(parse_ini(""));
  EXPECT_EQ(cfg.phantom.side, 64u);
  EXPECT_EQ(cfg.angles, 30u);
  EXPECT_DOUBLE_EQ(cfg.noise_fraction, 0.015);
  EXPECT_EQ(cfg.mwg.adapt, 50000u);
  EXPECT_EQ(cfg.mwg.samples, 40000u);
  EXPECT_EQ(cfg.nuts.adapt, 100u);
  EXPECT_EQ(cfg.nuts.samples, 400u);
  EXPECT_EQ(cfg.prior.name, "gaussian");
  EXPECT_EQ(cfg.prior.params.count("sigma_pr"), 1u);
  EXPECT_EQ(cfg.prior.params.count("sigma_boundary"), 1u);
}

TEST(Config, BoundaryParameterFollowsInterior) {
  auto cfg = resolve_config(parse_ini("[prior]\nname = tv\nalpha = 7\n"));
  EXPECT_EQ(cfg.prior.params.at("alpha_boundary"), 7.0);
  cfg = resolve_config(parse_ini("[prior]\nname = tv\nalpha = 7\nalpha_boundary = 2\n"));
  EXPECT_EQ(cfg.prior.params.at("alpha_boundary"), 2.0);
}

TEST(Config, LockRoundTripIsExact) {
  const auto cfg = resolve_config(parse_ini(
      "[run]\nseed = 9\nestimator = nuts\n[phantom]\nkind = drill_core\nside = 32\npores = 5\n"
      "[geometry]\nangles = 10\n[prior]\nname = besov\nscale = 0.3\n[gridsearch]\ncandidates = 0.1, 1, 10\n"));
  const std::string lock = to_ini(cfg);
  const auto again = resolve_config(parse_ini(lock, "run.lock"));
  EXPECT_EQ(to_ini(again), lock);
  EXPECT_EQ(again.seed, 9u);
  EXPECT_EQ(again.phantom.kind, PhantomKind::drill_core);
  EXPECT_EQ(again.prior.params.at("scale"), 0.3);
  EXPECT_EQ(again.gridsearch.candidates, (std::vector<double>{0.1, 1.0, 10.0}));
}

TEST(Config, EstimatorNames) {
  EXPECT_EQ(parse_estimator("nuts"), Estimator::nuts);
  EXPECT_EQ(to_string(Estimator::mwg), "mwg");
  EXPECT_THROW(parse_estimator("gibbs"), std::invalid_argument);
}
