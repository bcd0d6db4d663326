#include "ama/config.hpp"
#include "ama/errors.hpp"

#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <set>

using namespace ama;

TEST(Presets, MovielensAma) {
  const auto c = preset("ml1m-ama");
  const auto& m = c.train.model;
  EXPECT_EQ(c.algorithm, Algorithm::Ama);
  EXPECT_EQ(c.format, RatingFormat::MovielensDat);
  EXPECT_EQ(m.h, 40);
  EXPECT_EQ(m.alpha, 1.0);
  EXPECT_EQ(m.lambda, 1e-5);
  EXPECT_EQ(m.epochs, 300);
  EXPECT_EQ(c.svd_iters, 10);
  EXPECT_EQ(m.rho, 0.3);
  EXPECT_EQ(m.d, 3);
  EXPECT_EQ(m.kappa, 3);
}

TEST(Presets, AmazonMusicAma) {
  const auto c = preset("amazon-music-ama");
  const auto& m = c.train.model;
  EXPECT_EQ(c.format, RatingFormat::AmazonCsv);
  EXPECT_EQ(m.h, 200);
  EXPECT_EQ(m.alpha, 10.0);
  EXPECT_EQ(m.lambda, 1e-4);
  EXPECT_EQ(m.epochs, 300);
  EXPECT_EQ(c.svd_iters, 10);
  EXPECT_EQ(m.rho, 0.4);
  EXPECT_EQ(m.d, 5);
}

TEST(Presets, AmazonGamesAndBaselines) {
  EXPECT_EQ(preset("amazon-games-ama").train.model.d, 1);
  EXPECT_EQ(preset("amazon-games-ama").train.model.lambda, 1e-3);
  EXPECT_EQ(preset("ml1m-puresvd").train.model.h, 50);
  EXPECT_EQ(preset("ml1m-puresvd").algorithm, Algorithm::PureSvd);
  EXPECT_EQ(preset("amazon-music-puresvd").train.model.h, 200);
  EXPECT_EQ(preset("amazon-games-puresvd").train.model.h, 100);
  EXPECT_EQ(preset("ml1m-pop").algorithm, Algorithm::Pop);
  EXPECT_THROW(preset("ml20m-ama"), ConfigError);
}

TEST(Presets, AllValidate) {
  for (const auto& name : preset_names()) EXPECT_NO_THROW(preset(name).validate()) << name;
}

TEST(Presets, ShippedFilesMatchBuiltIns) {
  const std::filesystem::path dir = AMA_PRESET_DIR;
  std::set<std::string> shipped;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() != ".conf") continue;
    const auto name = entry.path().stem().string();
    shipped.insert(name);
    RunConfig from_file;
    from_file.load_file(entry.path().string());
    EXPECT_EQ(from_file.dump(), preset(name).dump()) << name;
  }
  const auto names = preset_names();
  EXPECT_EQ(shipped, std::set<std::string>(names.begin(), names.end()));
}

TEST(RunConfigText, ParsesCommentsAndOverrides) {
  RunConfig c;
  c.load_text("# comment\nh = 12   # trailing\n\nd=2\nks = 1, 3\nthreshold = 3.5\n");
  EXPECT_EQ(c.train.model.h, 12);
  EXPECT_EQ(c.train.model.d, 2);
  EXPECT_EQ(c.eval.ks, (std::vector<int>{1, 3}));
  EXPECT_EQ(c.threshold, 3.5);
}

TEST(RunConfigText, Errors) {
  RunConfig c;
  EXPECT_THROW(c.load_text("nonsense = 1\n"), ConfigError);
  EXPECT_THROW(c.load_text("h 12\n"), ConfigError);
  EXPECT_THROW(c.load_text("h = twelve\n"), ConfigError);
  EXPECT_THROW(c.load_text("optimizer = rmsprop\n"), ConfigError);
}

TEST(RunConfigText, ZeroModesFailsValidation) {
  RunConfig c;
  c.set("d", "0");
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(RunConfigText, DumpRoundTrips) {
  auto c = preset("amazon-music-ama");
  c.set("seed", "17");
  c.set("ks", "3,7");
  RunConfig back;
  back.load_text(c.dump());
  EXPECT_EQ(back.dump(), c.dump());
}

TEST(ConfigKeys, EveryKeyIsSettable) {
  for (const auto& k : config_keys()) {
    RunConfig c;
    const std::string dumped = c.dump();
    const auto pos = dumped.find(std::string(k.key) + " = ");
    ASSERT_NE(pos, std::string::npos) << k.key;
    const auto end = dumped.find('\n', pos);
    const auto value = dumped.substr(pos + std::strlen(k.key) + 3, end - pos - std::strlen(k.key) - 3);
    EXPECT_NO_THROW(c.set(k.key, value)) << k.key;
  }
}
