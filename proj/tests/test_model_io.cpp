#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "spot/generators.hpp"
#include "spot/harness/model_io.hpp"

using namespace spot;

TEST(ModelIo, RoundTripIsBitExact) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    RngStream rng(seed, 1);
    auto model = make_random_cmdp(4, 3, 3, 2, 0.2, rng);
    if (seed % 2) model.noise = {NoiseKind::clipped_gaussian, 0.125};
    const auto back = io::parse_model(io::dump_model(model));
    EXPECT_EQ(back, model);
    EXPECT_EQ(io::dump_model(back), io::dump_model(model));
  }
}

TEST(ModelIo, ChainRoundTrip) {
  const auto model = make_chain_cmdp(5, 6, 1);
  EXPECT_EQ(io::parse_model(io::dump_model(model)), model);
}

TEST(ModelIo, WrongShapeIsStructuralError) {
  auto j = io::model_to_json(make_chain_cmdp(3, 4, 1));
  auto bad = j;
  bad["reward"].erase(bad["reward"].begin());
  EXPECT_THROW(io::model_from_json(bad), StructuralError);
  bad = j;
  bad["cost"] = nlohmann::json::array();
  EXPECT_THROW(io::model_from_json(bad), StructuralError);
  bad = j;
  bad["transition"][0][0][0].push_back(0.0);
  EXPECT_THROW(io::model_from_json(bad), StructuralError);
  bad = j;
  bad.erase("horizon");
  EXPECT_THROW(io::model_from_json(bad), StructuralError);
}

TEST(ModelIo, MissingFileIsConfigError) {
  EXPECT_THROW(io::load_model("/nonexistent/model.json"), ConfigError);
}
