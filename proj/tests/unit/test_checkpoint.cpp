#include <gtest/gtest.h>

#include <sstream>

#include "asyncts/checkpoint.hpp"
#include "asyncts/error.hpp"
#include "fixtures.hpp"

namespace asyncts {
namespace {

TEST(Checkpoint, RoundTripIsBitExact) {
  NetworkConfig cfg;
  cfg.hidden_dim = 6;
  cfg.fc_dims = {5, 1};
  auto p = init_params(cfg, 77);
  p.values()[3] = 1.0 / 3.0;
  p.values()[4] = -0.0;
  p.set_version(12);
  std::stringstream ss;
  write_checkpoint(ss, p, cfg);
  const auto ck = read_checkpoint(ss);
  EXPECT_TRUE(ck.network.same_shape(cfg));
  EXPECT_EQ(ck.params.version(), 12u);
  ASSERT_EQ(ck.params.size(), p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    ASSERT_EQ(std::bit_cast<std::uint64_t>(ck.params.values()[i]), std::bit_cast<std::uint64_t>(p.values()[i]));
  }
}

TEST(Checkpoint, FileRoundTrip) {
  const auto dir = testing::temp_dir("ckpt");
  const auto cfg = testing::tiny_network();
  const auto p = init_params(cfg, 1);
  save_checkpoint(dir / "m.ckpt", p, cfg);
  const auto ck = load_checkpoint(dir / "m.ckpt");
  EXPECT_TRUE(std::equal(p.values().begin(), p.values().end(), ck.params.values().begin()));
  std::filesystem::remove_all(dir);
}

TEST(Checkpoint, RejectsCorruptInput) {
  const auto cfg = testing::tiny_network();
  std::stringstream ss;
  write_checkpoint(ss, init_params(cfg, 1), cfg);
  std::string text = ss.str();

  std::istringstream bad_magic("not-a-checkpoint 1\n");
  EXPECT_THROW(read_checkpoint(bad_magic), DataError);

  std::istringstream truncated(text.substr(0, text.size() / 2));
  EXPECT_THROW(read_checkpoint(truncated), DataError);

  const auto pos = text.find("hidden_dim 4");
  ASSERT_NE(pos, std::string::npos);
  text.replace(pos, 12, "hidden_dim 5");
  std::istringstream wrong_shape(text);
  EXPECT_THROW(read_checkpoint(wrong_shape), DataError);
}

}  // namespace
}  // namespace asyncts
