#include <filesystem>
#include <random>

#include <gtest/gtest.h>

#include "radarpose/checkpoint.hpp"

using namespace radarpose;

namespace {

ModelParams sample_params(Variant v) {
  ModelConfig cfg;
  cfg.variant = v;
  cfg.n_max = 12;
  cfg.conv_spec = {{3, 3, 2}};
  cfg.mlp_head_spec = {20};
  cfg.row_mlp_spec = {10};
  cfg.tnet_shared = {6};
  cfg.tnet_fc = {6};
  cfg.pointnet_shared = {8, 16};
  cfg.pointnet_head = {12};
  cfg.excluded_joints = {Joint::kHandLeft, Joint::kEyeRight};
  cfg.seed = 31;
  NormConstants norm;
  norm.gt_min = Vec3(-0.9, 0.75, 0.0125);
  norm.gt_max = Vec3(1.1, 4.5, 1.9);
  norm.snr = {2.5, 38.0};
  auto p = init_params(cfg, norm);
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g;
  for (std::size_t i = 0; i < p.weights.size(); ++i)
    for (Eigen::Index k = 0; k < p.weights[i].size(); ++k) p.weights[i].data()[k] += g(rng);
  return p;
}

void expect_equal(const ModelParams& a, const ModelParams& b) {
  EXPECT_EQ(model_config_to_json(a.config), model_config_to_json(b.config));
  ASSERT_EQ(a.weights.size(), b.weights.size());
  for (std::size_t i = 0; i < a.weights.size(); ++i) {
    EXPECT_EQ(a.weights.name(i), b.weights.name(i));
    EXPECT_EQ(a.weights[i], b.weights[i]);
  }
  EXPECT_EQ(a.norm.gt_min, b.norm.gt_min);
  EXPECT_EQ(a.norm.gt_max, b.norm.gt_max);
  EXPECT_EQ(a.norm.snr.snr_min, b.norm.snr.snr_min);
  EXPECT_EQ(a.norm.snr.snr_max, b.norm.snr.snr_max);
}

}  // namespace

TEST(Checkpoint, BytesRoundTripForEveryVariant) {
  for (auto v : {Variant::kDualCnn, Variant::kDualMlp, Variant::kSinglePointNet}) {
    const auto p = sample_params(v);
    const auto bytes = encode_checkpoint(p);
    EXPECT_EQ(bytes.substr(0, 8), kCheckpointMagic);
    const auto q = decode_checkpoint(bytes);
    expect_equal(p, q);
    EXPECT_EQ(encode_checkpoint(q), bytes);
  }
}

TEST(Checkpoint, FileRoundTrip) {
  const auto p = sample_params(Variant::kDualCnn);
  const auto path = std::filesystem::temp_directory_path() / "radarpose_test.ckpt";
  save_checkpoint(path, p);
  expect_equal(p, load_checkpoint(path));
  std::filesystem::remove(path);
  EXPECT_THROW(load_checkpoint(path), std::runtime_error);
}

TEST(Checkpoint, RejectsCorruption) {
  const auto bytes = encode_checkpoint(sample_params(Variant::kDualMlp));
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_THROW(decode_checkpoint(bad_magic), std::runtime_error);
  auto bad_version = bytes;
  bad_version[8] = 7;
  EXPECT_THROW(decode_checkpoint(bad_version), std::runtime_error);
  EXPECT_THROW(decode_checkpoint(std::string_view(bytes).substr(0, bytes.size() - 3)), std::runtime_error);
  EXPECT_THROW(decode_checkpoint(bytes + "extra"), std::runtime_error);
}

TEST(Checkpoint, RejectsTensorsThatDoNotFitConfig) {
  auto p = sample_params(Variant::kDualMlp);
  p.weights[0] = nn::Mat::Zero(p.weights[0].rows() + 1, p.weights[0].cols());
  EXPECT_THROW(decode_checkpoint(encode_checkpoint(p)), std::runtime_error);
}

TEST(ModelConfigJson, RoundTrip) {
  const auto cfg = sample_params(Variant::kSinglePointNet).config;
  const auto text = model_config_to_json(cfg);
  EXPECT_EQ(model_config_to_json(model_config_from_json(text)), text);
  EXPECT_ANY_THROW(model_config_from_json(R"({"variant":"nope"})"));
}
