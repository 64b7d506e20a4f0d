#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "radarpose/nn/layers.hpp"
#include "radarpose/nn/tnet.hpp"
#include "radarpose/pointcloud.hpp"
#include "radarpose/skeleton.hpp"

namespace radarpose {

enum class Variant {
  kDualCnn,         // two views -> TNet -> conv stack, concatenated -> MLP head
  kDualMlp,         // conv stack replaced by a shared row MLP + max pool
  kSinglePointNet,  // one xyz cloud -> TNet -> PointNet encoder -> MLP head
};

std::string_view variant_name(Variant v);
Variant variant_from_name(std::string_view name);

struct ConvSpec {
  std::size_t channels = 16;
  std::size_t kernel = 3;
  std::size_t pool = 2;  // 1 disables pooling
};

struct ModelConfig {
  Variant variant = Variant::kDualCnn;
  std::size_t n_max = 64;
  std::vector<Joint> excluded_joints = default_excluded_joints();

  std::vector<ConvSpec> conv_spec{{16, 3, 2}, {32, 3, 2}};
  std::vector<std::size_t> mlp_head_spec{512, 128};
  std::vector<std::size_t> row_mlp_spec{64, 128};

  std::size_t tnet_dim = 4;
  std::vector<std::size_t> tnet_shared{64, 128};
  std::vector<std::size_t> tnet_fc{128};

  std::vector<std::size_t> pointnet_shared{64, 64, 128, 1024};
  std::vector<std::size_t> pointnet_head{512, 256};

  std::uint64_t seed = 0;

  std::vector<Joint> output_joints() const { return included_joints(excluded_joints); }
  std::size_t n_joints_out() const { return output_joints().size(); }
  std::size_t output_width() const { return 3 * n_joints_out(); }
  /// Features per input row: tnet_dim for the dual views, 3 for the xyz cloud.
  std::size_t input_dim() const { return variant == Variant::kSinglePointNet ? 3 : tnet_dim; }
  void validate() const;
};

/// N_max x 3 xyz matrix for the single-view variant.
struct PointCloudInput {
  ViewMatrix xyz;
};

using ModelInput = std::variant<ViewPair, PointCloudInput>;

/// The input expected by `variant` built from canonical views.
ModelInput make_input(Variant variant, const ViewPair& views);

/// Per-axis ground-truth affine plus the SNR affine used on the inputs.
struct NormConstants {
  Vec3 gt_min = Vec3::Zero();
  Vec3 gt_max = Vec3::Ones();
  SnrScaler snr;

  /// Fits gt_min/gt_max over `joints` of every frame.
  static NormConstants fit(std::span<const SkeletonFrame> frames, const std::vector<Joint>& joints,
                           const SnrScaler& snr);
  double normalize(double v, std::size_t axis) const;
  double denormalize(double v, std::size_t axis) const;
  void validate() const;
};

/// Normalized regression target for one frame: x, y, z per output joint.
std::vector<double> normalized_target(const SkeletonFrame& gt, const std::vector<Joint>& joints,
                                      const NormConstants& norm);

/// Layer graph for one ModelConfig. Holds no learnable state besides the
/// initial parameters drawn at construction from cfg.seed.
class PoseNetwork {
 public:
  explicit PoseNetwork(const ModelConfig& cfg);
  PoseNetwork(const PoseNetwork&) = delete;
  PoseNetwork& operator=(const PoseNetwork&) = delete;

  const ModelConfig& config() const { return cfg_; }
  const nn::ParamStore& initial_params() const { return init_; }

  struct Batch {
    std::array<nn::Mat, 2> views;  // dual variants: xy and yz; single: views[0] = xyz
    std::size_t size = 0;
  };
  /// Throws std::invalid_argument when an input does not match the variant
  /// or N_max.
  Batch make_batch(std::span<const ModelInput> inputs) const;
  Batch make_batch(std::span<const ModelInput* const> inputs) const;

  /// batch x output_width. When `tape` is given it receives the caches
  /// needed by backward.
  nn::Mat forward(const nn::ParamStore& p, const Batch& batch, std::any* tape = nullptr) const;
  /// Accumulates parameter gradients for upstream gradient d_out.
  void backward(const nn::ParamStore& p, const std::any& tape, const nn::Mat& d_out, nn::ParamStore& grad) const;

  /// Transformed view and its transform for one view of one sample.
  struct TNetResult {
    nn::Mat transformed;
    nn::Mat transform;
  };
  TNetResult tnet_forward(const nn::ParamStore& p, const nn::Mat& view, std::size_t branch = 0) const;

  /// Index range of the parameters owned by each branch / the head.
  struct ParamRange {
    std::size_t begin = 0;
    std::size_t end = 0;
  };
  ParamRange branch_params(std::size_t branch) const { return branch_ranges_.at(branch); }
  std::size_t branch_count() const { return branch_count_; }

 private:
  ModelConfig cfg_;
  nn::ParamStore init_;
  std::size_t branch_count_ = 0;
  std::array<std::unique_ptr<nn::TNet>, 2> tnets_;
  std::array<nn::Sequential, 2> encoders_;
  std::array<std::size_t, 2> encoder_width_{};
  std::array<ParamRange, 2> branch_ranges_{};
  nn::Sequential head_;
};

/// Everything needed to run inference: architecture, weights, normalization.
struct ModelParams {
  ModelConfig config;
  nn::ParamStore weights;
  NormConstants norm;
};

/// Fresh parameters for `cfg` (identity TNets, zero biases).
ModelParams init_params(const ModelConfig& cfg, const NormConstants& norm = {});

/// Normalized prediction, 3 * n_joints_out values.
std::vector<double> forward(const ModelParams& params, const ModelInput& input);

/// Mean of squared differences. Throws std::invalid_argument on length mismatch.
double mse_loss(std::span<const double> pred, std::span<const double> target);

struct LossAndGrad {
  double loss = 0.0;
  nn::ParamStore grad;
};

/// MSE of the batch (mean over samples and outputs) and its exact gradient.
/// `targets` is batch x output_width.
LossAndGrad backward(const PoseNetwork& net, const nn::ParamStore& p, const PoseNetwork::Batch& batch,
                     const nn::Mat& targets);
LossAndGrad backward(const ModelParams& params, const ModelInput& input, std::span<const double> target);

/// Estimated pose in world metres. Joints outside the output set are absent.
struct PoseEstimate {
  std::array<std::optional<Vec3>, kJointCount> joints{};
};

/// Builds views from an already SNR-normalized fused frame, runs the
/// network and undoes the ground-truth normalization.
PoseEstimate predict(const ModelParams& params, const FusedFrame& frame);
PoseEstimate predict(const PoseNetwork& net, const ModelParams& params, const FusedFrame& frame);

}  // namespace radarpose
