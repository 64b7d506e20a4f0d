#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "radarpose/config_file.hpp"
#include "radarpose/model.hpp"
#include "radarpose/scene.hpp"
#include "radarpose/train.hpp"

namespace radarpose {

/// Joint lists the metrics average over.
struct JointSets {
  std::vector<Joint> all;    // every regressed joint
  std::vector<Joint> lower;  // hips, knees, ankles, feet
  std::vector<Joint> arms;   // shoulders, elbows; swing frames only

  static JointSets defaults(const std::vector<Joint>& included = included_joints(default_excluded_joints()));
};

/// One report row. MAE values are in cm; depth is the world y axis.
struct MetricsRow {
  std::string name;
  double mae_all_cm = 0.0;
  std::optional<double> mae_arms_swing_cm;  // absent without swing-action frames
  double mae_lower_cm = 0.0;
  double mae_depth_cm = 0.0;
  std::optional<double> arm_swing_pct;  // absent without frames in a swing state
  std::array<std::optional<double>, kJointCount> per_joint_cm{};  // mean Euclidean error
};

/// Every joint of `frame` listed in `joints`, the rest absent.
PoseEstimate to_estimate(const SkeletonFrame& frame, const std::vector<Joint>& joints);

/// Throws std::invalid_argument when the frame counts differ or a
/// prediction lacks a joint that the sets require.
/// arm_swing_pct uses arm_swing_score with `margin_cm`.
MetricsRow evaluate(std::span<const PoseEstimate> preds, std::span<const SkeletonFrame> gts, const JointSets& sets,
                    double margin_cm = 5.0);

/// Percentage of frames whose ground truth is in a swing state where the
/// predicted elbow on the swinging side sits at least margin_cm above the
/// other elbow. Absent when no ground-truth frame is in a swing state.
std::optional<double> arm_swing_score(std::span<const PoseEstimate> preds, std::span<const SkeletonFrame> gts,
                                      double margin_cm = 5.0);

/// Constant predictor: per-joint mean of the training ground truth.
PoseEstimate mean_pose(std::span<const SkeletonFrame> train, const std::vector<Joint>& joints);

struct AblationConfig {
  SimulationConfig sim;
  std::size_t n_trainval = 2000;
  std::size_t n_test = 500;
  FusionConfig fusion;
  ModelConfig model;
  /// 12 epochs keeps the full four-row run within about six minutes on one core.
  TrainHyper hyper{.epochs = 12};
  double swing_margin_cm = 5.0;

  /// Keys: actions, frames, test_frames, fps, duration, subjects, seed,
  /// eps, min_pts, window_ms, n_max, lr, lr_decay, batch, epochs, train_seed,
  /// val_fraction, margin_cm, density, noise_std.
  static AblationConfig from_keys(const KeyValueConfig& kv);
  void validate() const;
};

struct AblationRow {
  std::string name;
  Variant variant = Variant::kDualCnn;
  std::vector<int> radars;
  MetricsRow metrics;
  std::vector<EpochLoss> history;
  std::string split_digest;  // FNV-1a over train, val and test frame ids
};

struct AblationResult {
  std::vector<AblationRow> rows;
  MetricsRow baseline;  // mean-pose predictor on the same test frames
};

/// Everything needed to train and score one configuration on a fused
/// dataset: SNR-normalized splits and the scaler.
struct PreparedSplits {
  std::vector<FusedFrame> trainval;
  std::vector<FusedFrame> test;
  SnrScaler snr;
};

/// Splits fused frames by frame order (first n_trainval, then the next
/// n_test) and fits SNR normalization on the train/val part.
PreparedSplits prepare_splits(std::vector<FusedFrame> frames, std::size_t n_trainval, std::size_t n_test);

/// Predicts every test frame and scores it.
MetricsRow score_model(const ModelParams& params, std::span<const FusedFrame> test, double margin_cm,
                       const std::string& name);

/// Trains and scores the four configurations {dual_cnn, dual_mlp,
/// single_pointnet} on both radars and dual_cnn on radar A alone, with
/// identical seeds and hyperparameters. `records` are raw per-radar
/// records; when empty they are simulated from cfg.sim.
AblationResult run_ablation(const AblationConfig& cfg, std::vector<DatasetRecord> records = {},
                            const std::function<void(const std::string&)>& log = {});

/// Header plus one line per row, fixed 6-decimal formatting, NA for absent.
std::string metrics_csv(std::span<const MetricsRow> rows);
/// joint, mae_cm for every joint that has a value.
std::string per_joint_csv(const MetricsRow& row);
/// Train and validation loss per epoch as a standalone SVG document.
std::string loss_curve_svg(std::span<const EpochLoss> history, const std::string& title);

std::uint64_t fnv1a(std::span<const std::int64_t> values, std::uint64_t h = 0xcbf29ce484222325ULL);

/// Analytic versus central-difference gradients. An entry fails when it
/// differs by more than abs_floor and by more than `tolerance` relative to
/// max(|analytic|, |numeric|). An entry that disagrees at step h but
/// agrees at h / 100 straddles a ReLU or max-pool switch; it is counted in
/// `kinks` instead.
struct GradCheckResult {
  std::string name;
  std::size_t checked = 0;
  std::size_t failed = 0;
  std::size_t kinks = 0;
  double max_rel_error = 0.0;  // over entries that were compared
};

/// Checks every layer type on its own and every variant end to end at toy
/// size (N_max = 8, 2 conv channels) with parameters drawn from `seed`.
std::vector<GradCheckResult> run_gradcheck(std::uint64_t seed, double tolerance = 1e-4, double abs_floor = 1e-6,
                                           double h = 1e-4);

}  // namespace radarpose
