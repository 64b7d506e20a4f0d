#include <cmath>
#include <cstring>
#include <random>

#include <gtest/gtest.h>

#include "radarpose/harness.hpp"

using namespace radarpose;

namespace {

std::vector<SkeletonFrame> sim_frames(Action a, std::size_t n) {
  MotionConfig cfg;
  std::vector<SkeletonFrame> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(pose_at(a, 0.1 + 0.23 * static_cast<double>(i), cfg));
  return out;
}

std::vector<PoseEstimate> exact(const std::vector<SkeletonFrame>& gts) {
  const auto joints = included_joints(default_excluded_joints());
  std::vector<PoseEstimate> out;
  for (const auto& g : gts) out.push_back(to_estimate(g, joints));
  return out;
}

// Swap every joint with its mirror partner and reflect x.
PoseEstimate mirrored(const SkeletonFrame& g) {
  PoseEstimate e;
  for (auto j : included_joints(default_excluded_joints())) {
    Vec3 p = g.joints[idx(mirror_joint(j))];
    p.x() = -p.x();
    e.joints[idx(j)] = p;
  }
  return e;
}

// Swing frames at the top of the swing, in a swing state.
std::vector<SkeletonFrame> swing_peaks() {
  MotionConfig cfg;
  std::vector<SkeletonFrame> out;
  for (auto a : {Action::kSwingLeft, Action::kSwingRight})
    for (double t : {0.9, 1.0, 1.1, 2.9, 3.0}) out.push_back(pose_at(a, t * cfg.swing_period / 2.0, cfg));
  for (const auto& f : out) EXPECT_NE(f.swing_state, SwingState::kNone);
  return out;
}

}  // namespace

TEST(Evaluate, ExactPredictionScoresZero) {
  const auto gts = sim_frames(Action::kSwingLeft, 6);
  const auto row = evaluate(exact(gts), gts, JointSets::defaults());
  EXPECT_EQ(row.mae_all_cm, 0.0);
  EXPECT_EQ(row.mae_depth_cm, 0.0);
  EXPECT_EQ(row.mae_lower_cm, 0.0);
  ASSERT_TRUE(row.mae_arms_swing_cm.has_value());
  EXPECT_EQ(*row.mae_arms_swing_cm, 0.0);
}

TEST(Evaluate, DepthOffsetOfOneCentimetre) {
  const auto gts = sim_frames(Action::kWalkToward, 4);
  auto preds = exact(gts);
  for (auto& p : preds)
    for (auto& j : p.joints)
      if (j) j->y() += 0.01;
  const auto row = evaluate(preds, gts, JointSets::defaults());
  EXPECT_NEAR(row.mae_depth_cm, 1.0, 1e-9);
  EXPECT_NEAR(row.mae_all_cm, 1.0 / 3.0, 1e-9);
  EXPECT_NEAR(row.mae_lower_cm, 1.0 / 3.0, 1e-9);
  EXPECT_FALSE(row.mae_arms_swing_cm.has_value());
  EXPECT_FALSE(row.arm_swing_pct.has_value());
  EXPECT_NEAR(*row.per_joint_cm[idx(Joint::kHead)], 1.0, 1e-9);
  EXPECT_FALSE(row.per_joint_cm[idx(Joint::kHandLeft)].has_value());
}

TEST(Evaluate, MatchesFlatLoopOracle) {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> g(0.0, 0.05);
  const auto gts = sim_frames(Action::kSwingRight, 5);
  auto preds = exact(gts);
  for (auto& p : preds)
    for (auto& j : p.joints)
      if (j) *j += Vec3(g(rng), g(rng), g(rng));
  const auto sets = JointSets::defaults();
  const auto row = evaluate(preds, gts, sets);

  double all = 0, depth = 0, lower = 0, arms = 0;
  std::size_t n_all = 0, n_depth = 0, n_lower = 0, n_arms = 0;
  for (std::size_t f = 0; f < 5; ++f)
    for (std::size_t j = 0; j < kJointCount; ++j) {
      if (!preds[f].joints[j]) continue;
      const Joint jj = static_cast<Joint>(j);
      const bool is_lower = std::find(sets.lower.begin(), sets.lower.end(), jj) != sets.lower.end();
      const bool is_arm = std::find(sets.arms.begin(), sets.arms.end(), jj) != sets.arms.end();
      for (int a = 0; a < 3; ++a) {
        const double e = std::abs((*preds[f].joints[j])[a] - gts[f].joints[j][a]) * 100.0;
        all += e;
        ++n_all;
        if (a == 1) {
          depth += e;
          ++n_depth;
        }
        if (is_lower) {
          lower += e;
          ++n_lower;
        }
        if (is_arm) {
          arms += e;
          ++n_arms;
        }
      }
    }
  EXPECT_NEAR(row.mae_all_cm, all / n_all, 1e-9);
  EXPECT_NEAR(row.mae_depth_cm, depth / n_depth, 1e-9);
  EXPECT_NEAR(row.mae_lower_cm, lower / n_lower, 1e-9);
  EXPECT_NEAR(*row.mae_arms_swing_cm, arms / n_arms, 1e-9);
}

TEST(Evaluate, RejectsMismatches) {
  const auto gts = sim_frames(Action::kWalkAway, 3);
  auto preds = exact(gts);
  preds.pop_back();
  EXPECT_THROW(evaluate(preds, gts, JointSets::defaults()), std::invalid_argument);
  preds = exact(gts);
  preds[1].joints[idx(Joint::kKneeLeft)].reset();
  EXPECT_THROW(evaluate(preds, gts, JointSets::defaults()), std::invalid_argument);
}

TEST(ArmSwing, ExactMirroredAndRest) {
  const auto gts = swing_peaks();
  EXPECT_DOUBLE_EQ(*arm_swing_score(exact(gts), gts), 100.0);
  std::vector<PoseEstimate> mirror;
  for (const auto& g : gts) mirror.push_back(mirrored(g));
  EXPECT_DOUBLE_EQ(*arm_swing_score(mirror, gts), 0.0);
  const auto rest = skeleton_template(BoneLengths{});
  const std::vector<PoseEstimate> rest_preds(gts.size(), to_estimate(rest, included_joints(default_excluded_joints())));
  EXPECT_DOUBLE_EQ(*arm_swing_score(rest_preds, gts), 0.0);
}

TEST(ArmSwing, AbsentWithoutSwingFrames) {
  const auto gts = sim_frames(Action::kWalkToward, 3);
  EXPECT_FALSE(arm_swing_score(exact(gts), gts).has_value());
}

TEST(MeanPose, AveragesJoints) {
  std::vector<SkeletonFrame> f(2);
  for (auto& q : f[0].joints) q = Vec3(0, 1, 2);
  for (auto& q : f[1].joints) q = Vec3(2, 3, 4);
  const auto m = mean_pose(f, {Joint::kHead});
  EXPECT_EQ(*m.joints[idx(Joint::kHead)], Vec3(1, 2, 3));
  EXPECT_FALSE(m.joints[idx(Joint::kPelvis)].has_value());
}

TEST(Csv, FixedFormatWithNa) {
  MetricsRow a;
  a.name = "x";
  a.mae_all_cm = 1.0 / 3.0;
  a.mae_lower_cm = 2.0;
  a.mae_depth_cm = 10.5;
  a.arm_swing_pct = 50.0;
  const std::vector<MetricsRow> rows{a};
  EXPECT_EQ(metrics_csv(rows),
            "configuration,mae_all_cm,mae_arms_swing_cm,mae_lower_cm,mae_depth_cm,arm_swing_pct\n"
            "x,0.333333,NA,2.000000,10.500000,50.000000\n");
  a.per_joint_cm[idx(Joint::kHead)] = 4.25;
  EXPECT_EQ(per_joint_csv(a), "joint,mae_cm\nhead,4.250000\n");
}

TEST(Svg, HasBothCurves) {
  const std::vector<EpochLoss> h{{0, 1.0, 1.2}, {1, 0.5, 0.7}, {2, 0.25, 0.4}};
  const auto svg = loss_curve_svg(h, "loss");
  EXPECT_EQ(svg.rfind("<svg", 0), 0U);
  EXPECT_EQ(std::count(svg.begin(), svg.end(), '\n') > 5, true);
  EXPECT_NE(svg.find("#1f77b4"), std::string::npos);
  EXPECT_NE(svg.find("#d62728"), std::string::npos);
  EXPECT_EQ(svg, loss_curve_svg(h, "loss"));
}

TEST(Fnv1a, MatchesByteOracle) {
  const std::vector<std::int64_t> v{0, 1, -1, 123456789012345LL};
  std::uint64_t h = 14695981039346656037ULL;
  for (auto x : v) {
    unsigned char b[8];
    std::memcpy(b, &x, 8);  // the build targets little-endian hosts
    for (unsigned char c : b) h = (h ^ c) * 1099511628211ULL;
  }
  EXPECT_EQ(fnv1a(v), h);
  const std::vector<std::int64_t> w{1, 0, -1, 123456789012345LL};
  EXPECT_NE(fnv1a(w), h);
}

TEST(AblationConfig, FromKeys) {
  const auto kv = KeyValueConfig::parse("frames = 40\ntest_frames = 10\nepochs = 2\nn_max = 32\nactions = swing_left\n");
  const auto c = AblationConfig::from_keys(kv);
  EXPECT_EQ(c.n_trainval, 40U);
  EXPECT_EQ(c.n_test, 10U);
  EXPECT_EQ(c.hyper.epochs, 2U);
  EXPECT_EQ(c.model.n_max, 32U);
  EXPECT_EQ(c.sim.actions, std::vector<Action>{Action::kSwingLeft});
  EXPECT_EQ(AblationConfig{}.hyper.epochs, 12U);
  EXPECT_THROW(AblationConfig::from_keys(KeyValueConfig::parse("epoch = 2\n")), std::invalid_argument);
  EXPECT_THROW(AblationConfig::from_keys(KeyValueConfig::parse("frames = 0\n")), std::invalid_argument);
}

TEST(PrepareSplits, OrdersByFrameAndNormalizesOnTrainOnly) {
  std::vector<FusedFrame> frames(5);
  for (int i = 0; i < 5; ++i) {
    frames[static_cast<std::size_t>(i)].frame_id = 4 - i;
    frames[static_cast<std::size_t>(i)].points = {{Vec3(0, 1, 0), 0.0, 10.0 * (4 - i)}};
  }
  const auto s = prepare_splits(frames, 3, 2);
  ASSERT_EQ(s.trainval.size(), 3U);
  EXPECT_EQ(s.trainval[0].frame_id, 0);
  EXPECT_EQ(s.test[1].frame_id, 4);
  EXPECT_EQ(s.snr.snr_min, 0.0);
  EXPECT_EQ(s.snr.snr_max, 20.0);
  EXPECT_DOUBLE_EQ(s.test[1].points[0].snr, 2.0);
  EXPECT_THROW(prepare_splits(frames, 4, 2), std::invalid_argument);
}

TEST(Ablation, SmallRunIsDeterministic) {
  auto c = AblationConfig::from_keys(KeyValueConfig::parse("frames = 40\ntest_frames = 12\nepochs = 1\nn_max = 16\n"));
  c.model.conv_spec = {{2, 3, 2}};
  c.model.mlp_head_spec = {16};
  c.model.row_mlp_spec = {8};
  c.model.tnet_shared = {8};
  c.model.tnet_fc = {8};
  c.model.pointnet_shared = {8, 16};
  c.model.pointnet_head = {16};
  const auto a = run_ablation(c);
  ASSERT_EQ(a.rows.size(), 4U);
  for (const auto& r : a.rows) EXPECT_EQ(r.split_digest, a.rows[0].split_digest);
  std::vector<MetricsRow> m;
  for (const auto& r : a.rows) m.push_back(r.metrics);
  const auto b = run_ablation(c);
  std::vector<MetricsRow> n;
  for (const auto& r : b.rows) n.push_back(r.metrics);
  EXPECT_EQ(metrics_csv(m), metrics_csv(n));
  EXPECT_EQ(a.baseline.mae_all_cm, b.baseline.mae_all_cm);
}
