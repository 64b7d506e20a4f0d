#include "radarpose/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "radarpose/dataset_io.hpp"

namespace radarpose {
namespace {

constexpr double kCm = 100.0;

std::vector<Joint> intersect(const std::vector<Joint>& set, const std::vector<Joint>& included) {
  std::vector<Joint> out;
  for (auto j : set)
    if (std::find(included.begin(), included.end(), j) != included.end()) out.push_back(j);
  return out;
}

const Vec3& joint_of(const PoseEstimate& p, Joint j) {
  const auto& v = p.joints[idx(j)];
  if (!v) throw std::invalid_argument("prediction lacks joint " + std::string(joint_name(j)));
  return *v;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : "NA"; }

}  // namespace

JointSets JointSets::defaults(const std::vector<Joint>& included) {
  return {included, intersect(lower_body_joints(), included), intersect(arm_joints(), included)};
}

PoseEstimate to_estimate(const SkeletonFrame& frame, const std::vector<Joint>& joints) {
  PoseEstimate e;
  for (auto j : joints) e.joints[idx(j)] = frame.joints[idx(j)];
  return e;
}

MetricsRow evaluate(std::span<const PoseEstimate> preds, std::span<const SkeletonFrame> gts, const JointSets& sets,
                    double margin_cm) {
  if (preds.size() != gts.size()) throw std::invalid_argument("evaluate: prediction and ground-truth counts differ");
  if (gts.empty()) throw std::invalid_argument("evaluate: no frames");
  if (sets.all.empty()) throw std::invalid_argument("evaluate: empty joint set");
  MetricsRow row;
  double all = 0.0, depth = 0.0, lower = 0.0, arms = 0.0;
  std::size_t n_arm_frames = 0;
  std::array<double, kJointCount> joint_sum{};
  for (std::size_t f = 0; f < gts.size(); ++f) {
    for (auto j : sets.all) {
      const Vec3 d = joint_of(preds[f], j) - gts[f].joints[idx(j)];
      all += d.cwiseAbs().sum();
      depth += std::abs(d.y());
      joint_sum[idx(j)] += d.norm();
    }
    for (auto j : sets.lower) lower += (joint_of(preds[f], j) - gts[f].joints[idx(j)]).cwiseAbs().sum();
    if (is_swing(gts[f].action)) {
      ++n_arm_frames;
      for (auto j : sets.arms) arms += (joint_of(preds[f], j) - gts[f].joints[idx(j)]).cwiseAbs().sum();
    }
  }
  const auto n = static_cast<double>(gts.size());
  row.mae_all_cm = kCm * all / (n * 3.0 * static_cast<double>(sets.all.size()));
  row.mae_depth_cm = kCm * depth / (n * static_cast<double>(sets.all.size()));
  row.mae_lower_cm = sets.lower.empty() ? 0.0 : kCm * lower / (n * 3.0 * static_cast<double>(sets.lower.size()));
  if (n_arm_frames > 0 && !sets.arms.empty())
    row.mae_arms_swing_cm = kCm * arms / (static_cast<double>(n_arm_frames) * 3.0 * static_cast<double>(sets.arms.size()));
  for (auto j : sets.all) row.per_joint_cm[idx(j)] = kCm * joint_sum[idx(j)] / n;
  row.arm_swing_pct = arm_swing_score(preds, gts, margin_cm);
  return row;
}

std::optional<double> arm_swing_score(std::span<const PoseEstimate> preds, std::span<const SkeletonFrame> gts,
                                      double margin_cm) {
  if (preds.size() != gts.size()) throw std::invalid_argument("arm_swing_score: frame count mismatch");
  std::size_t total = 0, correct = 0;
  for (std::size_t f = 0; f < gts.size(); ++f) {
    const auto state = gts[f].swing_state;
    if (state == SwingState::kNone) continue;
    ++total;
    const Joint swing = state == SwingState::kRight ? Joint::kElbowRight : Joint::kElbowLeft;
    const Joint other = mirror_joint(swing);
    const double lead_cm = kCm * (joint_of(preds[f], swing).z() - joint_of(preds[f], other).z());
    if (lead_cm >= margin_cm) ++correct;
  }
  if (total == 0) return std::nullopt;
  return 100.0 * static_cast<double>(correct) / static_cast<double>(total);
}

PoseEstimate mean_pose(std::span<const SkeletonFrame> train, const std::vector<Joint>& joints) {
  if (train.empty()) throw std::invalid_argument("mean_pose: no frames");
  PoseEstimate e;
  for (auto j : joints) {
    Vec3 sum = Vec3::Zero();
    for (const auto& f : train) sum += f.joints[idx(j)];
    e.joints[idx(j)] = sum / static_cast<double>(train.size());
  }
  return e;
}

AblationConfig AblationConfig::from_keys(const KeyValueConfig& kv) {
  kv.require_known({"actions", "frames", "test_frames", "fps", "duration", "subjects", "seed", "eps", "min_pts",
                    "window_ms", "n_max", "lr", "lr_decay", "batch", "epochs", "train_seed", "val_fraction", "margin_cm",
                    "density", "noise_std"});
  AblationConfig c;
  if (kv.has("actions")) {
    c.sim.actions.clear();
    for (const auto& a : kv.get_list("actions", {})) c.sim.actions.push_back(action_from_name(a));
  }
  c.n_trainval = static_cast<std::size_t>(kv.get_int("frames", static_cast<long long>(c.n_trainval)));
  c.n_test = static_cast<std::size_t>(kv.get_int("test_frames", static_cast<long long>(c.n_test)));
  c.sim.motion.fps = kv.get_double("fps", c.sim.motion.fps);
  c.sim.motion.duration = kv.get_double("duration", c.sim.motion.duration);
  c.sim.n_subjects = static_cast<int>(kv.get_int("subjects", c.sim.n_subjects));
  c.sim.seed = static_cast<std::uint64_t>(kv.get_int("seed", static_cast<long long>(c.sim.seed)));
  c.sim.density = static_cast<std::size_t>(kv.get_int("density", static_cast<long long>(c.sim.density)));
  c.sim.chirp.noise_std = kv.get_double("noise_std", c.sim.chirp.noise_std);
  c.fusion.eps = kv.get_double("eps", c.fusion.eps);
  c.fusion.min_pts = static_cast<std::size_t>(kv.get_int("min_pts", static_cast<long long>(c.fusion.min_pts)));
  c.fusion.window_ms = kv.get_int("window_ms", c.fusion.window_ms);
  c.fusion.n_max = static_cast<std::size_t>(kv.get_int("n_max", static_cast<long long>(c.fusion.n_max)));
  c.hyper.lr = kv.get_double("lr", c.hyper.lr);
  c.hyper.lr_decay = kv.get_double("lr_decay", c.hyper.lr_decay);
  c.hyper.batch = static_cast<std::size_t>(kv.get_int("batch", static_cast<long long>(c.hyper.batch)));
  c.hyper.epochs = static_cast<std::size_t>(kv.get_int("epochs", static_cast<long long>(c.hyper.epochs)));
  c.hyper.seed = static_cast<std::uint64_t>(kv.get_int("train_seed", static_cast<long long>(c.hyper.seed)));
  c.hyper.val_fraction = kv.get_double("val_fraction", c.hyper.val_fraction);
  c.swing_margin_cm = kv.get_double("margin_cm", c.swing_margin_cm);
  c.model.n_max = c.fusion.n_max;
  c.model.seed = c.hyper.seed;
  c.validate();
  return c;
}

void AblationConfig::validate() const {
  sim.validate();
  hyper.validate();
  model.validate();
  if (n_trainval == 0 || n_test == 0) throw std::invalid_argument("ablation needs train and test frames");
  if (model.n_max != fusion.n_max) throw std::invalid_argument("model and fusion disagree on n_max");
  if (sim.radars.size() < 2) throw std::invalid_argument("ablation needs two radars");
}

PreparedSplits prepare_splits(std::vector<FusedFrame> frames, std::size_t n_trainval, std::size_t n_test) {
  if (frames.size() < n_trainval + n_test)
    throw std::invalid_argument("prepare_splits: " + std::to_string(frames.size()) + " fused frames, need " +
                                std::to_string(n_trainval + n_test));
  std::sort(frames.begin(), frames.end(), [](const auto& a, const auto& b) { return a.frame_id < b.frame_id; });
  PreparedSplits s;
  s.trainval.assign(std::make_move_iterator(frames.begin()),
                    std::make_move_iterator(frames.begin() + static_cast<std::ptrdiff_t>(n_trainval)));
  s.test.assign(std::make_move_iterator(frames.begin() + static_cast<std::ptrdiff_t>(n_trainval)),
                std::make_move_iterator(frames.begin() + static_cast<std::ptrdiff_t>(n_trainval + n_test)));
  s.snr = normalize_snr(s.trainval);
  s.snr.apply(s.test);
  return s;
}

MetricsRow score_model(const ModelParams& params, std::span<const FusedFrame> test, double margin_cm,
                       const std::string& name) {
  const PoseNetwork net(params.config);
  std::vector<PoseEstimate> preds;
  std::vector<SkeletonFrame> gts;
  for (const auto& f : test) {
    preds.push_back(predict(net, params, f));
    gts.push_back(f.gt);
  }
  auto row = evaluate(preds, gts, JointSets::defaults(params.config.output_joints()), margin_cm);
  row.name = name;
  return row;
}

AblationResult run_ablation(const AblationConfig& cfg, std::vector<DatasetRecord> records,
                            const std::function<void(const std::string&)>& log) {
  cfg.validate();
  auto say = [&](const std::string& msg) {
    if (log) log(msg);
  };
  if (records.empty()) {
    SimulationConfig sim = cfg.sim;
    sim.n_frames = cfg.n_trainval + cfg.n_test;
    say("simulating " + std::to_string(sim.n_frames) + " frames");
    records = simulate_records(sim);
  }

  struct Row {
    const char* name;
    Variant variant;
    std::vector<int> radars;
  };
  const std::vector<Row> rows{{"dual_cnn_two_radars", Variant::kDualCnn, {0, 1}},
                              {"dual_mlp_two_radars", Variant::kDualMlp, {0, 1}},
                              {"single_pointnet_two_radars", Variant::kSinglePointNet, {0, 1}},
                              {"dual_cnn_radar_a", Variant::kDualCnn, {0}}};

  std::vector<std::pair<std::vector<int>, PreparedSplits>> prepared;
  auto splits_for = [&](const std::vector<int>& radars) -> const PreparedSplits& {
    for (const auto& [r, s] : prepared)
      if (r == radars) return s;
    auto fused = fuse_records(records, radars, cfg.sim.radars, cfg.fusion);
    prepared.emplace_back(radars, prepare_splits(std::move(fused), cfg.n_trainval, cfg.n_test));
    return prepared.back().second;
  };

  AblationResult result;
  for (const auto& r : rows) {
    const auto& splits = splits_for(r.radars);
    ModelConfig model = cfg.model;
    model.variant = r.variant;
    say(std::string("training ") + r.name);
    auto trained = train(model, splits.trainval, cfg.hyper, splits.snr);

    std::vector<std::int64_t> ids;
    for (auto i : trained.train_indices) ids.push_back(splits.trainval[i].frame_id);
    ids.push_back(-1);
    for (auto i : trained.val_indices) ids.push_back(splits.trainval[i].frame_id);
    ids.push_back(-1);
    for (const auto& f : splits.test) ids.push_back(f.frame_id);
    char digest[17];
    std::snprintf(digest, sizeof digest, "%016llx", static_cast<unsigned long long>(fnv1a(ids)));

    AblationRow row{r.name, r.variant, r.radars, score_model(trained.params, splits.test, cfg.swing_margin_cm, r.name),
                    trained.history, digest};
    say(std::string(r.name) + ": mae_all_cm " + fmt(row.metrics.mae_all_cm) + ", split " + row.split_digest);

    if (result.rows.empty()) {
      std::vector<SkeletonFrame> train_gt, test_gt;
      for (auto i : trained.train_indices) train_gt.push_back(splits.trainval[i].gt);
      for (const auto& f : splits.test) test_gt.push_back(f.gt);
      const auto joints = model.output_joints();
      const std::vector<PoseEstimate> preds(test_gt.size(), mean_pose(train_gt, joints));
      result.baseline = evaluate(preds, test_gt, JointSets::defaults(joints), cfg.swing_margin_cm);
      result.baseline.name = "mean_pose_baseline";
    }
    result.rows.push_back(std::move(row));
  }
  return result;
}

std::string metrics_csv(std::span<const MetricsRow> rows) {
  std::string out = "configuration,mae_all_cm,mae_arms_swing_cm,mae_lower_cm,mae_depth_cm,arm_swing_pct\n";
  for (const auto& r : rows)
    out += r.name + "," + fmt(r.mae_all_cm) + "," + fmt(r.mae_arms_swing_cm) + "," + fmt(r.mae_lower_cm) + "," +
           fmt(r.mae_depth_cm) + "," + fmt(r.arm_swing_pct) + "\n";
  return out;
}

std::string per_joint_csv(const MetricsRow& row) {
  std::string out = "joint,mae_cm\n";
  for (std::size_t j = 0; j < kJointCount; ++j)
    if (row.per_joint_cm[j]) out += std::string(joint_name(static_cast<Joint>(j))) + "," + fmt(*row.per_joint_cm[j]) + "\n";
  return out;
}

std::string loss_curve_svg(std::span<const EpochLoss> history, const std::string& title) {
  constexpr double kW = 640, kH = 400, kL = 70, kR = 20, kT = 40, kB = 50;
  double hi = 0.0;
  for (const auto& e : history) {
    hi = std::max(hi, e.train_loss);
    if (std::isfinite(e.val_loss)) hi = std::max(hi, e.val_loss);
  }
  if (!(hi > 0.0)) hi = 1.0;
  const double span_x = history.size() > 1 ? static_cast<double>(history.size() - 1) : 1.0;
  auto px = [&](std::size_t i) { return kL + (kW - kL - kR) * static_cast<double>(i) / span_x; };
  auto py = [&](double v) { return kT + (kH - kT - kB) * (1.0 - v / hi); };
  auto polyline = [&](bool val, const char* colour) {
    std::ostringstream s;
    s << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < history.size(); ++i) {
      const double v = val ? history[i].val_loss : history[i].train_loss;
      if (std::isfinite(v)) s << fmt(px(i)) << ',' << fmt(py(v)) << ' ';
    }
    s << "\"/>\n";
    return s.str();
  };
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << kW / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\">" << title
      << "</text>\n"
      << "<line x1=\"" << kL << "\" y1=\"" << kH - kB << "\" x2=\"" << kW - kR << "\" y2=\"" << kH - kB
      << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << kL << "\" y1=\"" << kT << "\" x2=\"" << kL << "\" y2=\"" << kH - kB << "\" stroke=\"black\"/>\n"
      << "<text x=\"" << kL - 6 << "\" y=\"" << kT + 4 << "\" text-anchor=\"end\" font-size=\"11\">" << fmt(hi)
      << "</text>\n"
      << "<text x=\"" << kL - 6 << "\" y=\"" << kH - kB << "\" text-anchor=\"end\" font-size=\"11\">0</text>\n"
      << "<text x=\"" << kW / 2 << "\" y=\"" << kH - 12 << "\" text-anchor=\"middle\" font-size=\"12\">epoch (1.."
      << history.size() << ")</text>\n"
      << polyline(false, "#1f77b4") << polyline(true, "#d62728")
      << "<text x=\"" << kW - kR << "\" y=\"" << kT << "\" text-anchor=\"end\" font-size=\"12\" fill=\"#1f77b4\">train</text>\n"
      << "<text x=\"" << kW - kR << "\" y=\"" << kT + 16
      << "\" text-anchor=\"end\" font-size=\"12\" fill=\"#d62728\">validation</text>\n"
      << "</svg>\n";
  return svg.str();
}

std::uint64_t fnv1a(std::span<const std::int64_t> values, std::uint64_t h) {
  for (auto v : values) {
    auto u = static_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) {
      h ^= (u >> (8 * i)) & 0xFF;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

}  // namespace radarpose
