// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Pass criterion numbers as arguments to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "radarpose/dataset_io.hpp"
#include "radarpose/fmcw_sim.hpp"
#include "radarpose/harness.hpp"
#include "radarpose/model.hpp"
#include "radarpose/pointcloud.hpp"
#include "radarpose/radar_physics.hpp"
#include "radarpose/train.hpp"

using namespace radarpose;

namespace {

constexpr double kPi = std::numbers::pi;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double rel_err(double got, double want) { return std::abs(got - want) / std::max(std::abs(want), 1e-300); }

// 1. Physics inverses.
Outcome physics_round_trips() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> dist(0.05, 50.0), slope(1e12, 2e14), vel(-20.0, 20.0),
      ang(-1.45, 1.45), tc(1e-5, 2e-4);
  const double lambda = kSpeedOfLight / 77e9;
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double d = dist(rng), s = slope(rng);
    worst = std::max(worst, rel_err(range_from_beat(beat_frequency(d, s), s), d));
  }
  for (int i = 0; i < 1000; ++i) {
    const double t = tc(rng);
    // Stay inside the unambiguous interval |dphi| <= pi.
    const double v = vel(rng) * (lambda / (4.0 * t)) / 20.0;
    worst = std::max(worst, rel_err(velocity_from_phase(doppler_phase(v, t, lambda), t, lambda).value, v));
  }
  for (int i = 0; i < 1000; ++i) {
    const double th = ang(rng);
    const double l = lambda / 2.0;
    worst = std::max(worst, rel_err(angle_from_phase(azimuth_phase(th, l, lambda), l, lambda), th));
  }
  for (int i = 0; i < 1000; ++i) {
    const double d = dist(rng);
    worst = std::max(worst, rel_err(round_trip_delay(d) * kSpeedOfLight / 2.0, d));
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-12 && secs < 1.0, fmt("worst rel %.3g", worst) + fmt(", %.3f s", secs)};
}

// 2. Point recovery from synthesized IF frames over a range x velocity x azimuth grid.
Outcome signal_recovery() {
  const auto t0 = Clock::now();
  ChirpConfig cfg;
  cfg.noise_std = 0.0;
  const double range_tol = kSpeedOfLight / (2.0 * cfg.bandwidth());
  const double vel_step = cfg.wavelength() / (2.0 * static_cast<double>(cfg.n_chirps) * cfg.t_chirp);
  std::size_t n = 0, bad = 0;
  double wr = 0, wv = 0, wa = 0;
  for (double r = 1.0; r <= 5.0 + 1e-9; r += 0.5)
    for (double v = -2.0; v <= 2.0 + 1e-9; v += 1.0)
      for (double az = -45.0; az <= 45.0 + 1e-9; az += 15.0) {
        ++n;
        const double a = az * kPi / 180.0;
        const Reflector refl{Vec3(r * std::sin(a), r * std::cos(a), 0.0), v, 1.0};
        const auto dets = detect_points(synthesize_frame(std::span<const Reflector>(&refl, 1), cfg, n));
        if (dets.empty()) {
          ++bad;
          continue;
        }
        const auto& d = *std::max_element(dets.begin(), dets.end(),
                                          [](const auto& x, const auto& y) { return x.snr_db < y.snr_db; });
        const double er = std::abs(d.range - r), ev = std::abs(d.radial_velocity - v),
                     ea = std::abs(d.azimuth * 180.0 / kPi - az);
        wr = std::max(wr, er);
        wv = std::max(wv, ev);
        wa = std::max(wa, ea);
        if (er > range_tol || ev > vel_step || ea > 1.0) ++bad;
      }
  const double secs = seconds_since(t0);
  return {n >= 200 && bad == 0 && secs < 30.0,
          std::to_string(n) + " points, " + std::to_string(bad) + " missed; worst range " + fmt("%.4f m", wr) +
              " (tol " + fmt("%.4f)", range_tol) + ", velocity " + fmt("%.2g m/s", wv) + " (step " +
              fmt("%.3f)", vel_step) + ", azimuth " + fmt("%.3f deg", wa) + fmt(", %.2f s", secs)};
}

std::vector<int> canonical(const std::vector<int>& labels) {
  std::map<int, int> m;
  std::vector<int> out;
  for (int l : labels) out.push_back(l < 0 ? -1 : m.try_emplace(l, static_cast<int>(m.size())).first->second);
  return out;
}

// Quadratic reference clustering written independently of the library.
std::vector<int> brute_force_dbscan(const std::vector<Vec3>& p, double eps, std::size_t min_pts) {
  const std::size_t n = p.size();
  std::vector<std::vector<std::size_t>> nb(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if ((p[i] - p[j]).norm() <= eps) nb[i].push_back(j);
  std::vector<int> label(n, -1);
  int next = 0;
  // Flood fill over core points.
  for (std::size_t i = 0; i < n; ++i) {
    if (label[i] >= 0 || nb[i].size() < min_pts) continue;
    std::vector<std::size_t> stack{i};
    label[i] = next;
    while (!stack.empty()) {
      const auto k = stack.back();
      stack.pop_back();
      for (auto j : nb[k])
        if (label[j] < 0 && nb[j].size() >= min_pts) {
          label[j] = next;
          stack.push_back(j);
        }
    }
    ++next;
  }
  // Borders take the cluster of their nearest core neighbour.
  std::vector<int> out = label;
  for (std::size_t i = 0; i < n; ++i) {
    if (nb[i].size() >= min_pts) continue;
    double best = std::numeric_limits<double>::infinity();
    for (auto j : nb[i]) {
      const double d = (p[i] - p[j]).norm();
      if (nb[j].size() >= min_pts && d < best) {
        best = d;
        out[i] = label[j];
      }
    }
  }
  return canonical(out);
}

// 3. DBSCAN against the reference and under input shuffles.
Outcome dbscan_reference() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::size_t> size(5, 200), blobs(1, 5), minp(2, 6);
  std::uniform_real_distribution<double> u(-4.0, 4.0), eps_d(0.15, 0.5), spread(0.05, 0.25);
  std::size_t mismatch = 0, unstable = 0;
  for (int inst = 0; inst < 100; ++inst) {
    const std::size_t n = size(rng), k = blobs(rng), mp = minp(rng);
    const double eps = eps_d(rng), s = spread(rng);
    std::vector<Vec3> centers;
    for (std::size_t c = 0; c < k; ++c) centers.emplace_back(u(rng), u(rng), u(rng));
    std::normal_distribution<double> g(0.0, s);
    std::vector<Vec3> pts;
    for (std::size_t i = 0; i < n; ++i) {
      if (i % 4 == 3) pts.emplace_back(u(rng), u(rng), u(rng));
      else pts.push_back(centers[i % k] + Vec3(g(rng), g(rng), g(rng)));
    }
    const auto got = canonical(dbscan(pts, eps, mp));
    if (got != brute_force_dbscan(pts, eps, mp)) ++mismatch;
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    for (int sh = 0; sh < 20; ++sh) {
      std::shuffle(perm.begin(), perm.end(), rng);
      std::vector<Vec3> q;
      for (auto i : perm) q.push_back(pts[i]);
      const auto lq = dbscan(q, eps, mp);
      std::vector<int> back(n);
      for (std::size_t i = 0; i < n; ++i) back[perm[i]] = lq[i];
      if (canonical(back) != got) {
        ++unstable;
        break;
      }
    }
  }
  const double secs = seconds_since(t0);
  return {mismatch == 0 && unstable == 0 && secs < 30.0,
          "100 instances: " + std::to_string(mismatch) + " differ from reference, " + std::to_string(unstable) +
              " change under shuffling" + fmt(", %.2f s", secs)};
}

// 4. Rigid transform properties and the worked mounting example.
Outcome rigid_transform() {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-6.0, 6.0), h(0.2, 3.0), tilt(-0.6, 0.6);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const RadarPose pose{h(rng), tilt(rng), u(rng) / 6.0};
    const Vec3 a(u(rng), u(rng), u(rng)), b(u(rng), u(rng), u(rng));
    const double d0 = (a - b).norm();
    const double d1 = (radar_to_world(a, pose) - radar_to_world(b, pose)).norm();
    worst = std::max(worst, std::abs(d1 - d0));
  }
  const Vec3 w = radar_to_world(Vec3(0, 2, 0), RadarPose{2.0, 20.0 * kPi / 180.0, 0.0});
  const double ex = (w - Vec3(0.0, 1.8794, 1.3160)).cwiseAbs().maxCoeff();
  return {worst <= 1e-9 && ex <= 1e-4,
          fmt("worst distance change %.3g m", worst) + fmt(", example off by %.2g", ex)};
}

// 5. Gradient check over every layer type and variant.
Outcome gradient_check() {
  const auto t0 = Clock::now();
  std::set<std::string> names;
  std::size_t checked = 0, failed = 0, kinks = 0;
  double worst = 0.0;
  for (std::uint64_t seed : {11U, 12U, 13U})
    for (const auto& r : run_gradcheck(seed, 1e-4, 1e-6, 1e-4)) {
      names.insert(r.name);
      checked += r.checked;
      failed += r.failed;
      kinks += r.kinks;
      worst = std::max(worst, r.max_rel_error);
    }
  const std::vector<std::string> need{"Dense",     "Relu", "RowMaxPool", "Conv2d",
                                      "MaxPool2d", "TNet", "Sequential", "variant dual_cnn",
                                      "variant dual_mlp", "variant single_pointnet"};
  std::size_t missing = 0;
  for (const auto& n : need) missing += names.count(n) == 0;
  const double secs = seconds_since(t0);
  return {failed == 0 && missing == 0 && secs < 120.0,
          std::to_string(names.size()) + " targets x 3 seeds, " + std::to_string(checked) + " entries, " +
              std::to_string(failed) + " failed, " + std::to_string(kinks) + " at kinks, worst rel " +
              fmt("%.3g", worst) + fmt(", %.2f s", secs)};
}

// 6. Order invariance of the pointwise variants and of view building.
Outcome permutation_invariance() {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g(0.0, 1.0);
  double worst = 0.0;
  for (auto v : {Variant::kDualMlp, Variant::kSinglePointNet}) {
    ModelConfig cfg;
    cfg.variant = v;
    cfg.seed = 5;
    const auto params = init_params(cfg);
    ViewPair views{ViewMatrix::Zero(64, 4), ViewMatrix::Zero(64, 4), 24};
    for (Eigen::Index i = 0; i < 40; ++i)
      for (Eigen::Index c = 0; c < 4; ++c) {
        views.view_xy(i, c) = g(rng);
        views.view_yz(i, c) = g(rng);
      }
    const auto base = forward(params, make_input(v, views));
    std::vector<Eigen::Index> perm(40);
    std::iota(perm.begin(), perm.end(), 0);
    for (int t = 0; t < 50; ++t) {
      std::shuffle(perm.begin(), perm.end(), rng);
      ViewPair s = views;
      for (Eigen::Index i = 0; i < 40; ++i) {
        s.view_xy.row(i) = views.view_xy.row(perm[static_cast<std::size_t>(i)]);
        s.view_yz.row(i) = views.view_yz.row(perm[static_cast<std::size_t>(i)]);
      }
      const auto out = forward(params, make_input(v, s));
      for (std::size_t k = 0; k < out.size(); ++k) worst = std::max(worst, std::abs(out[k] - base[k]));
    }
  }
  std::vector<RadarPoint> pts;
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 90; ++i) pts.push_back({Vec3(u(rng), 2.5 + u(rng), 1.0 + u(rng)), u(rng), u(rng)});
  pts.push_back(pts[7]);
  const auto ref = build_views(pts, 64);
  std::size_t view_changes = 0;
  for (int t = 0; t < 50; ++t) {
    std::shuffle(pts.begin(), pts.end(), rng);
    view_changes += !(build_views(pts, 64) == ref);
  }
  return {worst <= 1e-6 && view_changes == 0,
          fmt("worst output change %.3g", worst) + ", views changed " + std::to_string(view_changes) + "/50"};
}

std::vector<FusedFrame> fused_default_frames(std::size_t n, SnrScaler& snr) {
  SimulationConfig sim;
  sim.n_frames = n;
  auto frames = fuse_records(simulate_records(sim), {0, 1}, sim.radars, FusionConfig{});
  snr = normalize_snr(frames);
  return frames;
}

// 7. dual_cnn memorizes ten frames.
Outcome overfit() {
  const auto t0 = Clock::now();
  SnrScaler snr;
  auto frames = fused_default_frames(10, snr);
  ModelConfig cfg;
  cfg.variant = Variant::kDualCnn;
  TrainHyper h;
  h.val_fraction = 0.0;
  h.batch = 10;
  h.epochs = 4000;
  // Larger steps stall on a plateau near 4e-5 with a few dead units.
  h.lr = 3e-4;
  const auto r = train(cfg, frames, h, snr);
  const PoseNetwork net(cfg);
  std::vector<PoseEstimate> preds;
  std::vector<SkeletonFrame> gts;
  for (const auto& f : frames) {
    preds.push_back(predict(net, r.params, f));
    gts.push_back(f.gt);
  }
  const auto row = evaluate(preds, gts, JointSets::defaults(cfg.output_joints()));
  double worst = 0.0;
  for (const auto& j : row.per_joint_cm)
    if (j) worst = std::max(worst, *j);
  const double loss = dataset_loss(net, r.params, frames);
  const double secs = seconds_since(t0);
  return {loss < 1e-3 && worst < 1.0 && secs < 180.0,
          fmt("final loss %.3g", loss) + fmt(", worst per-joint error %.3f cm", worst) + fmt(", %.1f s", secs)};
}

// 8. Every configuration beats the mean pose on held-out frames.
Outcome end_to_end() {
  const auto t0 = Clock::now();
  const AblationConfig cfg;
  const auto result = run_ablation(cfg, {}, [](const std::string& m) { std::printf("    %s\n", m.c_str()); });
  std::vector<MetricsRow> rows;
  bool all_better = result.rows.size() == 4;
  for (const auto& r : result.rows) {
    rows.push_back(r.metrics);
    all_better = all_better && r.metrics.mae_all_cm < result.baseline.mae_all_cm;
  }
  rows.push_back(result.baseline);
  std::printf("%s", metrics_csv(rows).c_str());
  const double secs = seconds_since(t0);
  return {all_better && secs < 600.0, fmt("baseline mae_all %.3f cm", result.baseline.mae_all_cm) +
                                           fmt(", %.1f s", secs)};
}

// 9. The ablation table is reproducible byte for byte.
Outcome ablation_determinism() {
  auto cfg = AblationConfig::from_keys(KeyValueConfig::parse("frames = 120\ntest_frames = 40\nepochs = 2\n"));
  auto run = [&] {
    std::vector<MetricsRow> rows;
    for (const auto& r : run_ablation(cfg).rows) rows.push_back(r.metrics);
    return metrics_csv(rows);
  };
  const auto a = run();
  const auto b = run();
  std::size_t lines = 0;
  bool five_metrics = true;
  for (std::size_t pos = 0, next; (next = a.find('\n', pos)) != std::string::npos; pos = next + 1) {
    ++lines;
    five_metrics = five_metrics && std::count(a.begin() + static_cast<std::ptrdiff_t>(pos),
                                              a.begin() + static_cast<std::ptrdiff_t>(next), ',') == 5;
  }
  return {a == b && lines == 5 && five_metrics,
          std::to_string(lines - 1) + " rows, " + (a == b ? "identical" : "different") + " on rerun"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"physics round trips", physics_round_trips},
      {"signal recovery grid", signal_recovery},
      {"dbscan vs brute force", dbscan_reference},
      {"radar_to_world isometry", rigid_transform},
      {"gradient check", gradient_check},
      {"permutation invariance", permutation_invariance},
      {"overfit ten frames", overfit},
      {"end-to-end vs mean pose", end_to_end},
      {"ablation csv determinism", ablation_determinism},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s %d %s: %s\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
