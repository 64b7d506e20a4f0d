// radarpose: dataset simulation, preprocessing, training, evaluation and
// the ablation report from the command line.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "radarpose/checkpoint.hpp"
#include "radarpose/dataset_io.hpp"
#include "radarpose/harness.hpp"

namespace fs = std::filesystem;
using namespace radarpose;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
}

std::vector<int> parse_radars(const std::string& text) {
  std::vector<int> ids;
  for (const auto& item : split_list(text)) {
    if (item == "a" || item == "A" || item == "0") ids.push_back(0);
    else if (item == "b" || item == "B" || item == "1") ids.push_back(1);
    else throw std::invalid_argument("unknown radar " + item + " (use a, b)");
  }
  if (ids.empty() || ids.size() > 2) throw std::invalid_argument("pick one or two radars");
  return ids;
}

std::string history_csv(const std::vector<EpochLoss>& history) {
  std::string out = "epoch,train_loss,val_loss\n";
  char buf[96];
  for (const auto& e : history) {
    std::snprintf(buf, sizeof buf, "%zu,%.9g,%.9g\n", e.epoch, e.train_loss, e.val_loss);
    out += buf;
  }
  return out;
}

struct SimulateArgs {
  std::string actions = "walk_toward,walk_away,swing_right,swing_left";
  std::size_t frames = 2500;
  double fps = 10.0;
  double duration = 4.0;
  int subjects = 2;
  std::string radars = "a,b";
  std::uint64_t seed = 42;
  std::string out = "data/raw.jsonl";
};

int simulate(const SimulateArgs& a) {
  SimulationConfig cfg;
  cfg.actions.clear();
  for (const auto& name : split_list(a.actions)) cfg.actions.push_back(action_from_name(name));
  cfg.n_frames = a.frames;
  cfg.motion.fps = a.fps;
  cfg.motion.duration = a.duration;
  cfg.n_subjects = a.subjects;
  cfg.seed = a.seed;
  const auto ids = parse_radars(a.radars);
  auto records = simulate_records(cfg);
  std::erase_if(records, [&](const DatasetRecord& r) { return std::find(ids.begin(), ids.end(), r.radar_id) == ids.end(); });
  if (fs::path(a.out).has_parent_path()) fs::create_directories(fs::path(a.out).parent_path());
  write_dataset(a.out, records);
  std::cout << "wrote " << a.out << "\n";
  return 0;
}

struct PreprocessArgs {
  std::string in = "data/raw.jsonl";
  std::string out = "data/fused.jsonl";
  std::string radars = "a,b";
  FusionConfig fusion;
};

int preprocess(const PreprocessArgs& a) {
  const auto records = read_dataset(a.in);
  const auto ids = parse_radars(a.radars);
  const SimulationConfig defaults;
  auto frames = fuse_records(records, ids, defaults.radars, a.fusion);
  std::vector<DatasetRecord> out;
  std::size_t total = 0;
  for (auto& f : frames) {
    if (f.points.size() > a.fusion.n_max) {
      std::stable_sort(f.points.begin(), f.points.end(),
                       [](const auto& p, const auto& q) { return p.xyz.norm() < q.xyz.norm(); });
      f.points.resize(a.fusion.n_max);
    }
    total += f.points.size();
    out.push_back(to_record(f, ids));
  }
  write_dataset(a.out, out);
  std::cout << "wrote " << out.size() << " fused frames (" << total << " points) to " << a.out << "\n";
  return 0;
}

struct TrainArgs {
  std::string data = "data/fused.jsonl";
  std::string variant = "dual_cnn";
  TrainHyper hyper;
  std::size_t n_max = 64;
  std::string checkpoint = "model.ckpt";
  std::string svg;
  std::string history;
};

int train_cmd(const TrainArgs& a) {
  std::vector<FusedFrame> frames;
  for (const auto& r : read_dataset(a.data)) frames.push_back(to_fused_frame(r));
  const SnrScaler snr = normalize_snr(frames);
  ModelConfig cfg;
  cfg.variant = variant_from_name(a.variant);
  cfg.n_max = a.n_max;
  cfg.seed = a.hyper.seed;
  const auto result = train(cfg, frames, a.hyper, snr, [](const EpochLoss& e) {
    std::printf("epoch %zu  train %.6g  val %.6g\n", e.epoch + 1, e.train_loss, e.val_loss);
    std::fflush(stdout);
  });
  save_checkpoint(a.checkpoint, result.params);
  if (!a.svg.empty()) write_text(a.svg, loss_curve_svg(result.history, a.variant + " loss"));
  if (!a.history.empty()) write_text(a.history, history_csv(result.history));
  std::cout << "wrote " << a.checkpoint << "\n";
  return 0;
}

struct EvalArgs {
  std::string checkpoint = "model.ckpt";
  std::string test = "data/test.jsonl";
  std::string report = "report.csv";
  std::string per_joint;
  double margin_cm = 5.0;
};

int eval_cmd(const EvalArgs& a) {
  const auto params = load_checkpoint(a.checkpoint);
  std::vector<FusedFrame> frames;
  for (const auto& r : read_dataset(a.test)) frames.push_back(to_fused_frame(r));
  params.norm.snr.apply(frames);
  const auto row = score_model(params, frames, a.margin_cm, std::string(variant_name(params.config.variant)));
  const std::vector<MetricsRow> rows{row};
  write_text(a.report, metrics_csv(rows));
  if (!a.per_joint.empty()) write_text(a.per_joint, per_joint_csv(row));
  std::cout << metrics_csv(rows);
  return 0;
}

struct AblateArgs {
  std::string config;
  std::string out_csv = "ablation.csv";
  std::string dataset;
  std::string svg_dir;
};

int ablate(const AblateArgs& a) {
  const auto kv = a.config.empty() ? KeyValueConfig{} : KeyValueConfig::load(a.config);
  const auto cfg = AblationConfig::from_keys(kv);
  std::vector<DatasetRecord> records;
  if (!a.dataset.empty()) records = read_dataset(a.dataset);
  const auto result = run_ablation(cfg, std::move(records), [](const std::string& msg) {
    std::cerr << msg << "\n";
  });
  std::vector<MetricsRow> rows;
  for (const auto& r : result.rows) rows.push_back(r.metrics);
  write_text(a.out_csv, metrics_csv(rows));
  if (!a.svg_dir.empty())
    for (const auto& r : result.rows) write_text(fs::path(a.svg_dir) / (r.name + ".svg"), loss_curve_svg(r.history, r.name));
  std::cout << metrics_csv(rows);
  const std::vector<MetricsRow> base{result.baseline};
  std::cout << "baseline: " << metrics_csv(base).substr(metrics_csv({}).size());
  for (const auto& r : result.rows) std::cout << "split digest " << r.name << " " << r.split_digest << "\n";
  return 0;
}

int gradcheck(std::uint64_t seed, double tolerance) {
  bool ok = true;
  for (const auto& r : run_gradcheck(seed, tolerance)) {
    std::printf("%-24s %6zu checked  %zu failed  %zu at kinks  max rel %.3g\n", r.name.c_str(), r.checked,
                r.failed, r.kinks, r.max_rel_error);
    ok = ok && r.failed == 0;
  }
  std::puts(ok ? "gradcheck passed" : "gradcheck FAILED");
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dual-radar point-cloud pose estimation workbench"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Generate a raw per-radar dataset (JSON lines)");
  s->add_option("--actions", sim.actions, "Comma-separated actions")->capture_default_str();
  s->add_option("--frames", sim.frames, "Total frames")->capture_default_str();
  s->add_option("--fps", sim.fps, "Frames per second")->capture_default_str();
  s->add_option("--duration", sim.duration, "Episode length in seconds")->capture_default_str();
  s->add_option("--subjects", sim.subjects, "Number of subjects")->capture_default_str();
  s->add_option("--radars", sim.radars, "Radars to simulate: a, b or a,b")->capture_default_str();
  s->add_option("--seed", sim.seed, "Random seed")->capture_default_str();
  s->add_option("--out", sim.out, "Output file")->capture_default_str();

  PreprocessArgs pre;
  auto* p = app.add_subcommand("preprocess", "Align, fuse and denoise raw records into world-frame frames");
  p->add_option("--in", pre.in, "Raw dataset")->capture_default_str();
  p->add_option("--out", pre.out, "Fused dataset")->capture_default_str();
  p->add_option("--radars", pre.radars, "Radars to fuse")->capture_default_str();
  p->add_option("--eps", pre.fusion.eps, "DBSCAN radius (m)")->capture_default_str();
  p->add_option("--min-pts", pre.fusion.min_pts, "DBSCAN core threshold")->capture_default_str();
  p->add_option("--window-ms", pre.fusion.window_ms, "Pairing window (ms)")->capture_default_str();
  p->add_option("--n-max", pre.fusion.n_max, "Points kept per frame")->capture_default_str();

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train one variant on a fused dataset");
  t->add_option("--data", tr.data, "Fused training/validation dataset")->capture_default_str();
  t->add_option("--variant", tr.variant, "dual_cnn, dual_mlp or single_pointnet")->capture_default_str();
  t->add_option("--lr", tr.hyper.lr, "Learning rate")->capture_default_str();
  t->add_option("--lr-decay", tr.hyper.lr_decay, "Per-epoch learning-rate factor")->capture_default_str();
  t->add_option("--batch", tr.hyper.batch, "Batch size")->capture_default_str();
  t->add_option("--epochs", tr.hyper.epochs, "Epochs")->capture_default_str();
  t->add_option("--seed", tr.hyper.seed, "Seed for init, split and shuffling")->capture_default_str();
  t->add_option("--val-fraction", tr.hyper.val_fraction, "Validation share")->capture_default_str();
  t->add_option("--n-max", tr.n_max, "Rows per view")->capture_default_str();
  t->add_option("--checkpoint", tr.checkpoint, "Output checkpoint")->capture_default_str();
  t->add_option("--svg", tr.svg, "Optional loss-curve SVG");
  t->add_option("--history", tr.history, "Optional per-epoch loss CSV");

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Score a checkpoint on a fused test set");
  e->add_option("--checkpoint", ev.checkpoint, "Checkpoint")->capture_default_str();
  e->add_option("--test", ev.test, "Fused test dataset")->capture_default_str();
  e->add_option("--report", ev.report, "Metrics CSV")->capture_default_str();
  e->add_option("--per-joint", ev.per_joint, "Optional per-joint MAE CSV");
  e->add_option("--margin-cm", ev.margin_cm, "Arm-swing elbow margin (cm)")->capture_default_str();

  AblateArgs ab;
  auto* a = app.add_subcommand("ablate", "Train and score the four ablation configurations");
  a->add_option("--config", ab.config, "key = value configuration file");
  a->add_option("--out-csv", ab.out_csv, "Report CSV")->capture_default_str();
  a->add_option("--dataset", ab.dataset, "Raw dataset to use instead of simulating");
  a->add_option("--svg-dir", ab.svg_dir, "Directory for per-row loss curves");

  std::uint64_t gc_seed = 0;
  double gc_tol = 1e-4;
  auto* g = app.add_subcommand("gradcheck", "Finite-difference check of every layer and variant");
  g->add_option("--seed", gc_seed, "Seed")->capture_default_str();
  g->add_option("--tolerance", gc_tol, "Relative tolerance")->capture_default_str();

  CLI11_PARSE(app, argc, argv);
  try {
    if (s->parsed()) return simulate(sim);
    if (p->parsed()) return preprocess(pre);
    if (t->parsed()) return train_cmd(tr);
    if (e->parsed()) return eval_cmd(ev);
    if (a->parsed()) return ablate(ab);
    if (g->parsed()) return gradcheck(gc_seed, gc_tol);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 0;
}
