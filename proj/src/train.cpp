#include "radarpose/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

namespace radarpose {
namespace {

using nn::Mat;
using Index = Eigen::Index;

struct Examples {
  std::vector<ModelInput> inputs;
  Mat targets;  // one row per frame
};

Examples prepare(const ModelConfig& cfg, std::span<const FusedFrame> frames, const NormConstants& norm) {
  Examples ex;
  const auto joints = cfg.output_joints();
  ex.inputs.reserve(frames.size());
  ex.targets.resize(static_cast<Index>(frames.size()), static_cast<Index>(cfg.output_width()));
  for (std::size_t i = 0; i < frames.size(); ++i) {
    ex.inputs.push_back(make_input(cfg.variant, build_views(frames[i].points, cfg.n_max)));
    const auto t = normalized_target(frames[i].gt, joints, norm);
    ex.targets.row(static_cast<Index>(i)) = Eigen::Map<const Mat>(t.data(), 1, static_cast<Index>(t.size()));
  }
  return ex;
}

struct Slice {
  PoseNetwork::Batch batch;
  Mat targets;
};

Slice gather(const PoseNetwork& net, const Examples& ex, std::span<const std::size_t> rows) {
  std::vector<const ModelInput*> ptrs;
  Slice s;
  s.targets.resize(static_cast<Index>(rows.size()), ex.targets.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    ptrs.push_back(&ex.inputs[rows[k]]);
    s.targets.row(static_cast<Index>(k)) = ex.targets.row(static_cast<Index>(rows[k]));
  }
  s.batch = net.make_batch(std::span<const ModelInput* const>(ptrs));
  return s;
}

/// Per-sample squared error sums, so epoch losses can be reduced in a fixed order.
Eigen::VectorXd row_sq_errors(const Mat& pred, const Mat& targets) {
  return (pred - targets).rowwise().squaredNorm();
}

double mean_loss(const PoseNetwork& net, const nn::ParamStore& p, const Examples& ex,
                 std::span<const std::size_t> rows, std::size_t batch) {
  if (rows.empty()) return std::numeric_limits<double>::quiet_NaN();
  Eigen::VectorXd per(static_cast<Index>(rows.size()));
  for (std::size_t start = 0; start < rows.size(); start += batch) {
    const auto chunk = rows.subspan(start, std::min(batch, rows.size() - start));
    const auto s = gather(net, ex, chunk);
    per.segment(static_cast<Index>(start), static_cast<Index>(chunk.size())) =
        row_sq_errors(net.forward(p, s.batch), s.targets);
  }
  return per.sum() / static_cast<double>(rows.size() * static_cast<std::size_t>(ex.targets.cols()));
}

}  // namespace

void TrainHyper::validate() const {
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw std::invalid_argument("lr must be finite and >= 0");
  if (!(lr_decay > 0.0 && lr_decay <= 1.0)) throw std::invalid_argument("lr_decay must be in (0, 1]");
  if (batch == 0) throw std::invalid_argument("batch must be positive");
  if (!(val_fraction >= 0.0 && val_fraction < 1.0)) throw std::invalid_argument("val_fraction must be in [0, 1)");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) throw std::invalid_argument("bad Adam betas");
  if (!(adam_eps > 0.0)) throw std::invalid_argument("adam_eps must be positive");
}

Adam::Adam(const nn::ParamStore& like, const TrainHyper& hyper)
    : hyper_(hyper), m_(like.zeros_like()), v_(like.zeros_like()) {}

void Adam::step(nn::ParamStore& params, const nn::ParamStore& grad) {
  ++t_;
  const double c1 = 1.0 - std::pow(hyper_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(hyper_.beta2, static_cast<double>(t_));
  const double step = hyper_.lr / c1;
  const double sqrt_c2 = std::sqrt(c2);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto m = m_[i].array();
    auto v = v_[i].array();
    const auto g = grad[i].array();
    m = hyper_.beta1 * m + (1.0 - hyper_.beta1) * g;
    v = hyper_.beta2 * v + (1.0 - hyper_.beta2) * g.square();
    params[i].array() -= step * m / (v.sqrt() / sqrt_c2 + hyper_.adam_eps);
  }
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(std::size_t n, double val_fraction,
                                                                            std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_val = static_cast<std::size_t>(std::llround(val_fraction * static_cast<double>(n)));
  std::vector<std::size_t> val(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
  std::vector<std::size_t> tr(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
  std::sort(val.begin(), val.end());
  std::sort(tr.begin(), tr.end());
  return {tr, val};
}

TrainResult train(const ModelConfig& cfg, std::span<const FusedFrame> frames, const TrainHyper& hyper,
                  const SnrScaler& snr, const std::function<void(const EpochLoss&)>& on_epoch) {
  hyper.validate();
  if (frames.empty()) throw std::invalid_argument("train: empty dataset");
  TrainResult result;
  std::tie(result.train_indices, result.val_indices) = split_indices(frames.size(), hyper.val_fraction, hyper.seed);
  if (result.train_indices.empty()) throw std::invalid_argument("train: no frames left for training");

  std::vector<SkeletonFrame> train_gt;
  for (auto i : result.train_indices) train_gt.push_back(frames[i].gt);

  const PoseNetwork net(cfg);
  result.params = {cfg, net.initial_params(), NormConstants::fit(train_gt, cfg.output_joints(), snr)};
  const Examples ex = prepare(cfg, frames, result.params.norm);
  auto& p = result.params.weights;
  Adam adam(p, hyper);

  // Separate streams so the split and the epoch order do not share draws.
  std::mt19937_64 rng(hyper.seed ^ 0x9E3779B97F4A7C15ULL);
  std::vector<std::size_t> order = result.train_indices;
  const std::size_t n_train = order.size();
  const double width = static_cast<double>(cfg.output_width());
  Eigen::VectorXd per_sample(static_cast<Index>(frames.size()));

  for (std::size_t epoch = 0; epoch < hyper.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    adam.set_lr(hyper.lr * std::pow(hyper.lr_decay, static_cast<double>(epoch)));
    per_sample.setZero();
    for (std::size_t start = 0; start < n_train; start += hyper.batch) {
      const std::span<const std::size_t> rows(order.data() + start, std::min(hyper.batch, n_train - start));
      const auto s = gather(net, ex, rows);
      std::any tape;
      const Mat pred = net.forward(p, s.batch, &tape);
      const Mat diff = pred - s.targets;
      const auto sq = diff.rowwise().squaredNorm();
      for (std::size_t k = 0; k < rows.size(); ++k) per_sample[static_cast<Index>(rows[k])] = sq[static_cast<Index>(k)];
      auto grad = p.zeros_like();
      net.backward(p, tape, (2.0 / static_cast<double>(diff.size())) * diff, grad);
      adam.step(p, grad);
    }
    EpochLoss e;
    e.epoch = epoch;
    // Reduce in index order so the value does not depend on the shuffle.
    double total = 0.0;
    for (auto i : result.train_indices) total += per_sample[static_cast<Index>(i)];
    e.train_loss = total / (static_cast<double>(n_train) * width);
    e.val_loss = mean_loss(net, p, ex, result.val_indices, 64);
    result.history.push_back(e);
    if (on_epoch) on_epoch(e);
  }
  return result;
}

double dataset_loss(const PoseNetwork& net, const ModelParams& params, std::span<const FusedFrame> frames,
                    std::size_t batch) {
  const Examples ex = prepare(params.config, frames, params.norm);
  std::vector<std::size_t> rows(frames.size());
  std::iota(rows.begin(), rows.end(), 0);
  return mean_loss(net, params.weights, ex, rows, std::max<std::size_t>(batch, 1));
}

}  // namespace radarpose
