#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "radarpose/harness.hpp"

namespace radarpose {
namespace {

using nn::Mat;
using nn::ParamStore;

struct Checker {
  double tolerance;
  double abs_floor;
  double h;

  bool agrees(double analytic, double numeric) const {
    const double diff = std::abs(analytic - numeric);
    const double scale = std::max(std::abs(analytic), std::abs(numeric));
    return diff <= abs_floor || diff <= tolerance * scale;
  }

  /// Central differences of loss() with respect to every entry of `m`.
  void sweep(GradCheckResult& r, Mat& m, const Mat& analytic, const std::function<double()>& loss) const {
    for (Eigen::Index k = 0; k < m.size(); ++k) {
      double& v = m.data()[k];
      const double saved = v;
      auto central = [&](double step) {
        v = saved + step;
        const double up = loss();
        v = saved - step;
        const double down = loss();
        v = saved;
        return (up - down) / (2.0 * step);
      };
      const double a = analytic.data()[k];
      const double numeric = central(h);
      ++r.checked;
      const double scale = std::max(std::abs(a), std::abs(numeric));
      const double rel = scale > 0.0 ? std::abs(a - numeric) / scale : 0.0;
      if (agrees(a, numeric)) {
        // Entries that are zero up to the floor carry no meaningful ratio.
        if (scale > abs_floor) r.max_rel_error = std::max(r.max_rel_error, rel);
        continue;
      }
      // A ReLU or max-pool switch inside [x - h, x + h] bends the loss and
      // spoils the difference quotient; a hundredfold smaller step no longer
      // straddles it. A wrong gradient disagrees at both step sizes.
      if (agrees(a, central(h * 1e-2))) {
        ++r.kinks;
        continue;
      }
      r.max_rel_error = std::max(r.max_rel_error, rel);
      ++r.failed;
    }
  }
};

Mat gaussian(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng, double stddev = 1.0) {
  std::normal_distribution<double> nd(0.0, stddev);
  Mat m(rows, cols);
  for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = nd(rng);
  return m;
}

void jitter(ParamStore& p, std::mt19937_64& rng, double stddev) {
  for (std::size_t i = 0; i < p.size(); ++i) p[i] += gaussian(p[i].rows(), p[i].cols(), rng, stddev);
}

/// L = sum(R .* layer(x)) for a fixed random R, checked against parameters and input.
GradCheckResult check_layer(const std::string& name, const nn::Layer& layer, ParamStore& p, Mat x,
                            std::mt19937_64& rng, const Checker& c) {
  GradCheckResult r{name};
  std::any cache;
  const Mat y = layer.forward(p, x, cache);
  const Mat weights = gaussian(y.rows(), y.cols(), rng);
  auto grad = p.zeros_like();
  const Mat dx = layer.backward(p, cache, weights, grad);
  auto loss = [&] {
    std::any scratch;
    return (layer.forward(p, x, scratch).array() * weights.array()).sum();
  };
  for (std::size_t i = 0; i < p.size(); ++i) c.sweep(r, p[i], grad[i], loss);
  c.sweep(r, x, dx, loss);
  return r;
}

ModelConfig toy_config(Variant v, std::uint64_t seed) {
  ModelConfig cfg;
  cfg.variant = v;
  cfg.n_max = 8;
  cfg.conv_spec = {{2, 3, 2}, {2, 3, 2}};
  cfg.mlp_head_spec = {16, 8};
  cfg.row_mlp_spec = {8, 8};
  cfg.tnet_shared = {8, 8};
  cfg.tnet_fc = {8};
  cfg.pointnet_shared = {8, 8, 8, 16};
  cfg.pointnet_head = {16, 8};
  cfg.seed = seed;
  return cfg;
}

GradCheckResult check_variant(Variant v, std::mt19937_64& rng, std::uint64_t seed, const Checker& c) {
  const ModelConfig cfg = toy_config(v, seed);
  const PoseNetwork net(cfg);
  auto p = net.initial_params();
  jitter(p, rng, 0.1);

  constexpr std::size_t kBatch = 2;
  std::vector<ModelInput> inputs;
  for (std::size_t s = 0; s < kBatch; ++s) {
    ViewPair views{gaussian(8, 4, rng), gaussian(8, 4, rng), 2};
    views.view_xy.bottomRows(2).setZero();
    views.view_yz.bottomRows(2).setZero();
    inputs.push_back(make_input(v, views));
  }
  const auto batch = net.make_batch(std::span<const ModelInput>(inputs));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Mat targets(static_cast<Eigen::Index>(kBatch), static_cast<Eigen::Index>(cfg.output_width()));
  for (Eigen::Index k = 0; k < targets.size(); ++k) targets.data()[k] = u(rng);

  GradCheckResult r{std::string("variant ") + std::string(variant_name(v))};
  const auto analytic = backward(net, p, batch, targets);
  auto loss = [&] { return (net.forward(p, batch) - targets).squaredNorm() / static_cast<double>(targets.size()); };
  for (std::size_t i = 0; i < p.size(); ++i) c.sweep(r, p[i], analytic.grad[i], loss);
  return r;
}

}  // namespace

std::vector<GradCheckResult> run_gradcheck(std::uint64_t seed, double tolerance, double abs_floor, double h) {
  const Checker c{tolerance, abs_floor, h};
  std::mt19937_64 rng(seed);
  std::vector<GradCheckResult> out;

  {
    ParamStore p;
    nn::Dense layer(p, "dense", 5, 4, rng);
    jitter(p, rng, 0.1);
    out.push_back(check_layer("Dense", layer, p, gaussian(6, 5, rng), rng, c));
  }
  {
    ParamStore p;
    nn::Relu layer;
    out.push_back(check_layer("Relu", layer, p, gaussian(6, 5, rng), rng, c));
  }
  {
    ParamStore p;
    nn::RowMaxPool layer(4);
    out.push_back(check_layer("RowMaxPool", layer, p, gaussian(8, 3, rng), rng, c));
  }
  {
    ParamStore p;
    nn::Conv2d layer(p, "conv", {2, 8, 4}, 2, 3, rng);
    jitter(p, rng, 0.1);
    out.push_back(check_layer("Conv2d", layer, p, gaussian(2, 64, rng), rng, c));
  }
  {
    ParamStore p;
    nn::MaxPool2d layer({2, 8, 4}, 2);
    out.push_back(check_layer("MaxPool2d", layer, p, gaussian(2, 64, rng), rng, c));
  }
  {
    ParamStore p;
    nn::TNet layer(p, "tnet", 4, 8, {8, 8}, {8}, rng);
    jitter(p, rng, 0.1);
    out.push_back(check_layer("TNet", layer, p, gaussian(16, 4, rng), rng, c));
  }
  {
    ParamStore p;
    nn::Sequential layer;
    const auto w = nn::append_mlp(layer, p, "mlp", 4, {6, 5}, rng);
    layer.push(std::make_unique<nn::RowMaxPool>(4));
    layer.push(std::make_unique<nn::Dense>(p, "out", w, 3, rng, nn::Dense::Init::kGlorot));
    jitter(p, rng, 0.1);
    out.push_back(check_layer("Sequential", layer, p, gaussian(8, 4, rng), rng, c));
  }
  for (auto v : {Variant::kDualCnn, Variant::kDualMlp, Variant::kSinglePointNet})
    out.push_back(check_variant(v, rng, seed, c));
  return out;
}

}  // namespace radarpose
