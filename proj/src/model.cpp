#include "radarpose/model.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace radarpose {
namespace {

using nn::Mat;
using Index = Eigen::Index;

Index ix(std::size_t v) { return static_cast<Index>(v); }

struct Tape {
  std::array<std::any, 2> tnet;
  std::array<std::any, 2> encoder;
  std::any head;
};

bool is_dual(Variant v) { return v != Variant::kSinglePointNet; }

void check_widths(const std::vector<std::size_t>& widths, const char* what) {
  for (auto w : widths)
    if (w == 0) throw std::invalid_argument(std::string("ModelConfig: zero width in ") + what);
}

}  // namespace

std::string_view variant_name(Variant v) {
  switch (v) {
    case Variant::kDualCnn: return "dual_cnn";
    case Variant::kDualMlp: return "dual_mlp";
    case Variant::kSinglePointNet: return "single_pointnet";
  }
  throw std::invalid_argument("unknown variant");
}

Variant variant_from_name(std::string_view name) {
  for (auto v : {Variant::kDualCnn, Variant::kDualMlp, Variant::kSinglePointNet})
    if (variant_name(v) == name) return v;
  throw std::invalid_argument("unknown variant: " + std::string(name));
}

void ModelConfig::validate() const {
  const auto n = n_joints_out();
  if (n < 1 || n > kJointCount) throw std::invalid_argument("ModelConfig: n_joints_out out of range");
  if (n_max == 0) throw std::invalid_argument("ModelConfig: n_max must be positive");
  if (is_dual(variant) && tnet_dim != 4) throw std::invalid_argument("ModelConfig: dual views carry 4 features");
  check_widths(tnet_shared, "tnet_shared");
  check_widths(tnet_fc, "tnet_fc");
  check_widths(mlp_head_spec, "mlp_head_spec");
  check_widths(row_mlp_spec, "row_mlp_spec");
  check_widths(pointnet_shared, "pointnet_shared");
  check_widths(pointnet_head, "pointnet_head");
  if (tnet_shared.empty()) throw std::invalid_argument("ModelConfig: TNet needs a shared layer");
  if (variant == Variant::kDualCnn) {
    if (conv_spec.empty()) throw std::invalid_argument("ModelConfig: empty conv_spec");
    for (const auto& c : conv_spec)
      if (c.channels == 0 || c.kernel % 2 == 0 || c.pool == 0)
        throw std::invalid_argument("ModelConfig: conv layers need channels > 0, odd kernel, pool >= 1");
  }
  if (variant == Variant::kDualMlp && row_mlp_spec.empty())
    throw std::invalid_argument("ModelConfig: empty row_mlp_spec");
  if (variant == Variant::kSinglePointNet && pointnet_shared.empty())
    throw std::invalid_argument("ModelConfig: empty pointnet_shared");
}

ModelInput make_input(Variant variant, const ViewPair& views) {
  if (is_dual(variant)) return views;
  PointCloudInput in;
  in.xyz.resize(views.view_xy.rows(), 3);
  in.xyz.col(0) = views.view_xy.col(0);
  in.xyz.col(1) = views.view_xy.col(1);
  in.xyz.col(2) = views.view_yz.col(1);
  return in;
}

NormConstants NormConstants::fit(std::span<const SkeletonFrame> frames, const std::vector<Joint>& joints,
                                 const SnrScaler& snr) {
  if (frames.empty() || joints.empty()) throw std::invalid_argument("NormConstants: nothing to fit");
  NormConstants n;
  n.snr = snr;
  n.gt_min = Vec3::Constant(std::numeric_limits<double>::infinity());
  n.gt_max = -n.gt_min;
  for (const auto& f : frames)
    for (auto j : joints) {
      n.gt_min = n.gt_min.cwiseMin(f.joints[idx(j)]);
      n.gt_max = n.gt_max.cwiseMax(f.joints[idx(j)]);
    }
  // A flat axis would make the affine singular; widen it symmetrically.
  for (int a = 0; a < 3; ++a)
    if (!(n.gt_max[a] > n.gt_min[a])) {
      n.gt_min[a] -= 0.5;
      n.gt_max[a] += 0.5;
    }
  return n;
}

double NormConstants::normalize(double v, std::size_t axis) const {
  return (v - gt_min[ix(axis)]) / (gt_max[ix(axis)] - gt_min[ix(axis)]);
}

double NormConstants::denormalize(double v, std::size_t axis) const {
  return gt_min[ix(axis)] + v * (gt_max[ix(axis)] - gt_min[ix(axis)]);
}

void NormConstants::validate() const {
  if (!gt_min.allFinite() || !gt_max.allFinite() || !std::isfinite(snr.snr_min) || !std::isfinite(snr.snr_max))
    throw std::invalid_argument("NormConstants: non-finite constants");
  for (int a = 0; a < 3; ++a)
    if (!(gt_max[a] > gt_min[a])) throw std::invalid_argument("NormConstants: max must exceed min on every axis");
}

std::vector<double> normalized_target(const SkeletonFrame& gt, const std::vector<Joint>& joints,
                                      const NormConstants& norm) {
  std::vector<double> out;
  out.reserve(3 * joints.size());
  for (auto j : joints)
    for (std::size_t a = 0; a < 3; ++a) out.push_back(norm.normalize(gt.joints[idx(j)][ix(a)], a));
  return out;
}

PoseNetwork::PoseNetwork(const ModelConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  std::mt19937_64 rng(cfg_.seed);
  const std::size_t n = cfg_.n_max;
  const std::size_t d = cfg_.input_dim();
  branch_count_ = is_dual(cfg_.variant) ? 2 : 1;

  for (std::size_t v = 0; v < branch_count_; ++v) {
    const std::string prefix = branch_count_ == 1 ? "cloud" : (v == 0 ? "xy" : "yz");
    const std::size_t begin = init_.size();
    tnets_[v] = std::make_unique<nn::TNet>(init_, prefix + ".tnet", d, n, cfg_.tnet_shared, cfg_.tnet_fc, rng);
    auto& enc = encoders_[v];
    switch (cfg_.variant) {
      case Variant::kDualCnn: {
        nn::ImageShape shape{1, n, d};
        for (std::size_t i = 0; i < cfg_.conv_spec.size(); ++i) {
          const auto& c = cfg_.conv_spec[i];
          auto conv = std::make_unique<nn::Conv2d>(init_, prefix + ".conv" + std::to_string(i), shape, c.channels,
                                                   c.kernel, rng);
          shape = conv->output_shape();
          enc.push(std::move(conv));
          enc.push(std::make_unique<nn::Relu>());
          if (c.pool > 1) {
            auto pool = std::make_unique<nn::MaxPool2d>(shape, c.pool);
            shape = pool->output_shape();
            enc.push(std::move(pool));
          }
        }
        if (shape.size() == 0) throw std::invalid_argument("ModelConfig: conv stack pools the image away");
        encoder_width_[v] = shape.size();
        break;
      }
      case Variant::kDualMlp:
        encoder_width_[v] = nn::append_mlp(enc, init_, prefix + ".rows", d, cfg_.row_mlp_spec, rng);
        enc.push(std::make_unique<nn::RowMaxPool>(n));
        break;
      case Variant::kSinglePointNet:
        encoder_width_[v] = nn::append_mlp(enc, init_, prefix + ".shared", d, cfg_.pointnet_shared, rng);
        enc.push(std::make_unique<nn::RowMaxPool>(n));
        break;
    }
    branch_ranges_[v] = {begin, init_.size()};
  }

  std::size_t width = encoder_width_[0] + (branch_count_ == 2 ? encoder_width_[1] : 0);
  const auto& head_spec = is_dual(cfg_.variant) ? cfg_.mlp_head_spec : cfg_.pointnet_head;
  width = nn::append_mlp(head_, init_, "head", width, head_spec, rng);
  head_.push(std::make_unique<nn::Dense>(init_, "head.out", width, cfg_.output_width(), rng, nn::Dense::Init::kGlorot));
}

PoseNetwork::Batch PoseNetwork::make_batch(std::span<const ModelInput* const> inputs) const {
  const Index n = ix(cfg_.n_max), d = ix(cfg_.input_dim());
  Batch b;
  b.size = inputs.size();
  for (std::size_t v = 0; v < branch_count_; ++v) b.views[v].resize(ix(b.size) * n, d);
  for (std::size_t s = 0; s < inputs.size(); ++s) {
    const ModelInput& in = *inputs[s];
    if (is_dual(cfg_.variant)) {
      const auto* views = std::get_if<ViewPair>(&in);
      if (!views) throw std::invalid_argument("dual variants take a ViewPair");
      for (const auto* m : {&views->view_xy, &views->view_yz})
        if (m->rows() != n || m->cols() != d) throw std::invalid_argument("view shape does not match N_max x 4");
      b.views[0].middleRows(ix(s) * n, n) = views->view_xy;
      b.views[1].middleRows(ix(s) * n, n) = views->view_yz;
    } else {
      const auto* cloud = std::get_if<PointCloudInput>(&in);
      if (!cloud) throw std::invalid_argument("single_pointnet takes an xyz point cloud");
      if (cloud->xyz.rows() != n || cloud->xyz.cols() != 3)
        throw std::invalid_argument("cloud shape does not match N_max x 3");
      b.views[0].middleRows(ix(s) * n, n) = cloud->xyz;
    }
  }
  return b;
}

PoseNetwork::Batch PoseNetwork::make_batch(std::span<const ModelInput> inputs) const {
  std::vector<const ModelInput*> ptrs;
  ptrs.reserve(inputs.size());
  for (const auto& in : inputs) ptrs.push_back(&in);
  return make_batch(std::span<const ModelInput* const>(ptrs));
}

Mat PoseNetwork::forward(const nn::ParamStore& p, const Batch& batch, std::any* tape) const {
  if (!p.same_shapes(init_)) throw std::invalid_argument("parameter shapes do not match the model");
  const Index bsz = ix(batch.size), n = ix(cfg_.n_max), d = ix(cfg_.input_dim());
  Tape t;
  Mat feats(bsz, ix(encoder_width_[0] + (branch_count_ == 2 ? encoder_width_[1] : 0)));
  Index offset = 0;
  for (std::size_t v = 0; v < branch_count_; ++v) {
    if (batch.views[v].rows() != bsz * n || batch.views[v].cols() != d)
      throw std::invalid_argument("batch shape does not match the model");
    Mat x = tnets_[v]->forward(p, batch.views[v], t.tnet[v]);
    if (cfg_.variant == Variant::kDualCnn) x = Eigen::Map<const Mat>(x.data(), bsz, n * d);
    const Index w = ix(encoder_width_[v]);
    feats.middleCols(offset, w) = encoders_[v].forward(p, x, t.encoder[v]);
    offset += w;
  }
  Mat out = head_.forward(p, feats, t.head);
  if (tape) *tape = std::move(t);
  return out;
}

void PoseNetwork::backward(const nn::ParamStore& p, const std::any& tape, const Mat& d_out,
                           nn::ParamStore& grad) const {
  const auto& t = std::any_cast<const Tape&>(tape);
  const Mat dfeats = head_.backward(p, t.head, d_out, grad);
  const Index bsz = dfeats.rows(), n = ix(cfg_.n_max), d = ix(cfg_.input_dim());
  Index offset = 0;
  for (std::size_t v = 0; v < branch_count_; ++v) {
    const Index w = ix(encoder_width_[v]);
    Mat dx = encoders_[v].backward(p, t.encoder[v], dfeats.middleCols(offset, w), grad);
    offset += w;
    if (cfg_.variant == Variant::kDualCnn) dx = Eigen::Map<const Mat>(dx.data(), bsz * n, d);
    tnets_[v]->backward(p, t.tnet[v], dx, grad);
  }
}

PoseNetwork::TNetResult PoseNetwork::tnet_forward(const nn::ParamStore& p, const Mat& view,
                                                  std::size_t branch) const {
  if (branch >= branch_count_) throw std::out_of_range("tnet_forward: no such branch");
  if (view.rows() != ix(cfg_.n_max) || view.cols() != ix(cfg_.input_dim()))
    throw std::invalid_argument("tnet_forward: view shape mismatch");
  std::any cache;
  TNetResult r;
  r.transformed = tnets_[branch]->forward(p, view, cache);
  const Index d = ix(cfg_.input_dim());
  r.transform = Eigen::Map<const Mat>(tnets_[branch]->transforms(p, view).data(), d, d);
  return r;
}

ModelParams init_params(const ModelConfig& cfg, const NormConstants& norm) {
  PoseNetwork net(cfg);
  return {cfg, net.initial_params(), norm};
}

std::vector<double> forward(const ModelParams& params, const ModelInput& input) {
  PoseNetwork net(params.config);
  const auto batch = net.make_batch(std::span<const ModelInput>(&input, 1));
  const Mat out = net.forward(params.weights, batch);
  return {out.data(), out.data() + out.size()};
}

double mse_loss(std::span<const double> pred, std::span<const double> target) {
  if (pred.size() != target.size()) throw std::invalid_argument("mse_loss: length mismatch");
  if (pred.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double e = pred[i] - target[i];
    sum += e * e;
  }
  return sum / static_cast<double>(pred.size());
}

LossAndGrad backward(const PoseNetwork& net, const nn::ParamStore& p, const PoseNetwork::Batch& batch,
                     const Mat& targets) {
  std::any tape;
  const Mat pred = net.forward(p, batch, &tape);
  if (pred.rows() != targets.rows() || pred.cols() != targets.cols())
    throw std::invalid_argument("backward: target shape mismatch");
  const Mat diff = pred - targets;
  LossAndGrad r;
  r.loss = diff.squaredNorm() / static_cast<double>(diff.size());
  r.grad = p.zeros_like();
  net.backward(p, tape, (2.0 / static_cast<double>(diff.size())) * diff, r.grad);
  return r;
}

LossAndGrad backward(const ModelParams& params, const ModelInput& input, std::span<const double> target) {
  PoseNetwork net(params.config);
  const auto batch = net.make_batch(std::span<const ModelInput>(&input, 1));
  if (target.size() != params.config.output_width()) throw std::invalid_argument("backward: target length mismatch");
  const Mat t = Eigen::Map<const Mat>(target.data(), 1, ix(target.size()));
  return backward(net, params.weights, batch, t);
}

PoseEstimate predict(const PoseNetwork& net, const ModelParams& params, const FusedFrame& frame) {
  params.norm.validate();
  const auto views = build_views(frame.points, params.config.n_max);
  const ModelInput in = make_input(params.config.variant, views);
  const auto batch = net.make_batch(std::span<const ModelInput>(&in, 1));
  const Mat out = net.forward(params.weights, batch);
  PoseEstimate est;
  const auto joints = params.config.output_joints();
  for (std::size_t k = 0; k < joints.size(); ++k) {
    Vec3 p;
    for (std::size_t a = 0; a < 3; ++a) p[ix(a)] = params.norm.denormalize(out(0, ix(3 * k + a)), a);
    est.joints[idx(joints[k])] = p;
  }
  return est;
}

PoseEstimate predict(const ModelParams& params, const FusedFrame& frame) {
  PoseNetwork net(params.config);
  return predict(net, params, frame);
}

}  // namespace radarpose
