#include "radarpose/nn/tnet.hpp"

#include <stdexcept>

namespace radarpose::nn {
namespace {

using Index = Eigen::Index;

struct TNetCache {
  std::any net;
  Mat input;
  Mat transforms;
};

}  // namespace

TNet::TNet(ParamStore& p, const std::string& name, std::size_t dim, std::size_t rows_per_sample,
           const std::vector<std::size_t>& shared_widths, const std::vector<std::size_t>& fc_widths,
           std::mt19937_64& rng)
    : dim_(dim), rows_(rows_per_sample) {
  std::size_t width = append_mlp(net_, p, name + ".shared", dim, shared_widths, rng);
  net_.push(std::make_unique<RowMaxPool>(rows_per_sample));
  width = append_mlp(net_, p, name + ".fc", width, fc_widths, rng);
  auto head = std::make_unique<Dense>(p, name + ".transform", width, dim * dim, rng, Dense::Init::kZero);
  Mat& bias = p[head->bias_index()];
  for (std::size_t i = 0; i < dim; ++i) bias(0, static_cast<Index>(i * dim + i)) = 1.0;
  net_.push(std::move(head));
}

Mat TNet::regress(const ParamStore& p, const Mat& x, std::any& cache) const {
  if (x.cols() != static_cast<Index>(dim_)) throw std::invalid_argument("TNet: feature width mismatch");
  return net_.forward(p, x, cache);
}

Mat TNet::transforms(const ParamStore& p, const Mat& x) const {
  std::any scratch;
  return regress(p, x, scratch);
}

Mat TNet::forward(const ParamStore& p, const Mat& x, std::any& cache) const {
  TNetCache c;
  c.transforms = regress(p, x, c.net);
  const Index d = static_cast<Index>(dim_), rows = static_cast<Index>(rows_);
  Mat y(x.rows(), d);
  for (Index b = 0; b < c.transforms.rows(); ++b) {
    const Eigen::Map<const Mat> t(c.transforms.row(b).data(), d, d);
    y.middleRows(b * rows, rows).noalias() = x.middleRows(b * rows, rows) * t;
  }
  c.input = x;
  cache = std::move(c);
  return y;
}

Mat TNet::backward(const ParamStore& p, const std::any& cache, const Mat& dy, ParamStore& grad) const {
  const auto& c = std::any_cast<const TNetCache&>(cache);
  const Index d = static_cast<Index>(dim_), rows = static_cast<Index>(rows_);
  Mat dx(dy.rows(), d);
  Mat dtransforms(c.transforms.rows(), d * d);
  for (Index b = 0; b < c.transforms.rows(); ++b) {
    const Eigen::Map<const Mat> t(c.transforms.row(b).data(), d, d);
    const auto dyb = dy.middleRows(b * rows, rows);
    dx.middleRows(b * rows, rows).noalias() = dyb * t.transpose();
    Eigen::Map<Mat>(dtransforms.row(b).data(), d, d).noalias() = c.input.middleRows(b * rows, rows).transpose() * dyb;
  }
  dx += net_.backward(p, c.net, dtransforms, grad);
  return dx;
}

}  // namespace radarpose::nn
