#include "radarpose/nn/layers.hpp"

#include <cmath>
#include <stdexcept>

namespace radarpose::nn {
namespace {

using Index = Eigen::Index;

Index ix(std::size_t v) { return static_cast<Index>(v); }

void fill_uniform(Mat& m, double bound, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-bound, bound);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
}

struct ArgmaxCache {
  std::vector<Index> source;  // flat input index for every output element
  Index in_rows = 0;
  Index in_cols = 0;
};

}  // namespace

std::size_t ParamStore::add(std::string name, Mat value) {
  names_.push_back(std::move(name));
  values_.push_back(std::move(value));
  return values_.size() - 1;
}

ParamStore ParamStore::zeros_like() const {
  ParamStore out;
  for (std::size_t i = 0; i < values_.size(); ++i)
    out.add(names_[i], Mat::Zero(values_[i].rows(), values_[i].cols()));
  return out;
}

std::size_t ParamStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& v : values_) n += static_cast<std::size_t>(v.size());
  return n;
}

bool ParamStore::same_shapes(const ParamStore& o) const {
  if (o.size() != size()) return false;
  for (std::size_t i = 0; i < size(); ++i)
    if (o[i].rows() != values_[i].rows() || o[i].cols() != values_[i].cols()) return false;
  return true;
}

// --- Dense ---------------------------------------------------------------

Dense::Dense(ParamStore& p, const std::string& name, std::size_t in, std::size_t out, std::mt19937_64& rng,
             Init init) {
  Mat w = Mat::Zero(ix(out), ix(in));
  switch (init) {
    case Init::kHe: fill_uniform(w, std::sqrt(6.0 / static_cast<double>(in)), rng); break;
    case Init::kGlorot: fill_uniform(w, std::sqrt(6.0 / static_cast<double>(in + out)), rng); break;
    case Init::kZero: break;
  }
  w_ = p.add(name + ".weight", std::move(w));
  b_ = p.add(name + ".bias", Mat::Zero(1, ix(out)));
}

Mat Dense::forward(const ParamStore& p, const Mat& x, std::any& cache) const {
  const Mat& w = p[w_];
  if (x.cols() != w.cols()) throw std::invalid_argument("Dense: input width mismatch");
  cache = x;
  Mat y = x * w.transpose();
  y.rowwise() += p[b_].row(0);
  return y;
}

Mat Dense::backward(const ParamStore& p, const std::any& cache, const Mat& dy, ParamStore& grad) const {
  const Mat& x = std::any_cast<const Mat&>(cache);
  grad[w_].noalias() += dy.transpose() * x;
  grad[b_] += dy.colwise().sum();
  return dy * p[w_];
}

// --- Relu ----------------------------------------------------------------

Mat Relu::forward(const ParamStore&, const Mat& x, std::any& cache) const {
  Mat y = x.cwiseMax(0.0);
  cache = x;
  return y;
}

Mat Relu::backward(const ParamStore&, const std::any& cache, const Mat& dy, ParamStore&) const {
  const Mat& x = std::any_cast<const Mat&>(cache);
  return (x.array() > 0.0).select(dy, 0.0);
}

// --- RowMaxPool ----------------------------------------------------------

Mat RowMaxPool::forward(const ParamStore&, const Mat& x, std::any& cache) const {
  const Index rows = ix(rows_);
  if (rows == 0 || x.rows() % rows != 0) throw std::invalid_argument("RowMaxPool: rows not a multiple of block");
  const Index batch = x.rows() / rows;
  Mat y(batch, x.cols());
  ArgmaxCache c{std::vector<Index>(static_cast<std::size_t>(batch * x.cols())), x.rows(), x.cols()};
  for (Index b = 0; b < batch; ++b) {
    for (Index col = 0; col < x.cols(); ++col) {
      Index best = b * rows;
      for (Index r = b * rows + 1; r < (b + 1) * rows; ++r)
        if (x(r, col) > x(best, col)) best = r;
      y(b, col) = x(best, col);
      c.source[static_cast<std::size_t>(b * x.cols() + col)] = best * x.cols() + col;
    }
  }
  cache = std::move(c);
  return y;
}

Mat RowMaxPool::backward(const ParamStore&, const std::any& cache, const Mat& dy, ParamStore&) const {
  const auto& c = std::any_cast<const ArgmaxCache&>(cache);
  Mat dx = Mat::Zero(c.in_rows, c.in_cols);
  for (Index i = 0; i < dy.size(); ++i) dx.data()[c.source[static_cast<std::size_t>(i)]] += dy.data()[i];
  return dx;
}

// --- Conv2d --------------------------------------------------------------

Conv2d::Conv2d(ParamStore& p, const std::string& name, ImageShape in, std::size_t out_channels,
               std::size_t kernel, std::mt19937_64& rng)
    : in_(in), out_channels_(out_channels), kernel_(kernel) {
  if (kernel % 2 == 0) throw std::invalid_argument("Conv2d: kernel must be odd");
  const std::size_t fan_in = in.channels * kernel * kernel;
  Mat w(ix(out_channels), ix(fan_in));
  fill_uniform(w, std::sqrt(6.0 / static_cast<double>(fan_in)), rng);
  w_ = p.add(name + ".weight", std::move(w));
  b_ = p.add(name + ".bias", Mat::Zero(1, ix(out_channels)));
}

// Rows are output pixels (h, w); columns are (channel, kh, kw).
Mat Conv2d::im2col(const double* image) const {
  const Index h = ix(in_.height), w = ix(in_.width), k = ix(kernel_), half = k / 2;
  Mat cols = Mat::Zero(h * w, ix(in_.channels) * k * k);
  for (Index c = 0; c < ix(in_.channels); ++c)
    for (Index kh = 0; kh < k; ++kh)
      for (Index kw = 0; kw < k; ++kw) {
        const Index col = (c * k + kh) * k + kw;
        for (Index y = 0; y < h; ++y) {
          const Index sy = y + kh - half;
          if (sy < 0 || sy >= h) continue;
          for (Index x = 0; x < w; ++x) {
            const Index sx = x + kw - half;
            if (sx < 0 || sx >= w) continue;
            cols(y * w + x, col) = image[(c * h + sy) * w + sx];
          }
        }
      }
  return cols;
}

void Conv2d::col2im(const Mat& cols, double* image) const {
  const Index h = ix(in_.height), w = ix(in_.width), k = ix(kernel_), half = k / 2;
  for (Index c = 0; c < ix(in_.channels); ++c)
    for (Index kh = 0; kh < k; ++kh)
      for (Index kw = 0; kw < k; ++kw) {
        const Index col = (c * k + kh) * k + kw;
        for (Index y = 0; y < h; ++y) {
          const Index sy = y + kh - half;
          if (sy < 0 || sy >= h) continue;
          for (Index x = 0; x < w; ++x) {
            const Index sx = x + kw - half;
            if (sx < 0 || sx >= w) continue;
            image[(c * h + sy) * w + sx] += cols(y * w + x, col);
          }
        }
      }
}

Mat Conv2d::forward(const ParamStore& p, const Mat& x, std::any& cache) const {
  if (x.cols() != ix(in_.size())) throw std::invalid_argument("Conv2d: input size mismatch");
  const Index pixels = ix(in_.height * in_.width);
  const Mat& w = p[w_];
  std::vector<Mat> all_cols;
  all_cols.reserve(static_cast<std::size_t>(x.rows()));
  Mat y(x.rows(), ix(out_channels_) * pixels);
  for (Index b = 0; b < x.rows(); ++b) {
    Mat cols = im2col(x.row(b).data());
    Mat out = cols * w.transpose();  // pixels x out_channels
    out.rowwise() += p[b_].row(0);
    Eigen::Map<Mat>(y.row(b).data(), ix(out_channels_), pixels) = out.transpose();
    all_cols.push_back(std::move(cols));
  }
  cache = std::move(all_cols);
  return y;
}

Mat Conv2d::backward(const ParamStore& p, const std::any& cache, const Mat& dy, ParamStore& grad) const {
  const auto& all_cols = std::any_cast<const std::vector<Mat>&>(cache);
  const Index pixels = ix(in_.height * in_.width);
  const Mat& w = p[w_];
  Mat dx = Mat::Zero(dy.rows(), ix(in_.size()));
  for (Index b = 0; b < dy.rows(); ++b) {
    const Mat dout = Eigen::Map<const Mat>(dy.row(b).data(), ix(out_channels_), pixels).transpose();
    const Mat& cols = all_cols[static_cast<std::size_t>(b)];
    grad[w_].noalias() += dout.transpose() * cols;
    grad[b_] += dout.colwise().sum();
    const Mat dcols = dout * w;
    col2im(dcols, dx.row(b).data());
  }
  return dx;
}

// --- MaxPool2d -----------------------------------------------------------

MaxPool2d::MaxPool2d(ImageShape in, std::size_t window) : in_(in), window_(window) {
  if (window == 0) throw std::invalid_argument("MaxPool2d: window must be positive");
}

Mat MaxPool2d::forward(const ParamStore&, const Mat& x, std::any& cache) const {
  if (x.cols() != ix(in_.size())) throw std::invalid_argument("MaxPool2d: input size mismatch");
  const ImageShape out = output_shape();
  const Index win = ix(window_), h = ix(in_.height), w = ix(in_.width);
  const Index oh = ix(out.height), ow = ix(out.width);
  Mat y(x.rows(), ix(out.size()));
  ArgmaxCache c{std::vector<Index>(static_cast<std::size_t>(y.size())), x.rows(), x.cols()};
  for (Index b = 0; b < x.rows(); ++b) {
    const double* img = x.row(b).data();
    for (Index ch = 0; ch < ix(in_.channels); ++ch)
      for (Index oy = 0; oy < oh; ++oy)
        for (Index ox = 0; ox < ow; ++ox) {
          Index best = (ch * h + oy * win) * w + ox * win;
          for (Index dy = 0; dy < win; ++dy)
            for (Index dx = 0; dx < win; ++dx) {
              const Index at = (ch * h + oy * win + dy) * w + ox * win + dx;
              if (img[at] > img[best]) best = at;
            }
          const Index o = (ch * oh + oy) * ow + ox;
          y(b, o) = img[best];
          c.source[static_cast<std::size_t>(b * y.cols() + o)] = b * x.cols() + best;
        }
  }
  cache = std::move(c);
  return y;
}

Mat MaxPool2d::backward(const ParamStore&, const std::any& cache, const Mat& dy, ParamStore&) const {
  const auto& c = std::any_cast<const ArgmaxCache&>(cache);
  Mat dx = Mat::Zero(c.in_rows, c.in_cols);
  for (Index i = 0; i < dy.size(); ++i) dx.data()[c.source[static_cast<std::size_t>(i)]] += dy.data()[i];
  return dx;
}

// --- Sequential ----------------------------------------------------------

Mat Sequential::forward(const ParamStore& p, const Mat& x, std::any& cache) const {
  std::vector<std::any> caches(layers_.size());
  Mat h = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) h = layers_[i]->forward(p, h, caches[i]);
  cache = std::move(caches);
  return h;
}

Mat Sequential::backward(const ParamStore& p, const std::any& cache, const Mat& dy, ParamStore& grad) const {
  const auto& caches = std::any_cast<const std::vector<std::any>&>(cache);
  Mat d = dy;
  for (std::size_t i = layers_.size(); i-- > 0;) d = layers_[i]->backward(p, caches[i], d, grad);
  return d;
}

std::size_t append_mlp(Sequential& seq, ParamStore& p, const std::string& prefix, std::size_t in,
                       const std::vector<std::size_t>& widths, std::mt19937_64& rng, bool relu_last) {
  std::size_t width = in;
  for (std::size_t i = 0; i < widths.size(); ++i) {
    const bool last = i + 1 == widths.size();
    const auto init = (last && !relu_last) ? Dense::Init::kGlorot : Dense::Init::kHe;
    seq.push(std::make_unique<Dense>(p, prefix + "." + std::to_string(i), width, widths[i], rng, init));
    if (!last || relu_last) seq.push(std::make_unique<Relu>());
    width = widths[i];
  }
  return width;
}

}  // namespace radarpose::nn
