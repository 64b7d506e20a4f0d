#pragma once

// Minimal layer library with hand-written reverse-mode gradients.
//
// Every layer maps a row-major batch matrix to another. Point-wise layers
// see (batch * rows_per_sample) x features; image layers see
// batch x (channels * height * width) in channel-major order. Layers are
// stateless: parameters live in a ParamStore addressed by index, and each
// forward call fills a cache that the matching backward call consumes.

#include <any>
#include <cstddef>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace radarpose::nn {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Named parameter (or gradient) arrays. Vectors are stored as 1 x n.
class ParamStore {
 public:
  std::size_t add(std::string name, Mat value);

  std::size_t size() const { return values_.size(); }
  Mat& operator[](std::size_t i) { return values_.at(i); }
  const Mat& operator[](std::size_t i) const { return values_.at(i); }
  const std::string& name(std::size_t i) const { return names_.at(i); }

  ParamStore zeros_like() const;
  std::size_t scalar_count() const;
  bool same_shapes(const ParamStore& o) const;

 private:
  std::vector<std::string> names_;
  std::vector<Mat> values_;
};

class Layer {
 public:
  virtual ~Layer() = default;
  virtual Mat forward(const ParamStore& p, const Mat& x, std::any& cache) const = 0;
  /// Accumulates parameter gradients into `grad` and returns dL/dx.
  virtual Mat backward(const ParamStore& p, const std::any& cache, const Mat& dy, ParamStore& grad) const = 0;
};

/// y = x W^T + b applied to every row. W is out x in.
class Dense final : public Layer {
 public:
  enum class Init { kHe, kGlorot, kZero };
  Dense(ParamStore& p, const std::string& name, std::size_t in, std::size_t out, std::mt19937_64& rng,
        Init init = Init::kHe);

  Mat forward(const ParamStore& p, const Mat& x, std::any& cache) const override;
  Mat backward(const ParamStore& p, const std::any& cache, const Mat& dy, ParamStore& grad) const override;

  std::size_t weight_index() const { return w_; }
  std::size_t bias_index() const { return b_; }

 private:
  std::size_t w_;
  std::size_t b_;
};

/// max(x, 0); the subgradient at 0 is 0.
class Relu final : public Layer {
 public:
  Mat forward(const ParamStore& p, const Mat& x, std::any& cache) const override;
  Mat backward(const ParamStore& p, const std::any& cache, const Mat& dy, ParamStore& grad) const override;
};

/// Column-wise max over each sample's block of rows:
/// (batch * rows) x C -> batch x C. Ties route to the first row.
class RowMaxPool final : public Layer {
 public:
  explicit RowMaxPool(std::size_t rows_per_sample) : rows_(rows_per_sample) {}
  Mat forward(const ParamStore& p, const Mat& x, std::any& cache) const override;
  Mat backward(const ParamStore& p, const std::any& cache, const Mat& dy, ParamStore& grad) const override;

 private:
  std::size_t rows_;
};

struct ImageShape {
  std::size_t channels = 1;
  std::size_t height = 1;
  std::size_t width = 1;
  std::size_t size() const { return channels * height * width; }
};

/// Stride-1 convolution with zero "same" padding and an odd square kernel.
class Conv2d final : public Layer {
 public:
  Conv2d(ParamStore& p, const std::string& name, ImageShape in, std::size_t out_channels, std::size_t kernel,
         std::mt19937_64& rng);

  Mat forward(const ParamStore& p, const Mat& x, std::any& cache) const override;
  Mat backward(const ParamStore& p, const std::any& cache, const Mat& dy, ParamStore& grad) const override;
  ImageShape output_shape() const { return {out_channels_, in_.height, in_.width}; }

 private:
  Mat im2col(const double* image) const;
  void col2im(const Mat& cols, double* image) const;

  ImageShape in_;
  std::size_t out_channels_;
  std::size_t kernel_;
  std::size_t w_;
  std::size_t b_;
};

/// Non-overlapping max pooling; trailing rows/columns that do not fill a
/// window are dropped. Ties route to the first element in scan order.
class MaxPool2d final : public Layer {
 public:
  MaxPool2d(ImageShape in, std::size_t window);
  Mat forward(const ParamStore& p, const Mat& x, std::any& cache) const override;
  Mat backward(const ParamStore& p, const std::any& cache, const Mat& dy, ParamStore& grad) const override;
  ImageShape output_shape() const { return {in_.channels, in_.height / window_, in_.width / window_}; }

 private:
  ImageShape in_;
  std::size_t window_;
};

class Sequential final : public Layer {
 public:
  void push(std::unique_ptr<Layer> layer) { layers_.push_back(std::move(layer)); }
  bool empty() const { return layers_.empty(); }

  Mat forward(const ParamStore& p, const Mat& x, std::any& cache) const override;
  Mat backward(const ParamStore& p, const std::any& cache, const Mat& dy, ParamStore& grad) const override;

 private:
  std::vector<std::unique_ptr<Layer>> layers_;
};

/// Appends Dense(+ReLU) layers of the given widths; returns the final width.
/// The last layer gets no ReLU when `relu_last` is false.
std::size_t append_mlp(Sequential& seq, ParamStore& p, const std::string& prefix, std::size_t in,
                       const std::vector<std::size_t>& widths, std::mt19937_64& rng, bool relu_last = true);

}  // namespace radarpose::nn
