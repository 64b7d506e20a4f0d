#pragma once

#include <vector>

#include "radarpose/nn/layers.hpp"

namespace radarpose::nn {

/// Learned per-sample d x d transform applied to a point matrix.
///
/// A shared row MLP feeds a max pool over each sample's rows, then a small
/// MLP regresses d*d values reshaped row-major into the transform. The
/// final layer starts with zero weights and identity bias, so a fresh TNet
/// is exactly the identity. Input and output are (batch * rows) x d; each
/// sample's rows are multiplied on the right by its transform.
class TNet final : public Layer {
 public:
  TNet(ParamStore& p, const std::string& name, std::size_t dim, std::size_t rows_per_sample,
       const std::vector<std::size_t>& shared_widths, const std::vector<std::size_t>& fc_widths,
       std::mt19937_64& rng);

  Mat forward(const ParamStore& p, const Mat& x, std::any& cache) const override;
  Mat backward(const ParamStore& p, const std::any& cache, const Mat& dy, ParamStore& grad) const override;

  /// Per-sample transforms, batch x (d*d), row-major.
  Mat transforms(const ParamStore& p, const Mat& x) const;
  std::size_t dim() const { return dim_; }

 private:
  Mat regress(const ParamStore& p, const Mat& x, std::any& cache) const;

  std::size_t dim_;
  std::size_t rows_;
  Sequential net_;
};

}  // namespace radarpose::nn
