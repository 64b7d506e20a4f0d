#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "radarpose/model.hpp"

namespace radarpose {

struct TrainHyper {
  double lr = 1e-3;
  double lr_decay = 1.0;  // learning rate is lr * lr_decay^epoch
  std::size_t batch = 32;
  std::size_t epochs = 30;
  std::uint64_t seed = 0;
  double val_fraction = 0.2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;

  void validate() const;
};

struct EpochLoss {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;  // NaN when there is no validation split

  bool operator==(const EpochLoss&) const = default;
};

struct TrainResult {
  ModelParams params;
  std::vector<EpochLoss> history;
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> val_indices;
};

/// Adam update over one ParamStore.
class Adam {
 public:
  Adam(const nn::ParamStore& like, const TrainHyper& hyper);
  void step(nn::ParamStore& params, const nn::ParamStore& grad);
  void set_lr(double lr) { hyper_.lr = lr; }

 private:
  TrainHyper hyper_;
  nn::ParamStore m_;
  nn::ParamStore v_;
  std::uint64_t t_ = 0;
};

/// Splits `n` indices into (train, val) with a seeded shuffle.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(std::size_t n, double val_fraction,
                                                                            std::uint64_t seed);

/// Trains on frames whose SNR is already normalized with `snr`. Ground
/// truth is normalized per axis over the training split. The same
/// (cfg, frames, hyper) always gives the same history and parameters.
/// Throws std::invalid_argument on an empty dataset.
TrainResult train(const ModelConfig& cfg, std::span<const FusedFrame> frames, const TrainHyper& hyper,
                  const SnrScaler& snr, const std::function<void(const EpochLoss&)>& on_epoch = {});

/// Mean MSE of `params` over frames in normalized space.
double dataset_loss(const PoseNetwork& net, const ModelParams& params, std::span<const FusedFrame> frames,
                    std::size_t batch = 64);

}  // namespace radarpose
