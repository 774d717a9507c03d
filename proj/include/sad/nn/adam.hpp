#pragma once

#include "sad/nn/network.hpp"

namespace sad::nn {

struct AdamConfig {
  double lr = 6.25e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1.5e-5;
};

// Adam with bias correction. Moments mirror the parameter tensors.
template <typename S>
class Adam {
 public:
  Adam(const NetworkShape& shape, AdamConfig config = {});

  // Throws NumericError (and leaves params untouched) when a gradient is not
  // finite, ShapeError when shapes differ.
  void step(NetworkParams<S>& params, const NetworkParams<S>& grads);

  long steps_taken() const { return t_; }
  const AdamConfig& config() const { return config_; }

 private:
  AdamConfig config_;
  NetworkParams<S> m_;
  NetworkParams<S> v_;
  long t_ = 0;
};

}  // namespace sad::nn
