#include "sad/nn/adam.hpp"

#include <cmath>

#include "sad/core/error.hpp"

namespace sad::nn {

template <typename S>
Adam<S>::Adam(const NetworkShape& shape, AdamConfig config) : config_(config), m_(shape), v_(shape) {}

template <typename S>
void Adam<S>::step(NetworkParams<S>& params, const NetworkParams<S>& grads) {
  auto& p = params.tensors();
  const auto& g = grads.tensors();
  if (p.size() != g.size() || p.size() != m_.tensors().size()) throw ShapeError("adam: tensor count mismatch");
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i].value.rows() != g[i].value.rows() || p[i].value.cols() != g[i].value.cols()) {
      throw ShapeError("adam: shape mismatch on " + p[i].name);
    }
    if (!g[i].value.allFinite()) throw NumericError("adam: non-finite gradient in " + g[i].name);
  }
  ++t_;
  const double b1 = config_.beta1, b2 = config_.beta2;
  const S c1 = static_cast<S>(1.0 - std::pow(b1, static_cast<double>(t_)));
  const S c2 = static_cast<S>(1.0 - std::pow(b2, static_cast<double>(t_)));
  const S lr = static_cast<S>(config_.lr);
  const S eps = static_cast<S>(config_.eps);
  for (std::size_t i = 0; i < p.size(); ++i) {
    auto& m = m_.tensors()[i].value;
    auto& v = v_.tensors()[i].value;
    m = static_cast<S>(b1) * m + static_cast<S>(1.0 - b1) * g[i].value;
    v = static_cast<S>(b2) * v + static_cast<S>(1.0 - b2) * g[i].value.cwiseAbs2();
    p[i].value.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
  }
}

template class Adam<float>;
template class Adam<double>;

}  // namespace sad::nn
