#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "sad/core/rng.hpp"

namespace sad::nn {

template <typename S>
using Matrix = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

// Sizes of the recurrent dueling network: FC(input -> hidden) + ReLU, a stack
// of LSTM layers (hidden -> hidden), then value, advantage and optional
// auxiliary heads on the top LSTM output.
struct NetworkShape {
  int input_dim = 0;
  int hidden_dim = 512;
  int lstm_layers = 2;
  int num_actions = 0;
  int hand_size = 0;
  bool aux_head = false;

  int aux_dim() const { return aux_head ? 3 * hand_size : 0; }
  friend bool operator==(const NetworkShape&, const NetworkShape&) = default;
};

template <typename S>
struct Tensor {
  std::string name;
  Matrix<S> value;
};

// Named parameter tensors in a fixed order. Biases are column vectors.
template <typename S>
class NetworkParams {
 public:
  NetworkParams() = default;
  // All tensors zero-filled.
  explicit NetworkParams(const NetworkShape& shape);
  // Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and biases.
  static NetworkParams init(const NetworkShape& shape, RngStream& rng);

  const NetworkShape& shape() const { return shape_; }
  std::vector<Tensor<S>>& tensors() { return tensors_; }
  const std::vector<Tensor<S>>& tensors() const { return tensors_; }
  std::size_t parameter_count() const;

  Matrix<S>& fc_w() { return tensors_[0].value; }
  Matrix<S>& fc_b() { return tensors_[1].value; }
  Matrix<S>& lstm_wx(int l) { return tensors_[2 + 3 * l].value; }
  Matrix<S>& lstm_wh(int l) { return tensors_[3 + 3 * l].value; }
  Matrix<S>& lstm_b(int l) { return tensors_[4 + 3 * l].value; }
  Matrix<S>& value_w() { return tensors_[head_ + 0].value; }
  Matrix<S>& value_b() { return tensors_[head_ + 1].value; }
  Matrix<S>& adv_w() { return tensors_[head_ + 2].value; }
  Matrix<S>& adv_b() { return tensors_[head_ + 3].value; }
  Matrix<S>& aux_w() { return tensors_[head_ + 4].value; }
  Matrix<S>& aux_b() { return tensors_[head_ + 5].value; }

  const Matrix<S>& fc_w() const { return tensors_[0].value; }
  const Matrix<S>& fc_b() const { return tensors_[1].value; }
  const Matrix<S>& lstm_wx(int l) const { return tensors_[2 + 3 * l].value; }
  const Matrix<S>& lstm_wh(int l) const { return tensors_[3 + 3 * l].value; }
  const Matrix<S>& lstm_b(int l) const { return tensors_[4 + 3 * l].value; }
  const Matrix<S>& value_w() const { return tensors_[head_ + 0].value; }
  const Matrix<S>& value_b() const { return tensors_[head_ + 1].value; }
  const Matrix<S>& adv_w() const { return tensors_[head_ + 2].value; }
  const Matrix<S>& adv_b() const { return tensors_[head_ + 3].value; }
  const Matrix<S>& aux_w() const { return tensors_[head_ + 4].value; }
  const Matrix<S>& aux_b() const { return tensors_[head_ + 5].value; }

  void set_zero();
  template <typename T>
  NetworkParams<T> cast() const;

 private:
  template <typename>
  friend class NetworkParams;

  NetworkShape shape_;
  std::vector<Tensor<S>> tensors_;
  int head_ = 0;
};

// Per LSTM layer hidden and cell state, hidden_dim x batch.
template <typename S>
struct RecurrentState {
  std::vector<Matrix<S>> hidden;
  std::vector<Matrix<S>> cell;

  static RecurrentState zeros(const NetworkShape& shape, int batch);
  int batch() const { return hidden.empty() ? 0 : static_cast<int>(hidden[0].cols()); }
};

// Activations kept by forward() for backward().
template <typename S>
struct ForwardCache {
  bool valid = false;
  int steps = 0;
  int batch = 0;
  Matrix<S> input;
  Matrix<S> fc_out;
  std::vector<Matrix<S>> layer_input_h0;  // initial hidden per layer
  std::vector<Matrix<S>> layer_c0;
  std::vector<Matrix<S>> gates;   // 4H x TB, activated, order i f g o
  std::vector<Matrix<S>> cells;   // H x TB
  std::vector<Matrix<S>> tanh_cells;
  std::vector<Matrix<S>> hidden;  // H x TB
};

template <typename S>
struct ForwardOutput {
  Matrix<S> q;           // num_actions x TB
  Matrix<S> aux_logits;  // aux_dim x TB (empty without aux head)
  RecurrentState<S> final_state;
};

// Runs `steps` timesteps. Column t * batch + b of `obs` is the input of
// sequence b at step t. Q = V + A - mean(A); legality masking is left to the
// caller. Throws ShapeError on mismatched sizes and NumericError when an
// output is not finite.
template <typename S>
ForwardOutput<S> forward(const NetworkParams<S>& params, const Matrix<S>& obs, int steps,
                         const RecurrentState<S>& initial, ForwardCache<S>* cache = nullptr);

// Reverse-mode gradients of a scalar loss given dLoss/dQ and dLoss/dAux for
// every column of the recorded forward pass. d_aux may be empty. Throws
// DomainError when the cache holds no forward pass.
template <typename S>
NetworkParams<S> backward(const NetworkParams<S>& params, const ForwardCache<S>& cache,
                          const Matrix<S>& d_q, const Matrix<S>& d_aux);

// Dueling combination, exposed for tests.
template <typename S>
Matrix<S> dueling_combine(const Matrix<S>& value, const Matrix<S>& advantage);

// Global L2 norm of all gradient tensors.
template <typename S>
double global_norm(const NetworkParams<S>& grads);

// Rescales so the global norm is at most max_norm; returns the norm before.
template <typename S>
double clip_global_norm(NetworkParams<S>& grads, double max_norm);

}  // namespace sad::nn
