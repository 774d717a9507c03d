#include "sad/nn/network.hpp"

#include <cmath>
#include <string>

#include "sad/core/error.hpp"

namespace sad::nn {

namespace {

template <typename S>
void add_tensor(std::vector<Tensor<S>>& out, std::string name, int rows, int cols) {
  out.push_back(Tensor<S>{std::move(name), Matrix<S>::Zero(rows, cols)});
}

template <typename S>
S sigmoid(S x) {
  return S(1) / (S(1) + std::exp(-x));
}

}  // namespace

template <typename S>
NetworkParams<S>::NetworkParams(const NetworkShape& shape) : shape_(shape) {
  if (shape.input_dim <= 0 || shape.hidden_dim <= 0 || shape.lstm_layers < 1 || shape.num_actions <= 0) {
    throw ShapeError("network shape needs positive sizes");
  }
  if (shape.aux_head && shape.hand_size <= 0) throw ShapeError("aux head needs a hand size");
  const int h = shape.hidden_dim;
  add_tensor(tensors_, "fc.w", h, shape.input_dim);
  add_tensor(tensors_, "fc.b", h, 1);
  for (int l = 0; l < shape.lstm_layers; ++l) {
    const std::string p = "lstm" + std::to_string(l);
    add_tensor(tensors_, p + ".wx", 4 * h, h);
    add_tensor(tensors_, p + ".wh", 4 * h, h);
    add_tensor(tensors_, p + ".b", 4 * h, 1);
  }
  head_ = static_cast<int>(tensors_.size());
  add_tensor(tensors_, "value.w", 1, h);
  add_tensor(tensors_, "value.b", 1, 1);
  add_tensor(tensors_, "adv.w", shape.num_actions, h);
  add_tensor(tensors_, "adv.b", shape.num_actions, 1);
  if (shape.aux_head) {
    add_tensor(tensors_, "aux.w", shape.aux_dim(), h);
    add_tensor(tensors_, "aux.b", shape.aux_dim(), 1);
  }
}

template <typename S>
NetworkParams<S> NetworkParams<S>::init(const NetworkShape& shape, RngStream& rng) {
  NetworkParams p(shape);
  auto fill = [&](Matrix<S>& m, int fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = static_cast<S>((2.0 * rng.uniform() - 1.0) * bound);
    }
  };
  // Each bias shares its weight's fan-in; tensors come in (w, b) pairs except
  // for the LSTM's (wx, wh, b) triple.
  fill(p.fc_w(), shape.input_dim);
  fill(p.fc_b(), shape.input_dim);
  for (int l = 0; l < shape.lstm_layers; ++l) {
    fill(p.lstm_wx(l), shape.hidden_dim);
    fill(p.lstm_wh(l), shape.hidden_dim);
    fill(p.lstm_b(l), shape.hidden_dim);
  }
  fill(p.value_w(), shape.hidden_dim);
  fill(p.value_b(), shape.hidden_dim);
  fill(p.adv_w(), shape.hidden_dim);
  fill(p.adv_b(), shape.hidden_dim);
  if (shape.aux_head) {
    fill(p.aux_w(), shape.hidden_dim);
    fill(p.aux_b(), shape.hidden_dim);
  }
  return p;
}

template <typename S>
std::size_t NetworkParams<S>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& t : tensors_) n += static_cast<std::size_t>(t.value.size());
  return n;
}

template <typename S>
void NetworkParams<S>::set_zero() {
  for (auto& t : tensors_) t.value.setZero();
}

template <typename S>
template <typename T>
NetworkParams<T> NetworkParams<S>::cast() const {
  NetworkParams<T> out;
  out.shape_ = shape_;
  out.head_ = head_;
  for (const auto& t : tensors_) out.tensors_.push_back(Tensor<T>{t.name, t.value.template cast<T>()});
  return out;
}

template <typename S>
RecurrentState<S> RecurrentState<S>::zeros(const NetworkShape& shape, int batch) {
  RecurrentState s;
  for (int l = 0; l < shape.lstm_layers; ++l) {
    s.hidden.push_back(Matrix<S>::Zero(shape.hidden_dim, batch));
    s.cell.push_back(Matrix<S>::Zero(shape.hidden_dim, batch));
  }
  return s;
}

template <typename S>
Matrix<S> dueling_combine(const Matrix<S>& value, const Matrix<S>& advantage) {
  if (value.rows() != 1 || value.cols() != advantage.cols()) throw ShapeError("dueling: shape mismatch");
  Matrix<S> q = advantage;
  const Eigen::Matrix<S, 1, Eigen::Dynamic> shift = value - advantage.colwise().mean();
  q.rowwise() += shift;
  return q;
}

template <typename S>
ForwardOutput<S> forward(const NetworkParams<S>& params, const Matrix<S>& obs, int steps,
                         const RecurrentState<S>& initial, ForwardCache<S>* cache) {
  const auto& shape = params.shape();
  const int h = shape.hidden_dim;
  if (steps <= 0) throw ShapeError("forward: steps must be positive");
  if (obs.rows() != shape.input_dim) {
    throw ShapeError("forward: observation dim " + std::to_string(obs.rows()) + " != network input " +
                     std::to_string(shape.input_dim));
  }
  if (obs.cols() % steps != 0) throw ShapeError("forward: columns not divisible by steps");
  const int batch = static_cast<int>(obs.cols() / steps);
  if (static_cast<int>(initial.hidden.size()) != shape.lstm_layers || initial.batch() != batch) {
    throw ShapeError("forward: recurrent state does not match batch");
  }

  Matrix<S> x = ((params.fc_w() * obs).colwise() + params.fc_b().col(0)).cwiseMax(S(0));

  ForwardOutput<S> out;
  if (cache) {
    *cache = ForwardCache<S>{};
    cache->steps = steps;
    cache->batch = batch;
    cache->input = obs;
    cache->fc_out = x;
  }

  for (int l = 0; l < shape.lstm_layers; ++l) {
    Matrix<S> pre = (params.lstm_wx(l) * x).colwise() + params.lstm_b(l).col(0);
    Matrix<S> hs(h, x.cols()), cs(h, x.cols()), tcs(h, x.cols());
    Matrix<S> h_prev = initial.hidden[l];
    Matrix<S> c_prev = initial.cell[l];
    for (int t = 0; t < steps; ++t) {
      auto z = pre.middleCols(static_cast<Eigen::Index>(t) * batch, batch);
      z.noalias() += params.lstm_wh(l) * h_prev;
      z.topRows(2 * h) = z.topRows(2 * h).unaryExpr([](S v) { return sigmoid(v); });
      z.middleRows(2 * h, h) = z.middleRows(2 * h, h).array().tanh().matrix();
      z.bottomRows(h) = z.bottomRows(h).unaryExpr([](S v) { return sigmoid(v); });
      Matrix<S> c = z.middleRows(h, h).cwiseProduct(c_prev) + z.topRows(h).cwiseProduct(z.middleRows(2 * h, h));
      Matrix<S> tc = c.array().tanh().matrix();
      Matrix<S> hn = z.bottomRows(h).cwiseProduct(tc);
      cs.middleCols(static_cast<Eigen::Index>(t) * batch, batch) = c;
      tcs.middleCols(static_cast<Eigen::Index>(t) * batch, batch) = tc;
      hs.middleCols(static_cast<Eigen::Index>(t) * batch, batch) = hn;
      h_prev = std::move(hn);
      c_prev = std::move(c);
    }
    out.final_state.hidden.push_back(h_prev);
    out.final_state.cell.push_back(c_prev);
    if (cache) {
      cache->layer_input_h0.push_back(initial.hidden[l]);
      cache->layer_c0.push_back(initial.cell[l]);
      cache->gates.push_back(std::move(pre));
      cache->cells.push_back(std::move(cs));
      cache->tanh_cells.push_back(std::move(tcs));
      cache->hidden.push_back(hs);
    }
    x = std::move(hs);
  }

  Matrix<S> value = (params.value_w() * x).colwise() + params.value_b().col(0);
  Matrix<S> adv = (params.adv_w() * x).colwise() + params.adv_b().col(0);
  out.q = dueling_combine<S>(value, adv);
  if (shape.aux_head) out.aux_logits = (params.aux_w() * x).colwise() + params.aux_b().col(0);
  if (!out.q.allFinite() || !out.aux_logits.allFinite()) throw NumericError("forward: non-finite output");
  if (cache) cache->valid = true;
  return out;
}

template <typename S>
NetworkParams<S> backward(const NetworkParams<S>& params, const ForwardCache<S>& cache,
                          const Matrix<S>& d_q, const Matrix<S>& d_aux) {
  if (!cache.valid) throw DomainError("backward called before forward");
  const auto& shape = params.shape();
  const int h = shape.hidden_dim;
  const int steps = cache.steps;
  const int batch = cache.batch;
  const Eigen::Index cols = static_cast<Eigen::Index>(steps) * batch;
  if (d_q.rows() != shape.num_actions || d_q.cols() != cols) throw ShapeError("backward: dQ shape mismatch");
  const bool use_aux = shape.aux_head && d_aux.size() > 0;
  if (use_aux && (d_aux.rows() != shape.aux_dim() || d_aux.cols() != cols)) {
    throw ShapeError("backward: dAux shape mismatch");
  }

  NetworkParams<S> g(shape);
  const Matrix<S>& top = cache.hidden.back();

  // dueling: dA_k = dQ_k - mean_j dQ_j, dV = sum_j dQ_j
  Matrix<S> d_adv = d_q;
  const Eigen::Matrix<S, 1, Eigen::Dynamic> dq_mean = d_q.colwise().mean();
  d_adv.rowwise() -= dq_mean;
  const Matrix<S> d_value = d_q.colwise().sum();

  g.value_w().noalias() = d_value * top.transpose();
  g.value_b() = d_value.rowwise().sum();
  g.adv_w().noalias() = d_adv * top.transpose();
  g.adv_b() = d_adv.rowwise().sum();
  Matrix<S> d_h = params.value_w().transpose() * d_value;
  d_h.noalias() += params.adv_w().transpose() * d_adv;
  if (use_aux) {
    g.aux_w().noalias() = d_aux * top.transpose();
    g.aux_b() = d_aux.rowwise().sum();
    d_h.noalias() += params.aux_w().transpose() * d_aux;
  }

  for (int l = shape.lstm_layers - 1; l >= 0; --l) {
    const Matrix<S>& gates = cache.gates[l];
    const Matrix<S>& cells = cache.cells[l];
    const Matrix<S>& tcs = cache.tanh_cells[l];
    const Matrix<S>& hs = cache.hidden[l];
    const Matrix<S>& layer_in = l == 0 ? cache.fc_out : cache.hidden[l - 1];

    Matrix<S> d_z(4 * h, cols);
    Matrix<S> dh_next = Matrix<S>::Zero(h, batch);
    Matrix<S> dc_next = Matrix<S>::Zero(h, batch);
    Matrix<S> h_prev_all(h, cols);
    for (int t = steps - 1; t >= 0; --t) {
      const Eigen::Index c0 = static_cast<Eigen::Index>(t) * batch;
      const auto gt = gates.middleCols(c0, batch);
      const auto i_g = gt.topRows(h).array();
      const auto f_g = gt.middleRows(h, h).array();
      const auto g_g = gt.middleRows(2 * h, h).array();
      const auto o_g = gt.bottomRows(h).array();
      const auto tc = tcs.middleCols(c0, batch).array();
      const Matrix<S> c_prev = t == 0 ? cache.layer_c0[l] : Matrix<S>(cells.middleCols(c0 - batch, batch));
      if (t == 0) {
        h_prev_all.middleCols(c0, batch) = cache.layer_input_h0[l];
      } else {
        h_prev_all.middleCols(c0, batch) = hs.middleCols(c0 - batch, batch);
      }

      const Eigen::Array<S, Eigen::Dynamic, Eigen::Dynamic> dh = d_h.middleCols(c0, batch).array() + dh_next.array();
      const Eigen::Array<S, Eigen::Dynamic, Eigen::Dynamic> dc = dh * o_g * (S(1) - tc * tc) + dc_next.array();
      auto dz = d_z.middleCols(c0, batch);
      dz.topRows(h) = (dc * g_g * i_g * (S(1) - i_g)).matrix();
      dz.middleRows(h, h) = (dc * c_prev.array() * f_g * (S(1) - f_g)).matrix();
      dz.middleRows(2 * h, h) = (dc * i_g * (S(1) - g_g * g_g)).matrix();
      dz.bottomRows(h) = (dh * tc * o_g * (S(1) - o_g)).matrix();
      dc_next = (dc * f_g).matrix();
      dh_next.noalias() = params.lstm_wh(l).transpose() * dz;
    }
    g.lstm_wx(l).noalias() = d_z * layer_in.transpose();
    g.lstm_wh(l).noalias() = d_z * h_prev_all.transpose();
    g.lstm_b(l) = d_z.rowwise().sum();
    d_h = params.lstm_wx(l).transpose() * d_z;
  }

  // ReLU: fc_out > 0 where the pre-activation was positive
  const Matrix<S> d_pre = (cache.fc_out.array() > S(0)).select(d_h, Matrix<S>::Zero(h, cols));
  g.fc_w().noalias() = d_pre * cache.input.transpose();
  g.fc_b() = d_pre.rowwise().sum();
  return g;
}

template <typename S>
double global_norm(const NetworkParams<S>& grads) {
  double sq = 0.0;
  for (const auto& t : grads.tensors()) sq += static_cast<double>(t.value.squaredNorm());
  return std::sqrt(sq);
}

template <typename S>
double clip_global_norm(NetworkParams<S>& grads, double max_norm) {
  const double norm = global_norm(grads);
  if (max_norm > 0.0 && norm > max_norm) {
    const S scale = static_cast<S>(max_norm / norm);
    for (auto& t : grads.tensors()) t.value *= scale;
  }
  return norm;
}

#define SAD_INSTANTIATE(S)                                                                         \
  template class NetworkParams<S>;                                                                 \
  template struct RecurrentState<S>;                                                               \
  template ForwardOutput<S> forward<S>(const NetworkParams<S>&, const Matrix<S>&, int,            \
                                       const RecurrentState<S>&, ForwardCache<S>*);                \
  template NetworkParams<S> backward<S>(const NetworkParams<S>&, const ForwardCache<S>&,          \
                                        const Matrix<S>&, const Matrix<S>&);                       \
  template Matrix<S> dueling_combine<S>(const Matrix<S>&, const Matrix<S>&);                       \
  template double global_norm<S>(const NetworkParams<S>&);                                         \
  template double clip_global_norm<S>(NetworkParams<S>&, double);

SAD_INSTANTIATE(float)
SAD_INSTANTIATE(double)
#undef SAD_INSTANTIATE

template NetworkParams<double> NetworkParams<float>::cast<double>() const;
template NetworkParams<float> NetworkParams<double>::cast<float>() const;
template NetworkParams<float> NetworkParams<float>::cast<float>() const;
template NetworkParams<double> NetworkParams<double>::cast<double>() const;

}  // namespace sad::nn
