#include "ocl/optim.hpp"

#include <cmath>
#include <string>

#include "ocl/errors.hpp"
#include "ocl/linalg.hpp"

namespace ocl {

void sgd_step(Network& net, const std::vector<Matrix>& grads, const SgdConfig& cfg) {
  auto& layers = net.layers();
  if (grads.size() != layers.size()) {
    throw ShapeMismatch("sgd_step: gradient count does not match layer count");
  }
  for (std::size_t l = 0; l < layers.size(); ++l) {
    Matrix& w = layers[l].weights;
    if (!grads[l].same_shape(w)) {
      throw ShapeMismatch("sgd_step: gradient shape mismatch at layer " + std::to_string(l));
    }
    for (std::size_t i = 0; i < w.size(); ++i) {
      w.data()[i] -= cfg.learning_rate * grads[l].data()[i];
    }
  }
}

void update_factors(KfacLayerState& state, LayerCache& cache, const KfacConfig& cfg) {
  if (cache.input_h.empty() || !cache.complete) {
    throw CacheMissing("update_factors: cache not populated by a forward/backward pair");
  }
  if (cache.consumed) {
    throw CacheMissing("update_factors: cache already consumed");
  }
  cache.consumed = true;

  const double batch = static_cast<double>(cache.input_h.rows());
  Matrix a_batch = scaled(matmul_at_b(cache.input_h, cache.input_h), 1.0 / batch);
  // outgrad_g carries the mean-loss 1/batch factor; B is the second moment
  // of per-sample gradients, so the scaling is undone here:
  // (batch*g)^T (batch*g) / batch = batch * g^T g.
  Matrix b_batch = scaled(matmul_at_b(cache.outgrad_g, cache.outgrad_g), batch);

  if (state.step_count == 0) {
    state.a_ema = std::move(a_batch);
    state.b_ema = std::move(b_batch);
  } else {
    const double rho = cfg.ema_decay;
    state.a_ema = add(scaled(state.a_ema, rho), scaled(a_batch, 1.0 - rho));
    state.b_ema = add(scaled(state.b_ema, rho), scaled(b_batch, 1.0 - rho));
  }
  state.step_count += 1;
}

double compute_pi(const KfacLayerState& state) {
  const double ta = trace(state.a_ema);
  const double tb = trace(state.b_ema);
  if (ta <= 1e-12 || tb <= 1e-12) return 1.0;  // degenerate factor
  const double da = static_cast<double>(state.a_ema.rows());
  const double db = static_cast<double>(state.b_ema.rows());
  return std::sqrt((ta / da) / (tb / db));
}

void damp_and_invert(KfacLayerState& state, double damping) {
  if (state.step_count == 0) {
    throw StateMissing("damp_and_invert: factors not populated");
  }
  state.pi = compute_pi(state);
  const double sq = std::sqrt(damping);
  Matrix a = state.a_ema;
  add_scaled_identity(a, state.pi * sq);
  Matrix b = state.b_ema;
  add_scaled_identity(b, sq / state.pi);
  state.a_damped_inv = invert_spd(a);
  state.b_damped_inv = invert_spd(b);
}

void kfac_step(Network& net, const std::vector<Matrix>& grads,
               const std::vector<KfacLayerState>& states, const KfacConfig& cfg) {
  auto& layers = net.layers();
  if (grads.size() != layers.size()) {
    throw ShapeMismatch("kfac_step: gradient count does not match layer count");
  }
  if (states.size() != layers.size()) {
    throw StateMissing("kfac_step: state count does not match layer count");
  }
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const KfacLayerState& s = states[l];
    if (s.step_count == 0 || s.a_damped_inv.empty() || s.b_damped_inv.empty()) {
      throw StateMissing("kfac_step: layer " + std::to_string(l) +
                         " state not refreshed this step");
    }
    Matrix& w = layers[l].weights;
    if (!grads[l].same_shape(w)) {
      throw ShapeMismatch("kfac_step: gradient shape mismatch at layer " + std::to_string(l));
    }
    const Matrix precond = matmul(s.b_damped_inv, matmul(grads[l], s.a_damped_inv));
    for (std::size_t i = 0; i < w.size(); ++i) {
      w.data()[i] -= cfg.learning_rate * precond.data()[i];
    }
  }
}

Matrix vec_input_major(const Matrix& g) {
  Matrix v(g.rows() * g.cols(), 1);
  std::size_t k = 0;
  for (std::size_t c = 0; c < g.cols(); ++c) {
    for (std::size_t r = 0; r < g.rows(); ++r) v(k++, 0) = g(r, c);
  }
  return v;
}

std::vector<double> flatten_grads(const std::vector<Matrix>& grads) {
  std::size_t total = 0;
  for (const Matrix& g : grads) total += g.size();
  std::vector<double> out;
  out.reserve(total);
  for (const Matrix& g : grads) {
    for (std::size_t c = 0; c < g.cols(); ++c) {
      for (std::size_t r = 0; r < g.rows(); ++r) out.push_back(g(r, c));
    }
  }
  return out;
}

std::vector<Matrix> unflatten_grads(const std::vector<double>& flat,
                                    const std::vector<Matrix>& shaped_like) {
  std::size_t total = 0;
  for (const Matrix& g : shaped_like) total += g.size();
  if (flat.size() != total) {
    throw ShapeMismatch("unflatten_grads: length " + std::to_string(flat.size()) +
                        " does not match " + std::to_string(total));
  }
  std::vector<Matrix> out;
  out.reserve(shaped_like.size());
  std::size_t k = 0;
  for (const Matrix& shape : shaped_like) {
    Matrix g(shape.rows(), shape.cols());
    for (std::size_t c = 0; c < g.cols(); ++c) {
      for (std::size_t r = 0; r < g.rows(); ++r) g(r, c) = flat[k++];
    }
    out.push_back(std::move(g));
  }
  return out;
}

std::vector<Matrix> exact_empirical_fim(const Network& net, const Matrix& x,
                                        const std::vector<int>& labels) {
  if (x.rows() != labels.size() || x.rows() == 0) {
    throw ShapeMismatch("exact_empirical_fim: batch and label sizes disagree");
  }
  for (const DenseLayer& layer : net.layers()) {
    if (layer.weights.size() > 200) {
      throw TooLarge("exact_empirical_fim: layer has " +
                     std::to_string(layer.weights.size()) +
                     " parameters, oracle limit is 200");
    }
  }
  std::vector<Matrix> fim;
  for (const DenseLayer& layer : net.layers()) {
    fim.emplace_back(layer.weights.size(), layer.weights.size());
  }
  const std::size_t batch = x.rows();
  for (std::size_t s = 0; s < batch; ++s) {
    Matrix xs(1, x.cols());
    xs.set_row(0, x.row(s));
    ForwardResult f = forward(net, xs);
    LossOutput loss = cross_entropy(f.logits, {labels[s]});
    std::vector<Matrix> grads = backward(net, f.caches, loss.dlogits);
    for (std::size_t l = 0; l < grads.size(); ++l) {
      const Matrix v = vec_input_major(grads[l]);
      Matrix& target = fim[l];
      for (std::size_t i = 0; i < v.rows(); ++i) {
        const double vi = v(i, 0);
        for (std::size_t j = 0; j < v.rows(); ++j) {
          target(i, j) += vi * v(j, 0);
        }
      }
    }
  }
  const double inv_batch = 1.0 / static_cast<double>(batch);
  for (Matrix& f : fim) {
    for (double& v : f.data()) v *= inv_batch;
  }
  return fim;
}

double quadratic_model_value(const std::vector<Matrix>& grads,
                             const std::vector<KfacLayerState>& states,
                             const std::vector<Matrix>& delta, double loss_now,
                             double damping) {
  if (grads.size() != delta.size() || grads.size() != states.size()) {
    throw ShapeMismatch("quadratic_model_value: per-layer list sizes disagree");
  }
  double value = loss_now;
  const double sq = std::sqrt(damping);
  for (std::size_t l = 0; l < grads.size(); ++l) {
    if (!grads[l].same_shape(delta[l])) {
      throw ShapeMismatch("quadratic_model_value: delta shape mismatch at layer " +
                          std::to_string(l));
    }
    Matrix a = states[l].a_ema;
    add_scaled_identity(a, states[l].pi * sq);
    Matrix b = states[l].b_ema;
    add_scaled_identity(b, sq / states[l].pi);
    // d^T (A kron B) d with the input-major flattening equals sum(d .* (B d A)).
    const Matrix bda = matmul(b, matmul(delta[l], a));
    double quad = 0.0;
    double lin = 0.0;
    for (std::size_t i = 0; i < delta[l].size(); ++i) {
      quad += delta[l].data()[i] * bda.data()[i];
      lin += grads[l].data()[i] * delta[l].data()[i];
    }
    value += 0.5 * quad + lin;
  }
  return value;
}

std::vector<double> flat_gradient(const Network& net, const Matrix& x,
                                  const std::vector<int>& labels) {
  ForwardResult f = forward(net, x);
  LossOutput loss = cross_entropy(f.logits, labels);
  std::vector<Matrix> grads = backward(net, f.caches, loss.dlogits);
  return flatten_grads(grads);
}

}  // namespace ocl
