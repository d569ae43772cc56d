#pragma once

#include <cstddef>
#include <vector>

#include "ocl/matrix.hpp"
#include "ocl/network.hpp"

namespace ocl {

struct SgdConfig {
  double learning_rate = 0.1;
};

struct KfacConfig {
  double learning_rate = 0.1;
  double damping = 1.0;   // Tikhonov coefficient, split across factors via pi
  double ema_decay = 0.9; // running-average coefficient for the factors
};

/// Per-layer curvature state: running second moments of the homogeneous
/// input activations (A) and of the pre-activation gradients (B), their
/// damped inverses, and the trace-balanced damping split coefficient pi.
struct KfacLayerState {
  Matrix a_ema;         // (d_in+1) x (d_in+1)
  Matrix b_ema;         // d_out x d_out
  Matrix a_damped_inv;
  Matrix b_damped_inv;
  double pi = 1.0;
  std::size_t step_count = 0;
};

/// w <- w - alpha * grad, per layer.
void sgd_step(Network& net, const std::vector<Matrix>& grads, const SgdConfig& cfg);

/// Fold one batch into the factor running averages: A is the batch second
/// moment of the homogeneous inputs, B the batch second moment of the
/// per-sample pre-activation gradients (the mean-loss scaling inside the
/// cache is undone). The first update assigns directly instead of decaying
/// a zero initialization. Consumes the cache (a second call on the same
/// cache throws CacheMissing).
void update_factors(KfacLayerState& state, LayerCache& cache, const KfacConfig& cfg);

/// pi = sqrt((tr(A)/dim(A)) / (tr(B)/dim(B))); falls back to 1 when either
/// trace underflows (all-zero activations or gradients).
double compute_pi(const KfacLayerState& state);

/// Refresh pi and the damped inverses:
///   A_inv = (A + pi*sqrt(damping)*I)^-1, B_inv = (B + sqrt(damping)/pi*I)^-1.
/// NotPositiveDefinite propagates when the damping is too small.
void damp_and_invert(KfacLayerState& state, double damping);

/// Preconditioned step: per layer w <- w - alpha * B_inv * G * A_inv.
/// This is the Kronecker-factored inverse applied to the input-major
/// flattening of G (see vec_input_major).
void kfac_step(Network& net, const std::vector<Matrix>& grads,
               const std::vector<KfacLayerState>& states, const KfacConfig& cfg);

/// Test oracle: per layer, the exact average over the batch of outer
/// products of flattened per-sample loss gradients. Guarded to tiny layers
/// (<= 200 parameters each).
std::vector<Matrix> exact_empirical_fim(const Network& net, const Matrix& x,
                                        const std::vector<int>& labels);

/// Value of the local quadratic model 0.5*d^T F d + g^T d + loss_now with F
/// the damped Kronecker approximation held by the states. Diagnostic only.
double quadratic_model_value(const std::vector<Matrix>& grads,
                             const std::vector<KfacLayerState>& states,
                             const std::vector<Matrix>& delta, double loss_now,
                             double damping);

// Flattening convention shared by the Fisher oracle, the dense-solve
// equivalence check and the gradient-vector methods: per layer, the weight
// matrix (d_out x d_in+1) is read column by column, so index = col*d_out+row
// and the layer Fisher block is kron(A, B).
Matrix vec_input_major(const Matrix& g);
std::vector<double> flatten_grads(const std::vector<Matrix>& grads);
std::vector<Matrix> unflatten_grads(const std::vector<double>& flat,
                                    const std::vector<Matrix>& shaped_like);

/// Flattened gradient of the mean cross entropy of (x, labels) at net.
std::vector<double> flat_gradient(const Network& net, const Matrix& x,
                                  const std::vector<int>& labels);

}  // namespace ocl
