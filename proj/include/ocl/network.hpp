#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ocl/matrix.hpp"
#include "ocl/rng.hpp"

namespace ocl {

enum class Activation { identity, relu };

/// Fully-connected layer. The bias is folded into the weight matrix via a
/// homogeneous coordinate: weights have shape (d_out, d_in + 1) and forward
/// always appends 1.0 to the incoming activations before the product.
struct DenseLayer {
  Matrix weights;  // (d_out, d_in + 1)
  Activation activation = Activation::identity;

  std::size_t input_dim() const { return weights.cols() - 1; }
  std::size_t output_dim() const { return weights.rows(); }
};

/// Per-layer quantities captured by a forward/backward pair: the homogeneous
/// input activations and the loss gradient w.r.t. the layer's pre-activation
/// outputs. A cache is filled exactly once and may be consumed (by a
/// curvature-factor update) exactly once.
struct LayerCache {
  Matrix input_h;    // batch x (d_in + 1)
  Matrix preact;     // batch x d_out
  Matrix outgrad_g;  // batch x d_out, filled by backward
  bool complete = false;
  bool consumed = false;
};

class Network {
 public:
  Network() = default;
  explicit Network(std::vector<DenseLayer> layers);

  /// Uniform init in [-s, s], s = sqrt(6 / (d_in + d_out)), drawn from rng
  /// in layer order, row-major. Hidden layers use relu, the last layer is
  /// linear. dims lists layer widths including input and output.
  static Network glorot(const std::vector<std::size_t>& dims, Rng& rng);

  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& layers() { return layers_; }

  std::size_t input_dim() const { return layers_.front().input_dim(); }
  std::size_t output_dim() const { return layers_.back().output_dim(); }

  /// Width of the penultimate activations (the features the nearest-mean
  /// classifier operates on). Equals input_dim() for a single-layer net.
  std::size_t feature_dim() const;

 private:
  std::vector<DenseLayer> layers_;
};

struct ForwardResult {
  Matrix logits;    // batch x C
  Matrix features;  // batch x feature_dim (penultimate activations)
  std::vector<LayerCache> caches;
};

ForwardResult forward(const Network& net, const Matrix& x);

struct LossOutput {
  double loss = 0.0;
  Matrix dlogits;  // gradient of the mean loss w.r.t. the logits
};

/// Mean cross entropy over the batch; dlogits = (softmax - onehot) / batch.
LossOutput cross_entropy(const Matrix& logits, const std::vector<int>& labels);

/// Backpropagate dlogits through the network. Fills outgrad_g in each cache
/// and returns per-layer weight gradients: grads[l] = g^T * h (the batch
/// scaling is already inside dlogits).
std::vector<Matrix> backward(const Network& net, std::vector<LayerCache>& caches,
                             const Matrix& dlogits);

/// Row-wise index of the Euclidean-nearest prototype; ties break toward the
/// lowest row index.
std::vector<int> nearest_mean_predict(const Matrix& features, const Matrix& prototypes);

std::vector<int> argmax_rows(const Matrix& logits);

/// Checkpoint I/O: "OCLW" magic, version byte, then layer shapes and
/// row-major little-endian 64-bit weights.
void save_network(const Network& net, const std::string& path);
Network load_network(const std::string& path);

}  // namespace ocl
