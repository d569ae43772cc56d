#include "ocl/network.hpp"

#include <cmath>
#include <string>

#include "ocl/errors.hpp"
#include "ocl/linalg.hpp"
#include "wire.hpp"

namespace ocl {

Network::Network(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw ShapeMismatch("network needs at least one layer");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    if (layers_[l].weights.cols() < 2) {
      throw ShapeMismatch("layer " + std::to_string(l) + " has no input columns");
    }
    if (l > 0 && layers_[l].input_dim() != layers_[l - 1].output_dim()) {
      throw ShapeMismatch("layer " + std::to_string(l) + " input dim " +
                          std::to_string(layers_[l].input_dim()) +
                          " does not match previous output dim " +
                          std::to_string(layers_[l - 1].output_dim()));
    }
  }
}

Network Network::glorot(const std::vector<std::size_t>& dims, Rng& rng) {
  if (dims.size() < 2) throw ShapeMismatch("glorot: need at least input and output widths");
  std::vector<DenseLayer> layers;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const std::size_t d_in = dims[l];
    const std::size_t d_out = dims[l + 1];
    const double s = std::sqrt(6.0 / static_cast<double>(d_in + d_out));
    DenseLayer layer;
    layer.weights = Matrix(d_out, d_in + 1);
    for (double& w : layer.weights.data()) w = rng.uniform(-s, s);
    layer.activation = (l + 2 < dims.size()) ? Activation::relu : Activation::identity;
    layers.push_back(std::move(layer));
  }
  return Network(std::move(layers));
}

std::size_t Network::feature_dim() const {
  return layers_.size() >= 2 ? layers_[layers_.size() - 2].output_dim()
                             : layers_.front().input_dim();
}

namespace {

Matrix append_ones_column(const Matrix& x) {
  Matrix h(x.rows(), x.cols() + 1);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    double* out = h.row_ptr(r);
    const double* in = x.row_ptr(r);
    for (std::size_t c = 0; c < x.cols(); ++c) out[c] = in[c];
    out[x.cols()] = 1.0;
  }
  return h;
}

Matrix apply_activation(const Matrix& z, Activation act) {
  if (act == Activation::identity) return z;
  Matrix a = z;
  for (double& v : a.data()) v = v > 0.0 ? v : 0.0;
  return a;
}

}  // namespace

ForwardResult forward(const Network& net, const Matrix& x) {
  if (x.cols() != net.input_dim()) {
    throw ShapeMismatch("forward: input has " + std::to_string(x.cols()) +
                        " columns, network expects " + std::to_string(net.input_dim()));
  }
  ForwardResult out;
  out.caches.resize(net.layers().size());
  Matrix cur = x;
  for (std::size_t l = 0; l < net.layers().size(); ++l) {
    const DenseLayer& layer = net.layers()[l];
    if (l + 1 == net.layers().size()) out.features = cur;
    Matrix h = append_ones_column(cur);
    Matrix z = matmul_a_bt(h, layer.weights);
    out.caches[l].input_h = std::move(h);
    out.caches[l].preact = z;
    cur = apply_activation(z, layer.activation);
  }
  out.logits = std::move(cur);
  return out;
}

LossOutput cross_entropy(const Matrix& logits, const std::vector<int>& labels) {
  if (labels.size() != logits.rows()) {
    throw ShapeMismatch("cross_entropy: " + std::to_string(labels.size()) +
                        " labels for " + std::to_string(logits.rows()) + " rows");
  }
  const std::size_t batch = logits.rows();
  const std::size_t classes = logits.cols();
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= classes) {
      throw LabelOutOfRange("cross_entropy: label " + std::to_string(y) +
                            " outside [0, " + std::to_string(classes) + ")");
    }
  }
  LossOutput out;
  out.dlogits = Matrix(batch, classes);
  const double inv_batch = 1.0 / static_cast<double>(batch);
  double loss = 0.0;
  for (std::size_t s = 0; s < batch; ++s) {
    const double* row = logits.row_ptr(s);
    double m = row[0];
    for (std::size_t j = 1; j < classes; ++j) m = std::max(m, row[j]);
    double sum = 0.0;
    for (std::size_t j = 0; j < classes; ++j) sum += std::exp(row[j] - m);
    const double lse = m + std::log(sum);
    loss += lse - row[labels[s]];
    double* d = out.dlogits.row_ptr(s);
    for (std::size_t j = 0; j < classes; ++j) d[j] = std::exp(row[j] - lse) * inv_batch;
    d[labels[s]] -= inv_batch;
  }
  out.loss = loss * inv_batch;
  return out;
}

std::vector<Matrix> backward(const Network& net, std::vector<LayerCache>& caches,
                             const Matrix& dlogits) {
  const auto& layers = net.layers();
  if (caches.size() != layers.size()) {
    throw CacheMissing("backward: cache count does not match layer count");
  }
  for (const LayerCache& c : caches) {
    if (c.input_h.empty()) throw CacheMissing("backward: forward cache not populated");
  }
  if (dlogits.rows() != caches.back().input_h.rows() ||
      dlogits.cols() != layers.back().output_dim()) {
    throw ShapeMismatch("backward: dlogits shape does not match the last layer");
  }

  std::vector<Matrix> grads(layers.size());
  Matrix g = dlogits;
  for (std::size_t l = layers.size(); l-- > 0;) {
    caches[l].outgrad_g = g;
    caches[l].complete = true;
    grads[l] = matmul_at_b(g, caches[l].input_h);
    if (l == 0) break;
    const Matrix dh = matmul(g, layers[l].weights);
    const Matrix& z = caches[l - 1].preact;
    const bool relu = layers[l - 1].activation == Activation::relu;
    Matrix gprev(dh.rows(), dh.cols() - 1);
    for (std::size_t r = 0; r < gprev.rows(); ++r) {
      for (std::size_t c = 0; c < gprev.cols(); ++c) {
        double v = dh(r, c);
        if (relu && !(z(r, c) > 0.0)) v = 0.0;
        gprev(r, c) = v;
      }
    }
    g = std::move(gprev);
  }
  return grads;
}

std::vector<int> nearest_mean_predict(const Matrix& features, const Matrix& prototypes) {
  if (prototypes.rows() == 0) {
    throw EmptyPrototypes("nearest_mean_predict: no prototypes");
  }
  if (features.cols() != prototypes.cols()) {
    throw ShapeMismatch("nearest_mean_predict: feature dim " +
                        std::to_string(features.cols()) + " vs prototype dim " +
                        std::to_string(prototypes.cols()));
  }
  std::vector<int> out(features.rows());
  for (std::size_t r = 0; r < features.rows(); ++r) {
    const double* f = features.row_ptr(r);
    double best = 0.0;
    int best_idx = -1;
    for (std::size_t p = 0; p < prototypes.rows(); ++p) {
      const double* mu = prototypes.row_ptr(p);
      double d = 0.0;
      for (std::size_t c = 0; c < features.cols(); ++c) {
        const double diff = f[c] - mu[c];
        d += diff * diff;
      }
      if (best_idx < 0 || d < best) {  // strict: ties keep the lower index
        best = d;
        best_idx = static_cast<int>(p);
      }
    }
    out[r] = best_idx;
  }
  return out;
}

std::vector<int> argmax_rows(const Matrix& logits) {
  std::vector<int> out(logits.rows());
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    const double* row = logits.row_ptr(r);
    std::size_t best = 0;
    for (std::size_t c = 1; c < logits.cols(); ++c) {
      if (row[c] > row[best]) best = c;
    }
    out[r] = static_cast<int>(best);
  }
  return out;
}

void save_network(const Network& net, const std::string& path) {
  std::string bytes;
  bytes += "OCLW";
  wire::put_u8(bytes, 1);
  wire::put_u32(bytes, static_cast<std::uint32_t>(net.layers().size()));
  for (const DenseLayer& layer : net.layers()) {
    wire::put_u32(bytes, static_cast<std::uint32_t>(layer.weights.rows()));
    wire::put_u32(bytes, static_cast<std::uint32_t>(layer.weights.cols()));
    wire::put_u8(bytes, layer.activation == Activation::relu ? 1 : 0);
  }
  for (const DenseLayer& layer : net.layers()) {
    for (double w : layer.weights.data()) wire::put_f64(bytes, w);
  }
  wire::write_file(path, bytes);
}

Network load_network(const std::string& path) {
  const std::string bytes = wire::read_file(path);
  wire::Reader r(bytes, path);
  r.expect_magic("OCLW");
  const std::uint8_t version = r.u8();
  if (version != 1) throw BadMagic(path + ": unsupported checkpoint version");
  const std::uint32_t n_layers = r.u32();
  if (n_layers == 0) throw TruncatedFile(path + ": checkpoint has no layers");
  std::vector<DenseLayer> layers(n_layers);
  for (auto& layer : layers) {
    const std::uint32_t rows = r.u32();
    const std::uint32_t cols = r.u32();
    const std::uint8_t act = r.u8();
    if (rows == 0 || cols < 2) throw TruncatedFile(path + ": degenerate layer shape");
    layer.weights = Matrix(rows, cols);
    layer.activation = act == 1 ? Activation::relu : Activation::identity;
  }
  for (auto& layer : layers) {
    for (double& w : layer.weights.data()) w = r.f64();
  }
  r.require_end();
  return Network(std::move(layers));
}

}  // namespace ocl
