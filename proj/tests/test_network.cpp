#include "doctest.h"

#include <cmath>
#include <vector>

#include "ocl/errors.hpp"
#include "ocl/linalg.hpp"
#include "ocl/network.hpp"
#include "test_util.hpp"

using namespace ocl;
using test_util::max_abs_diff;

namespace {

// Straight-line re-evaluation of a 2-layer relu/identity net, written
// independently of the library forward pass.
std::vector<double> straight_line_two_layer(const Network& net, const std::vector<double>& x) {
  const Matrix& w0 = net.layers()[0].weights;
  const Matrix& w1 = net.layers()[1].weights;
  std::vector<double> hidden(w0.rows());
  for (std::size_t j = 0; j < w0.rows(); ++j) {
    double z = w0(j, w0.cols() - 1);  // bias column times the appended 1
    for (std::size_t i = 0; i + 1 < w0.cols(); ++i) z += w0(j, i) * x[i];
    hidden[j] = z > 0.0 ? z : 0.0;
  }
  std::vector<double> out(w1.rows());
  for (std::size_t j = 0; j < w1.rows(); ++j) {
    double z = w1(j, w1.cols() - 1);
    for (std::size_t i = 0; i + 1 < w1.cols(); ++i) z += w1(j, i) * hidden[i];
    out[j] = z;
  }
  return out;
}

double loss_at(const Network& net, const Matrix& x, const std::vector<int>& labels) {
  return cross_entropy(forward(net, x).logits, labels).loss;
}

}  // namespace

TEST_CASE("forward: zero weights give zero logits") {
  Network net({DenseLayer{Matrix(4, 6), Activation::identity}});
  Rng rng(3);
  const Matrix x = test_util::random_matrix(3, 5, rng);
  CHECK(test_util::max_abs(forward(net, x).logits) == 0.0);
}

TEST_CASE("forward: single identity layer is the affine map [x,1]W^T") {
  Rng rng(5);
  Network net = test_util::small_net({3, 4}, 17);
  const Matrix x = test_util::random_matrix(2, 3, rng);
  Matrix h(2, 4);
  for (std::size_t r = 0; r < 2; ++r) {
    for (std::size_t c = 0; c < 3; ++c) h(r, c) = x(r, c);
    h(r, 3) = 1.0;
  }
  CHECK(max_abs_diff(forward(net, x).logits, matmul_a_bt(h, net.layers()[0].weights)) <
        1e-15);
}

TEST_CASE("forward: two-layer net matches a straight-line re-evaluation") {
  Network net = test_util::small_net({4, 5, 3}, 23);
  Rng rng(9);
  const Matrix x = test_util::random_matrix(6, 4, rng);
  const ForwardResult f = forward(net, x);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const std::vector<double> expected = straight_line_two_layer(net, x.row(r));
    for (std::size_t c = 0; c < 3; ++c) {
      CHECK(f.logits(r, c) == doctest::Approx(expected[c]).epsilon(1e-12));
    }
  }
  CHECK(f.features.rows() == x.rows());
  CHECK(f.features.cols() == net.feature_dim());
}

TEST_CASE("forward rejects mismatched input width") {
  Network net = test_util::small_net({4, 3}, 1);
  CHECK_THROWS_AS(forward(net, Matrix(2, 5)), ShapeMismatch);
}

TEST_CASE("cross_entropy: uniform logits give ln(C)") {
  const Matrix logits(3, 7, 0.25);
  const LossOutput out = cross_entropy(logits, {0, 3, 6});
  CHECK(out.loss == doctest::Approx(std::log(7.0)).epsilon(1e-12));
}

TEST_CASE("cross_entropy decreases as the true logit grows") {
  double prev = 1e300;
  for (double l : {0.0, 1.0, 3.0, 10.0, 30.0}) {
    Matrix logits(1, 4);
    logits(0, 2) = l;
    const double loss = cross_entropy(logits, {2}).loss;
    CHECK(loss < prev);
    prev = loss;
  }
  CHECK(prev < 1e-10);
}

TEST_CASE("cross_entropy rejects out-of-range labels") {
  CHECK_THROWS_AS(cross_entropy(Matrix(2, 3), {0, 3}), LabelOutOfRange);
  CHECK_THROWS_AS(cross_entropy(Matrix(2, 3), {-1, 0}), LabelOutOfRange);
}

TEST_CASE("cross_entropy gradient matches finite differences") {
  Rng rng(31);
  Matrix logits = test_util::random_matrix(3, 5, rng);
  const std::vector<int> labels = {1, 4, 0};
  const LossOutput out = cross_entropy(logits, labels);
  const double h = 1e-6;
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    for (std::size_t c = 0; c < logits.cols(); ++c) {
      Matrix lp = logits, lm = logits;
      lp(r, c) += h;
      lm(r, c) -= h;
      const double fd =
          (cross_entropy(lp, labels).loss - cross_entropy(lm, labels).loss) / (2 * h);
      const double an = out.dlogits(r, c);
      CHECK(std::abs(fd - an) <= 1e-6 * std::max({1.0, std::abs(fd), std::abs(an)}));
    }
  }
}

TEST_CASE("cross_entropy gradient rows sum to zero") {
  Rng rng(37);
  const Matrix logits = test_util::random_matrix(4, 6, rng, 2.0);
  const LossOutput out = cross_entropy(logits, {0, 1, 2, 3});
  for (std::size_t r = 0; r < 4; ++r) {
    double sum = 0.0;
    for (std::size_t c = 0; c < 6; ++c) sum += out.dlogits(r, c);
    CHECK(std::abs(sum) < 1e-12);
  }
}

TEST_CASE("backward: zero dlogits give zero gradients") {
  Network net = test_util::small_net({3, 4, 2}, 7);
  Rng rng(2);
  const Matrix x = test_util::random_matrix(2, 3, rng);
  ForwardResult f = forward(net, x);
  const auto grads = backward(net, f.caches, Matrix(2, 2));
  for (const Matrix& g : grads) CHECK(test_util::max_abs(g) == 0.0);
}

TEST_CASE("backward: single linear layer gradient is dlogits^T [x,1]") {
  Network net = test_util::small_net({3, 2}, 11);
  Rng rng(4);
  const Matrix x = test_util::random_matrix(5, 3, rng);
  ForwardResult f = forward(net, x);
  const Matrix dlogits = test_util::random_matrix(5, 2, rng);
  const auto grads = backward(net, f.caches, dlogits);
  CHECK(max_abs_diff(grads[0], matmul_at_b(dlogits, f.caches[0].input_h)) == 0.0);
}

TEST_CASE("backward matches central finite differences on a 2-layer net") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Rng rng(seed * 100 + 3);
    Network net = test_util::small_net({5, 6, 4}, seed);
    const Matrix x = test_util::random_matrix(3, 5, rng);
    const std::vector<int> labels = {static_cast<int>(seed % 4),
                                     static_cast<int>((seed + 1) % 4),
                                     static_cast<int>((seed + 2) % 4)};
    ForwardResult f = forward(net, x);
    const LossOutput loss = cross_entropy(f.logits, labels);
    const auto grads = backward(net, f.caches, loss.dlogits);

    const double h = 1e-5;
    for (std::size_t l = 0; l < net.layers().size(); ++l) {
      for (std::size_t i = 0; i < net.layers()[l].weights.size(); ++i) {
        Network np = net, nm = net;
        np.layers()[l].weights.data()[i] += h;
        nm.layers()[l].weights.data()[i] -= h;
        const double fd = (loss_at(np, x, labels) - loss_at(nm, x, labels)) / (2 * h);
        const double an = grads[l].data()[i];
        CHECK(std::abs(fd - an) <= 1e-4 * std::max(std::abs(fd), std::abs(an)) + 1e-8);
      }
    }
  }
}

TEST_CASE("backward requires populated caches") {
  Network net = test_util::small_net({3, 2}, 1);
  std::vector<LayerCache> caches(1);
  CHECK_THROWS_AS(backward(net, caches, Matrix(2, 2)), CacheMissing);
  std::vector<LayerCache> none;
  CHECK_THROWS_AS(backward(net, none, Matrix(2, 2)), CacheMissing);
}

TEST_CASE("single-sample gradient is the outer product of g and h") {
  Network net = test_util::small_net({4, 3, 2}, 19);
  Rng rng(8);
  const Matrix x = test_util::random_matrix(1, 4, rng);
  ForwardResult f = forward(net, x);
  const LossOutput loss = cross_entropy(f.logits, {1});
  const auto grads = backward(net, f.caches, loss.dlogits);
  for (std::size_t l = 0; l < grads.size(); ++l) {
    const Matrix expected =
        outer(f.caches[l].outgrad_g.row(0), f.caches[l].input_h.row(0));
    CHECK(max_abs_diff(grads[l], expected) == 0.0);
  }
}

TEST_CASE("nearest_mean_predict") {
  Rng rng(6);
  const Matrix prototypes = test_util::random_matrix(5, 3, rng);

  Matrix f(1, 3);
  f.set_row(0, prototypes.row(3));
  CHECK(nearest_mean_predict(f, prototypes) == std::vector<int>{3});

  // Two equidistant prototypes: the lower index wins.
  const Matrix two{{1.0, 0.0}, {-1.0, 0.0}};
  CHECK(nearest_mean_predict(Matrix{{0.0, 5.0}}, two) == std::vector<int>{0});

  // Brute-force scan oracle.
  const Matrix feats = test_util::random_matrix(10, 3, rng);
  const Matrix protos = test_util::random_matrix(4, 3, rng);
  const std::vector<int> got = nearest_mean_predict(feats, protos);
  for (std::size_t r = 0; r < feats.rows(); ++r) {
    int best = 0;
    double best_d = 1e300;
    for (std::size_t p = 0; p < protos.rows(); ++p) {
      double d = 0.0;
      for (std::size_t c = 0; c < 3; ++c) {
        d += (feats(r, c) - protos(p, c)) * (feats(r, c) - protos(p, c));
      }
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(p);
      }
    }
    CHECK(got[r] == best);
  }

  CHECK_THROWS_AS(nearest_mean_predict(f, Matrix(0, 3)), EmptyPrototypes);
}

TEST_CASE("checkpoint round trip is bit-identical") {
  Network net = test_util::small_net({6, 8, 5}, 29);
  const std::string path = test_util::temp_file("checkpoint.oclw");
  save_network(net, path);
  const Network loaded = load_network(path);
  REQUIRE(loaded.layers().size() == net.layers().size());
  for (std::size_t l = 0; l < net.layers().size(); ++l) {
    CHECK(loaded.layers()[l].weights == net.layers()[l].weights);
    CHECK(loaded.layers()[l].activation == net.layers()[l].activation);
  }
}

TEST_CASE("checkpoint loader rejects bad files") {
  const std::string path = test_util::temp_file("bad.oclw");
  {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    std::fputs("NOPE", f);
    std::fclose(f);
  }
  CHECK_THROWS_AS(load_network(path), BadMagic);
}
