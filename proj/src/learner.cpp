#include "p2pagg/learner.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "p2pagg/errors.hpp"

namespace p2pagg {

namespace {

void require_finite(std::span<const double> g) {
  for (double v : g)
    if (!std::isfinite(v)) throw AbortError("non-finite gradient");
}

// In-place softmax of logits with the max-subtraction guard.
void softmax(std::span<double> z) {
  double zmax = *std::max_element(z.begin(), z.end());
  double sum = 0;
  for (double& v : z) {
    v = std::exp(v - zmax);
    sum += v;
  }
  for (double& v : z) v /= sum;
}

class SoftmaxLearner final : public Learner {
 public:
  SoftmaxLearner(size_t dim, int classes) : dim_(dim), classes_(classes) {
    check(classes >= 2, "need at least two classes");
  }

  size_t param_dim() const override {
    return dim_ * static_cast<size_t>(classes_) +
           static_cast<size_t>(classes_);
  }
  std::string name() const override { return "softmax"; }

  double loss(std::span<const double> w, const Dataset& d,
              std::span<const uint32_t> idx) const override {
    check(!idx.empty(), "empty batch");
    const size_t L = static_cast<size_t>(classes_);
    std::vector<double> z(L);
    double total = 0;
    for (uint32_t i : idx) {
      logits(w, d.row(i), z);
      double zmax = *std::max_element(z.begin(), z.end());
      double lse = 0;
      for (double v : z) lse += std::exp(v - zmax);
      total += std::log(lse) + zmax - z[static_cast<size_t>(d.y[i])];
    }
    return total / static_cast<double>(idx.size());
  }

  std::vector<double> grad(std::span<const double> w, const Dataset& d,
                           std::span<const uint32_t> idx) const override {
    check(!idx.empty(), "empty batch");
    const size_t L = static_cast<size_t>(classes_);
    std::vector<double> g(param_dim(), 0.0);
    std::vector<double> z(L);
    for (uint32_t i : idx) {
      const double* x = d.row(i);
      logits(w, x, z);
      softmax(z);
      z[static_cast<size_t>(d.y[i])] -= 1.0;  // dL/dz = p - onehot
      for (size_t j = 0; j < dim_; ++j) {
        double xj = x[j];
        if (xj == 0) continue;
        double* gw = g.data() + j * L;
        for (size_t c = 0; c < L; ++c) gw[c] += xj * z[c];
      }
      double* gb = g.data() + dim_ * L;
      for (size_t c = 0; c < L; ++c) gb[c] += z[c];
    }
    double inv = 1.0 / static_cast<double>(idx.size());
    for (double& v : g) v *= inv;
    require_finite(g);
    return g;
  }

  double accuracy(std::span<const double> w, const Dataset& d) const override {
    const size_t L = static_cast<size_t>(classes_);
    std::vector<double> z(L);
    size_t hits = 0;
    for (size_t i = 0; i < d.size(); ++i) {
      logits(w, d.row(i), z);
      size_t best =
          static_cast<size_t>(std::max_element(z.begin(), z.end()) -
                              z.begin());
      hits += best == static_cast<size_t>(d.y[i]);
    }
    return static_cast<double>(hits) / static_cast<double>(d.size());
  }

 private:
  void logits(std::span<const double> w, const double* x,
              std::span<double> z) const {
    const size_t L = static_cast<size_t>(classes_);
    const double* bias = w.data() + dim_ * L;
    for (size_t c = 0; c < L; ++c) z[c] = bias[c];
    for (size_t j = 0; j < dim_; ++j) {
      double xj = x[j];
      if (xj == 0) continue;
      const double* wj = w.data() + j * L;
      for (size_t c = 0; c < L; ++c) z[c] += xj * wj[c];
    }
  }

  size_t dim_;
  int classes_;
};

// One tanh hidden layer. Parameter layout: W1(dim x H), b1(H), W2(H x L),
// b2(L), all row-major.
class MlpLearner final : public Learner {
 public:
  MlpLearner(size_t dim, int classes, int hidden)
      : dim_(dim), classes_(classes), hidden_(hidden) {
    check(classes >= 2 && hidden >= 1, "degenerate perceptron shape");
  }

  size_t param_dim() const override {
    size_t H = static_cast<size_t>(hidden_), L = static_cast<size_t>(classes_);
    return dim_ * H + H + H * L + L;
  }
  std::string name() const override { return "mlp"; }

  double loss(std::span<const double> w, const Dataset& d,
              std::span<const uint32_t> idx) const override {
    check(!idx.empty(), "empty batch");
    const size_t H = static_cast<size_t>(hidden_);
    const size_t L = static_cast<size_t>(classes_);
    std::vector<double> h(H), z(L);
    double total = 0;
    for (uint32_t i : idx) {
      forward(w, d.row(i), h, z);
      double zmax = *std::max_element(z.begin(), z.end());
      double lse = 0;
      for (double v : z) lse += std::exp(v - zmax);
      total += std::log(lse) + zmax - z[static_cast<size_t>(d.y[i])];
    }
    return total / static_cast<double>(idx.size());
  }

  std::vector<double> grad(std::span<const double> w, const Dataset& d,
                           std::span<const uint32_t> idx) const override {
    check(!idx.empty(), "empty batch");
    const size_t H = static_cast<size_t>(hidden_);
    const size_t L = static_cast<size_t>(classes_);
    const double* w2 = w.data() + dim_ * H + H;
    std::vector<double> g(param_dim(), 0.0);
    double* g1 = g.data();
    double* gb1 = g.data() + dim_ * H;
    double* g2 = g.data() + dim_ * H + H;
    double* gb2 = g.data() + dim_ * H + H + H * L;
    std::vector<double> h(H), z(L), dh(H);
    for (uint32_t i : idx) {
      const double* x = d.row(i);
      forward(w, x, h, z);
      softmax(z);
      z[static_cast<size_t>(d.y[i])] -= 1.0;
      for (size_t c = 0; c < L; ++c) gb2[c] += z[c];
      for (size_t k = 0; k < H; ++k) {
        double* row = g2 + k * L;
        double acc = 0;
        const double* w2k = w2 + k * L;
        for (size_t c = 0; c < L; ++c) {
          row[c] += h[k] * z[c];
          acc += w2k[c] * z[c];
        }
        dh[k] = acc * (1.0 - h[k] * h[k]);  // tanh'
        gb1[k] += dh[k];
      }
      for (size_t j = 0; j < dim_; ++j) {
        double xj = x[j];
        if (xj == 0) continue;
        double* row = g1 + j * H;
        for (size_t k = 0; k < H; ++k) row[k] += xj * dh[k];
      }
    }
    double inv = 1.0 / static_cast<double>(idx.size());
    for (double& v : g) v *= inv;
    require_finite(g);
    return g;
  }

  double accuracy(std::span<const double> w, const Dataset& d) const override {
    const size_t H = static_cast<size_t>(hidden_);
    const size_t L = static_cast<size_t>(classes_);
    std::vector<double> h(H), z(L);
    size_t hits = 0;
    for (size_t i = 0; i < d.size(); ++i) {
      forward(w, d.row(i), h, z);
      size_t best =
          static_cast<size_t>(std::max_element(z.begin(), z.end()) -
                              z.begin());
      hits += best == static_cast<size_t>(d.y[i]);
    }
    return static_cast<double>(hits) / static_cast<double>(d.size());
  }

 private:
  void forward(std::span<const double> w, const double* x,
               std::span<double> h, std::span<double> z) const {
    const size_t H = static_cast<size_t>(hidden_);
    const size_t L = static_cast<size_t>(classes_);
    const double* w1 = w.data();
    const double* b1 = w.data() + dim_ * H;
    const double* w2 = w.data() + dim_ * H + H;
    const double* b2 = w.data() + dim_ * H + H + H * L;
    for (size_t k = 0; k < H; ++k) h[k] = b1[k];
    for (size_t j = 0; j < dim_; ++j) {
      double xj = x[j];
      if (xj == 0) continue;
      const double* row = w1 + j * H;
      for (size_t k = 0; k < H; ++k) h[k] += xj * row[k];
    }
    for (size_t k = 0; k < H; ++k) h[k] = std::tanh(h[k]);
    for (size_t c = 0; c < L; ++c) z[c] = b2[c];
    for (size_t k = 0; k < H; ++k) {
      const double* row = w2 + k * L;
      for (size_t c = 0; c < L; ++c) z[c] += h[k] * row[c];
    }
  }

  size_t dim_;
  int classes_;
  int hidden_;
};

}  // namespace

std::unique_ptr<Learner> make_softmax(size_t dim, int classes) {
  return std::make_unique<SoftmaxLearner>(dim, classes);
}

std::unique_ptr<Learner> make_mlp(size_t dim, int classes, int hidden) {
  return std::make_unique<MlpLearner>(dim, classes, hidden);
}

std::vector<uint32_t> draw_batch(std::span<const uint32_t> shard,
                                 SeededRng& rng, int batch) {
  check(!shard.empty(), "empty shard");
  std::vector<uint32_t> idx(static_cast<size_t>(batch));
  for (uint32_t& v : idx) v = shard[rng.below(shard.size())];
  return idx;
}

std::vector<double> local_epoch_delta(const Learner& learner,
                                      std::span<const double> w,
                                      const Dataset& d,
                                      std::span<const uint32_t> shard,
                                      double lr, SeededRng& rng) {
  check(shard.size() >= static_cast<size_t>(kBatchSize),
        "shard smaller than one batch");
  std::vector<uint32_t> order(shard.begin(), shard.end());
  for (size_t i = 0; i + 1 < order.size(); ++i) {
    size_t j = i + static_cast<size_t>(rng.below(order.size() - i));
    std::swap(order[i], order[j]);
  }
  std::vector<double> cur(w.begin(), w.end());
  for (size_t pos = 0; pos < order.size(); pos += kBatchSize) {
    size_t hi = std::min(order.size(), pos + kBatchSize);
    std::span<const uint32_t> batch(order.data() + pos, hi - pos);
    std::vector<double> g = learner.grad(cur, d, batch);
    for (size_t j = 0; j < cur.size(); ++j) cur[j] -= lr * g[j];
  }
  for (size_t j = 0; j < cur.size(); ++j) cur[j] -= w[j];
  return cur;
}

}  // namespace p2pagg
