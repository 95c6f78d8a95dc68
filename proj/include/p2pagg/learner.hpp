#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "p2pagg/data.hpp"
#include "p2pagg/rng.hpp"

namespace p2pagg {

inline constexpr int kBatchSize = 32;

// A differentiable classifier over flat parameter vectors. Implementations:
// multinomial softmax regression and a one-hidden-layer perceptron (used to
// push the parameter count up for scaling runs).
class Learner {
 public:
  virtual ~Learner() = default;
  virtual size_t param_dim() const = 0;
  virtual std::string name() const = 0;

  // Mean cross-entropy over the selected rows.
  virtual double loss(std::span<const double> w, const Dataset& d,
                      std::span<const uint32_t> idx) const = 0;
  // Exact gradient of `loss`.
  virtual std::vector<double> grad(std::span<const double> w, const Dataset& d,
                                   std::span<const uint32_t> idx) const = 0;
  virtual double accuracy(std::span<const double> w,
                          const Dataset& d) const = 0;
};

std::unique_ptr<Learner> make_softmax(size_t dim, int classes);
std::unique_ptr<Learner> make_mlp(size_t dim, int classes, int hidden);

// Uniform batch of kBatchSize indices from the shard (with replacement).
std::vector<uint32_t> draw_batch(std::span<const uint32_t> shard,
                                 SeededRng& rng, int batch = kBatchSize);

// One local epoch of minibatch SGD at rate lr; returns new_w - w. Batches
// are contiguous over a seeded shuffle of the shard.
std::vector<double> local_epoch_delta(const Learner& learner,
                                      std::span<const double> w,
                                      const Dataset& d,
                                      std::span<const uint32_t> shard,
                                      double lr, SeededRng& rng);

}  // namespace p2pagg
