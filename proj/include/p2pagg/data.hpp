#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "p2pagg/rng.hpp"

namespace p2pagg {

struct Dataset {
  size_t dim = 0;
  int classes = 0;
  std::vector<double> x;  // N x dim, row-major
  std::vector<int> y;     // N labels in [0, classes)

  size_t size() const { return y.size(); }
  const double* row(size_t i) const { return x.data() + i * dim; }
};

// Gaussian class clusters: centers are random directions scaled by
// `separation`, unit-variance noise. Same seed, same dataset; `sample_stream`
// picks independent draws over the same centers (train vs test splits).
Dataset make_blobs(uint64_t seed, int classes, size_t dim, size_t n,
                   double separation, uint64_t sample_stream = 0);

// IDX format (big-endian dims; magic 0x803 images / 0x801 labels), pixel
// values scaled to [0,1].
Dataset load_idx(const std::string& images_path,
                 const std::string& labels_path);

// CSV with header "label,f1,...,fdim".
Dataset load_csv(const std::string& path);

// Disjoint shards covering [0, n_items): a seeded shuffle dealt
// contiguously. Shard sizes differ by at most one.
std::vector<std::vector<uint32_t>> partition_iid(size_t n_items, int shards,
                                                 SeededRng& rng);

// Label-skewed shards: indices sorted by label, dealt contiguously.
std::vector<std::vector<uint32_t>> partition_label_skew(
    const std::vector<int>& labels, int shards);

}  // namespace p2pagg
