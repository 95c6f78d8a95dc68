#include "p2pagg/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "p2pagg/errors.hpp"

namespace p2pagg {

Dataset make_blobs(uint64_t seed, int classes, size_t dim, size_t n,
                   double separation, uint64_t sample_stream) {
  check(classes >= 2 && dim >= 1 && n >= 1, "degenerate blob request");
  check(separation > 0, "separation must be positive");
  SeededRng root = SeededRng::from_seed64(seed);

  // Centers: random directions scaled to `separation`, shared across streams.
  SeededRng crng = root.fork("cent", 0);
  std::vector<double> centers(static_cast<size_t>(classes) * dim);
  for (int c = 0; c < classes; ++c) {
    double* ctr = centers.data() + static_cast<size_t>(c) * dim;
    double norm2 = 0;
    for (size_t j = 0; j < dim; ++j) {
      ctr[j] = crng.normal();
      norm2 += ctr[j] * ctr[j];
    }
    double scale = separation / std::sqrt(std::max(norm2, 1e-12));
    for (size_t j = 0; j < dim; ++j) ctr[j] *= scale;
  }

  SeededRng srng = root.fork("samp", sample_stream);
  Dataset d;
  d.dim = dim;
  d.classes = classes;
  d.x.resize(n * dim);
  d.y.resize(n);
  for (size_t i = 0; i < n; ++i) {
    int c = static_cast<int>(srng.below(static_cast<uint64_t>(classes)));
    d.y[i] = c;
    const double* ctr = centers.data() + static_cast<size_t>(c) * dim;
    double* row = d.x.data() + i * dim;
    for (size_t j = 0; j < dim; ++j) row[j] = ctr[j] + srng.normal();
  }
  return d;
}

namespace {

uint32_t read_be32(std::istream& in, const std::string& path) {
  uint8_t b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw IoError("truncated IDX header in " + path);
  return (uint32_t(b[0]) << 24) | (uint32_t(b[1]) << 16) |
         (uint32_t(b[2]) << 8) | uint32_t(b[3]);
}

}  // namespace

Dataset load_idx(const std::string& images_path,
                 const std::string& labels_path) {
  std::ifstream imgs(images_path, std::ios::binary);
  if (!imgs) throw IoError("cannot open " + images_path);
  uint32_t magic = read_be32(imgs, images_path);
  if (magic != 0x803)
    throw IoError("bad IDX image magic in " + images_path + ": got " +
                  std::to_string(magic) + ", want 2051");
  uint32_t n = read_be32(imgs, images_path);
  uint32_t rows = read_be32(imgs, images_path);
  uint32_t cols = read_be32(imgs, images_path);
  size_t dim = static_cast<size_t>(rows) * cols;
  std::vector<uint8_t> raw(static_cast<size_t>(n) * dim);
  imgs.read(reinterpret_cast<char*>(raw.data()),
            static_cast<std::streamsize>(raw.size()));
  if (static_cast<size_t>(imgs.gcount()) != raw.size())
    throw IoError("truncated IDX images in " + images_path + ": expected " +
                  std::to_string(raw.size() + 16) + " bytes, got " +
                  std::to_string(imgs.gcount() + 16));

  std::ifstream labs(labels_path, std::ios::binary);
  if (!labs) throw IoError("cannot open " + labels_path);
  magic = read_be32(labs, labels_path);
  if (magic != 0x801)
    throw IoError("bad IDX label magic in " + labels_path + ": got " +
                  std::to_string(magic) + ", want 2049");
  uint32_t nl = read_be32(labs, labels_path);
  if (nl != n)
    throw IoError("IDX image/label count mismatch: " + std::to_string(n) +
                  " vs " + std::to_string(nl));
  std::vector<uint8_t> ybytes(n);
  labs.read(reinterpret_cast<char*>(ybytes.data()), n);
  if (static_cast<size_t>(labs.gcount()) != ybytes.size())
    throw IoError("truncated IDX labels in " + labels_path);

  Dataset d;
  d.dim = dim;
  d.x.resize(raw.size());
  for (size_t i = 0; i < raw.size(); ++i) d.x[i] = raw[i] / 255.0;
  d.y.resize(n);
  int max_label = 0;
  for (uint32_t i = 0; i < n; ++i) {
    d.y[i] = ybytes[i];
    max_label = std::max(max_label, d.y[i]);
  }
  d.classes = max_label + 1;
  return d;
}

Dataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty CSV " + path);
  size_t dim = static_cast<size_t>(std::count(line.begin(), line.end(), ','));
  if (dim == 0 || line.rfind("label,", 0) != 0)
    throw IoError("CSV header must be label,f1,...,fdim in " + path);

  Dataset d;
  d.dim = dim;
  int max_label = 0;
  size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string tok;
    if (!std::getline(ss, tok, ','))
      throw IoError("bad CSV row at line " + std::to_string(lineno));
    try {
      d.y.push_back(std::stoi(tok));
    } catch (const std::exception&) {
      throw IoError("bad CSV label at line " + std::to_string(lineno));
    }
    max_label = std::max(max_label, d.y.back());
    size_t got = 0;
    while (std::getline(ss, tok, ',')) {
      try {
        d.x.push_back(std::stod(tok));
      } catch (const std::exception&) {
        throw IoError("bad CSV value at line " + std::to_string(lineno));
      }
      ++got;
    }
    if (got != dim)
      throw IoError("CSV row at line " + std::to_string(lineno) + " has " +
                    std::to_string(got) + " features, want " +
                    std::to_string(dim));
  }
  if (d.y.empty()) throw IoError("CSV has no data rows: " + path);
  d.classes = max_label + 1;
  return d;
}

std::vector<std::vector<uint32_t>> partition_iid(size_t n_items, int shards,
                                                 SeededRng& rng) {
  check(shards >= 1 && n_items >= static_cast<size_t>(shards),
        "more shards than items");
  std::vector<uint32_t> idx(n_items);
  std::iota(idx.begin(), idx.end(), 0u);
  for (size_t i = 0; i + 1 < n_items; ++i) {
    size_t j = i + static_cast<size_t>(rng.below(n_items - i));
    std::swap(idx[i], idx[j]);
  }
  std::vector<std::vector<uint32_t>> out(static_cast<size_t>(shards));
  for (size_t i = 0; i < n_items; ++i)
    out[i % static_cast<size_t>(shards)].push_back(idx[i]);
  return out;
}

std::vector<std::vector<uint32_t>> partition_label_skew(
    const std::vector<int>& labels, int shards) {
  check(shards >= 1 && labels.size() >= static_cast<size_t>(shards),
        "more shards than items");
  std::vector<uint32_t> idx(labels.size());
  std::iota(idx.begin(), idx.end(), 0u);
  std::stable_sort(idx.begin(), idx.end(), [&](uint32_t a, uint32_t b) {
    return labels[a] < labels[b];
  });
  std::vector<std::vector<uint32_t>> out(static_cast<size_t>(shards));
  size_t base = labels.size() / static_cast<size_t>(shards);
  size_t rem = labels.size() % static_cast<size_t>(shards);
  size_t pos = 0;
  for (size_t s = 0; s < static_cast<size_t>(shards); ++s) {
    size_t len = base + (s < rem ? 1 : 0);
    out[s].assign(idx.begin() + static_cast<long>(pos),
                  idx.begin() + static_cast<long>(pos + len));
    pos += len;
  }
  return out;
}

}  // namespace p2pagg
