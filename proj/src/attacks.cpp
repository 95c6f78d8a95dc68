#include "p2pagg/attacks.hpp"

#include <cmath>

#include "p2pagg/errors.hpp"

namespace p2pagg {

AttackKind parse_attack_kind(const std::string& name) {
  if (name == "none") return AttackKind::None;
  if (name == "bf") return AttackKind::BitFlip;
  if (name == "lf") return AttackKind::LabelFlip;
  if (name == "ipm") return AttackKind::InnerProduct;
  if (name == "alie") return AttackKind::LittleEnough;
  throw ConfigError("unknown attack kind '" + name + "'");
}

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace

double little_enough_default_z(size_t n, size_t f) {
  check(n > f, "coalition cannot cover all peers");
  const double s = std::floor(double(n) / 2.0) + 1.0 - double(f);
  const double target =
      (double(n) - double(f) - s) / (double(n) - double(f));
  check(target > 0 && target < 1, "percentile rule needs 0 < target < 1");
  double lo = -10, hi = 10;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (normal_cdf(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

std::vector<double> attack_bit_flip(std::span<const double> own_update) {
  std::vector<double> u(own_update.size());
  for (size_t j = 0; j < u.size(); ++j) u[j] = -own_update[j];
  return u;
}

std::vector<double> attack_inner_product(
    const std::vector<std::vector<double>>& honest, size_t d, double epsilon) {
  std::vector<double> u(d, 0.0);
  if (honest.empty()) return u;
  for (const std::vector<double>& h : honest)
    for (size_t j = 0; j < d; ++j) u[j] += h[j];
  for (size_t j = 0; j < d; ++j)
    u[j] *= -epsilon / double(honest.size());
  return u;
}

std::vector<double> attack_little_enough(
    const std::vector<std::vector<double>>& honest, size_t d, double z) {
  std::vector<double> u(d, 0.0);
  if (honest.empty()) return u;
  const double k = double(honest.size());
  std::vector<double> mean(d, 0.0), var(d, 0.0);
  for (const std::vector<double>& h : honest)
    for (size_t j = 0; j < d; ++j) mean[j] += h[j];
  for (size_t j = 0; j < d; ++j) mean[j] /= k;
  for (const std::vector<double>& h : honest)
    for (size_t j = 0; j < d; ++j) {
      const double c = h[j] - mean[j];
      var[j] += c * c;
    }
  for (size_t j = 0; j < d; ++j)
    u[j] = mean[j] + z * std::sqrt(var[j] / k);
  return u;
}

Dataset flip_labels(const Dataset& d) {
  Dataset out = d;
  for (int& y : out.y) y = d.classes - 1 - y;
  return out;
}

}  // namespace p2pagg
