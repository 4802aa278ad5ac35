#include "dwc/diag.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "dwc/errors.hpp"
#include "dwc/train.hpp"

namespace dwc {

namespace {

const LutLayer& first_layer(const DwcPolicy& policy) {
  if (policy.layers.empty()) throw ShapeError("diag: policy has no layers");
  return policy.layers.front();
}

}  // namespace

ConnectionHistogram input_connection_histogram(const DwcPolicy& policy) {
  const auto& layer = first_layer(policy);
  ConnectionHistogram h;
  h.counts.assign(static_cast<std::size_t>(policy.obs_dim()), 0);
  for (int s : layer.selection()) ++h.counts[static_cast<std::size_t>(s / policy.bits())];
  h.zero_dims = static_cast<int>(std::count(h.counts.begin(), h.counts.end(), 0));
  return h;
}

std::vector<std::int64_t> bit_index_histogram(const DwcPolicy& policy) {
  const auto& layer = first_layer(policy);
  std::vector<std::int64_t> h(static_cast<std::size_t>(policy.bits()), 0);
  for (int s : layer.selection()) ++h[static_cast<std::size_t>(s % policy.bits())];
  return h;
}

double expected_connected_dims(int dims, std::int64_t slots) {
  if (dims <= 0) return 0.0;
  const double miss = std::pow(1.0 - 1.0 / dims, static_cast<double>(slots));
  return dims * (1.0 - miss);
}

std::vector<double> default_noise_sigmas() { return {0.1, 0.2, 0.3, 0.4, 0.5}; }

std::vector<NoiseRow> noise_sweep(const DwcPolicy& policy, Env& env, std::span<const double> sigmas,
                                  int episodes, std::uint64_t seed) {
  std::vector<NoiseRow> rows;
  for (double sigma : sigmas) {
    if (!(sigma >= 0.0)) throw ConfigError("noise sigmas must be nonnegative");
    const auto ev = evaluate(policy, env, EvalOptions{episodes, sigma, seed});
    rows.push_back({sigma, ev.mean, ev.std});
  }
  return rows;
}

std::string connections_csv(const ConnectionHistogram& hist) {
  std::vector<std::size_t> order(hist.counts.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return hist.counts[a] > hist.counts[b]; });
  std::ostringstream os;
  os << "rank,dimension,connections\n";
  for (std::size_t r = 0; r < order.size(); ++r) {
    os << r << "," << order[r] << "," << hist.counts[order[r]] << "\n";
  }
  return os.str();
}

std::string bits_csv(std::span<const std::int64_t> hist) {
  std::ostringstream os;
  os << "bit_index,connections\n";
  for (std::size_t m = 0; m < hist.size(); ++m) os << m << "," << hist[m] << "\n";
  return os.str();
}

std::string noise_csv(std::span<const NoiseRow> rows) {
  std::ostringstream os;
  os.precision(10);
  os << "sigma,mean,std\n";
  for (const auto& r : rows) os << r.sigma << "," << r.mean << "," << r.std << "\n";
  return os.str();
}

std::string diag_filename(const std::string& kind, const std::string& hash) {
  return kind + "_" + hash + ".csv";
}

}  // namespace dwc
