#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dwc/env.hpp"
#include "dwc/policy.hpp"

namespace dwc {

/// First-layer input slots landing in each observation dimension's
/// thermometer block, from the argmax selections.
struct ConnectionHistogram {
  std::vector<std::int64_t> counts;  // per observation dimension
  int zero_dims = 0;                 // dimensions no slot reads
};

ConnectionHistogram input_connection_histogram(const DwcPolicy& policy);

/// Slots per threshold index 0..B-1, aggregated over dimensions.
std::vector<std::int64_t> bit_index_histogram(const DwcPolicy& policy);

/// Expected number of dimensions receiving at least one of `slots` uniform
/// draws over dims * bits sources.
double expected_connected_dims(int dims, std::int64_t slots);

struct NoiseRow {
  double sigma = 0.0;
  double mean = 0.0;
  double std = 0.0;
};

/// The swept noise levels 0.1, 0.2, ..., 0.5.
std::vector<double> default_noise_sigmas();

/// One evaluate() per sigma; every sigma sees the same episode seeds.
std::vector<NoiseRow> noise_sweep(const DwcPolicy& policy, Env& env, std::span<const double> sigmas,
                                  int episodes, std::uint64_t seed);

/// Rows sorted by count, descending; ties by dimension.
std::string connections_csv(const ConnectionHistogram& hist);
std::string bits_csv(std::span<const std::int64_t> hist);
std::string noise_csv(std::span<const NoiseRow> rows);

/// "<kind>_<hash>.csv"
std::string diag_filename(const std::string& kind, const std::string& hash);

}  // namespace dwc
