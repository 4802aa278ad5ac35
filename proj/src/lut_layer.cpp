#include "dwc/lut_layer.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <memory>
#include <string>

#include "dwc/errors.hpp"

namespace dwc {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowMap = Eigen::Map<RowMatrix>;
using ConstRowMap = Eigen::Map<const RowMatrix>;

constexpr std::size_t kMaxTable = std::size_t{1} << kMaxArity;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::vector<double> sigmoid_tables(const LutLayer& layer) {
  std::vector<double> t(layer.table_logits().size());
  std::transform(layer.table_logits().begin(), layer.table_logits().end(), t.begin(), sigmoid);
  return t;
}

// rows x cols row-major -> cols x rows row-major.
std::vector<double> transposed(std::span<const double> m, std::size_t rows, std::size_t cols) {
  std::vector<double> out(m.size());
  RowMap(out.data(), static_cast<Eigen::Index>(cols), static_cast<Eigen::Index>(rows)) =
      ConstRowMap(m.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols))
          .transpose();
  return out;
}

// Expectation of one LUT under independent Bernoulli inputs. levels receives
// the contraction chain: levels[j] holds 2^(j+1) values before slot j is
// folded (slot k-1 is folded first, it is the most significant bit).
double contract(const double* table, const double* p, int arity,
                std::array<double, 2 * kMaxTable>& levels) {
  std::size_t size = std::size_t{1} << arity;
  std::size_t offset = 0;
  std::copy(table, table + size, levels.begin());
  for (int j = arity - 1; j >= 0; --j) {
    const std::size_t half = size / 2;
    double* cur = levels.data() + offset;
    double* next = cur + size;
    const double pj = p[j];
    for (std::size_t a = 0; a < half; ++a) {
      next[a] = cur[a] * (1.0 - pj) + cur[a + half] * pj;
    }
    offset += size;
    size = half;
  }
  return levels[offset];
}

// The same recurrence over kLanes samples at once. Inputs and outputs are
// sample-minor (feature x batch) so every lane access is contiguous.
constexpr std::size_t kLanes = 16;
using Lane = std::array<double, kLanes>;

struct BlockScratch {
  std::array<Lane, 2 * kMaxTable> levels;
  std::array<Lane, kMaxArity> p;
  std::array<Lane, 2 * kMaxTable> g;
  std::array<Lane, 2 * kMaxTable> g_next;
  std::array<Lane, kMaxTable> acc;
};

// p[j] <- selected input of slot j for samples [b0, b0 + n); idle lanes get 0.
void gather_block(const LutLayer& layer, std::size_t i, const double* input_t,
                  std::size_t batch, std::size_t b0, std::size_t n, BlockScratch& s) {
  for (int j = 0; j < layer.arity(); ++j) {
    const auto c = static_cast<std::size_t>(layer.selected(static_cast<int>(i), j));
    const double* src = input_t + c * batch + b0;
    Lane& pj = s.p[static_cast<std::size_t>(j)];
    std::copy(src, src + n, pj.begin());
    std::fill(pj.begin() + static_cast<std::ptrdiff_t>(n), pj.end(), 0.0);
  }
}

void lerp_lanes(double* __restrict dst, const double* __restrict lo,
                const double* __restrict hi, const double* __restrict p) {
  for (std::size_t l = 0; l < kLanes; ++l) dst[l] = lo[l] * (1.0 - p[l]) + hi[l] * p[l];
}

// dp += g * (hi - lo); n0 = g * (1 - p); n1 = g * p.
void chain_lanes(double* __restrict dp, double* __restrict n0, double* __restrict n1,
                 const double* __restrict g, const double* __restrict lo,
                 const double* __restrict hi, const double* __restrict p) {
  for (std::size_t l = 0; l < kLanes; ++l) {
    dp[l] += g[l] * (hi[l] - lo[l]);
    n0[l] = g[l] * (1.0 - p[l]);
    n1[l] = g[l] * p[l];
  }
}

void add_lanes(double* __restrict dst, const double* __restrict src) {
  for (std::size_t l = 0; l < kLanes; ++l) dst[l] += src[l];
}

// Returns the index of the final level; levels are stored as in contract().
std::size_t contract_block(const double* table, int arity, BlockScratch& s) {
  std::size_t size = std::size_t{1} << arity;
  for (std::size_t a = 0; a < size; ++a) s.levels[a].fill(table[a]);
  std::size_t offset = 0;
  for (int j = arity - 1; j >= 0; --j) {
    const std::size_t half = size / 2;
    const Lane& pj = s.p[static_cast<std::size_t>(j)];
    for (std::size_t a = 0; a < half; ++a) {
      lerp_lanes(s.levels[offset + size + a].data(), s.levels[offset + a].data(),
                 s.levels[offset + a + half].data(), pj.data());
    }
    offset += size;
    size = half;
  }
  return offset;
}

std::uint32_t hard_address(const LutLayer& layer, std::size_t i, const double* input_t,
                           std::size_t batch, std::size_t b) {
  std::uint32_t a = 0;
  for (int j = 0; j < layer.arity(); ++j) {
    const auto c = static_cast<std::size_t>(layer.selected(static_cast<int>(i), j));
    if (input_t[c * batch + b] >= 0.5) a |= 1u << j;
  }
  return a;
}

void check_cache(const LutLayer& layer, const LayerCache& cache,
                 std::span<const double> upstream) {
  if (!cache.valid()) throw StateError("backward: no forward cache recorded");
  if (cache.input.size() != cache.batch * static_cast<std::size_t>(layer.in_width())) {
    throw StateError("backward: forward cache does not match this layer");
  }
  if (upstream.size() != cache.batch * static_cast<std::size_t>(layer.width())) {
    throw ShapeError("backward: upstream gradient has wrong size");
  }
}

// Straight-through interconnect gradient: the forward pass used the argmax
// candidate, the backward pass treats each slot input as the softmax mixture
// p = S x. slot_t is (width * k) x batch.
std::vector<double> interconnect_grad(const LutLayer& layer, const LayerCache& cache,
                                      const std::vector<double>& slot_t) {
  const auto rows = static_cast<Eigen::Index>(layer.width()) * layer.arity();
  const auto cols = static_cast<Eigen::Index>(layer.in_width());
  const auto batch = static_cast<Eigen::Index>(cache.batch);

  ConstRowMap logits(layer.interconnect_logits().data(), rows, cols);
  RowMatrix soft = (logits.colwise() - logits.rowwise().maxCoeff()).array().exp();
  soft.array().colwise() /= soft.rowwise().sum().array();

  ConstRowMap x(cache.input.data(), batch, cols);
  ConstRowMap g(slot_t.data(), rows, batch);
  RowMatrix gx(rows, cols);
  gx.noalias() = g * x;
  // sum_b g[r,b] * (S x)[r,b] regrouped as sum_c S[r,c] * gx[r,c].
  const Eigen::VectorXd gm = (soft.array() * gx.array()).rowwise().sum();

  std::vector<double> out(static_cast<std::size_t>(rows * cols));
  RowMap dw(out.data(), rows, cols);
  dw = soft.array() * (gx.colwise() - gm).array();
  return out;
}

}  // namespace

std::uint32_t addr(std::span<const std::uint8_t> bits) {
  std::uint32_t a = 0;
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i]) a |= std::uint32_t{1} << i;
  }
  return a;
}

LutLayer::LutLayer(int in_width, int width, int arity, bool trainable_interconnect)
    : in_width_(in_width),
      width_(width),
      arity_(arity),
      trainable_interconnect_(trainable_interconnect) {
  if (arity < kMinArity || arity > kMaxArity) {
    throw ConfigError("LUT arity must be in [2, 6], got " + std::to_string(arity));
  }
  if (in_width <= 0 || width <= 0) {
    throw ConfigError("LUT layer widths must be positive");
  }
  table_logits_.assign(static_cast<std::size_t>(width) << arity, 0.0);
  interconnect_logits_.assign(
      static_cast<std::size_t>(width) * arity * static_cast<std::size_t>(in_width), 0.0);
  selection_.assign(static_cast<std::size_t>(width) * arity, 0);
}

void LutLayer::refresh_selection() {
  const auto n = static_cast<std::size_t>(in_width_);
  for (std::size_t row = 0; row < selection_.size(); ++row) {
    const double* w = interconnect_logits_.data() + row * n;
    // max_element returns the first maximum, i.e. ties go to the lowest index.
    selection_[row] = static_cast<int>(std::max_element(w, w + n) - w);
  }
}

void LutLayer::randomize(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> table(-1.0, 1.0);
  std::uniform_real_distribution<double> wires(0.0, 1.0);
  for (auto& v : table_logits_) v = table(rng);
  for (auto& v : interconnect_logits_) v = wires(rng);
  refresh_selection();
}

std::vector<std::uint8_t> hard_forward(const LutLayer& layer,
                                       std::span<const std::uint8_t> bits) {
  if (bits.size() != static_cast<std::size_t>(layer.in_width())) {
    throw ShapeError("hard_forward: expected " + std::to_string(layer.in_width()) +
                     " input bits, got " + std::to_string(bits.size()));
  }
  std::vector<std::uint8_t> out(static_cast<std::size_t>(layer.width()));
  for (int i = 0; i < layer.width(); ++i) {
    std::uint32_t a = 0;
    for (int j = 0; j < layer.arity(); ++j) {
      if (bits[static_cast<std::size_t>(layer.selected(i, j))]) a |= 1u << j;
    }
    out[static_cast<std::size_t>(i)] = layer.table_bit(i, a) ? 1 : 0;
  }
  return out;
}

std::vector<double> relaxed_forward(const LutLayer& layer, std::span<const double> probs,
                                    std::size_t batch, GradientMode mode,
                                    LayerCache* cache) {
  const auto in_w = static_cast<std::size_t>(layer.in_width());
  const auto width = static_cast<std::size_t>(layer.width());
  const int k = layer.arity();
  const std::size_t tsize = std::size_t{1} << k;
  if (probs.size() != batch * in_w) {
    throw ShapeError("relaxed_forward: expected " + std::to_string(batch * in_w) +
                     " inputs, got " + std::to_string(probs.size()));
  }
  for (double p : probs) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw DomainError("relaxed_forward: input probability outside [0, 1]");
    }
  }

  std::vector<double> out(batch * width);
  if (mode == GradientMode::kEfd) {
    for (std::size_t b = 0; b < batch; ++b) {
      const double* x = probs.data() + b * in_w;
      for (std::size_t i = 0; i < width; ++i) {
        std::uint32_t a = 0;
        for (int j = 0; j < k; ++j) {
          if (x[layer.selected(static_cast<int>(i), j)] >= 0.5) a |= 1u << j;
        }
        out[b * width + i] = layer.table_bit(static_cast<int>(i), a) ? 1.0 : 0.0;
      }
    }
  } else if (batch == 1) {
    const auto tables = sigmoid_tables(layer);
    std::array<double, 2 * kMaxTable> levels{};
    std::array<double, kMaxArity> p{};
    for (std::size_t i = 0; i < width; ++i) {
      for (int j = 0; j < k; ++j) {
        p[static_cast<std::size_t>(j)] =
            probs[static_cast<std::size_t>(layer.selected(static_cast<int>(i), j))];
      }
      out[i] = contract(tables.data() + i * tsize, p.data(), k, levels);
    }
  } else {
    const auto tables = sigmoid_tables(layer);
    const auto input_t = transposed(probs, batch, in_w);
    std::vector<double> out_t(width * batch);
    auto scratch = std::make_unique<BlockScratch>();
    for (std::size_t b0 = 0; b0 < batch; b0 += kLanes) {
      const std::size_t n = std::min(kLanes, batch - b0);
      for (std::size_t i = 0; i < width; ++i) {
        gather_block(layer, i, input_t.data(), batch, b0, n, *scratch);
        const std::size_t last = contract_block(tables.data() + i * tsize, k, *scratch);
        std::copy(scratch->levels[last].begin(),
                  scratch->levels[last].begin() + static_cast<std::ptrdiff_t>(n),
                  out_t.begin() + static_cast<std::ptrdiff_t>(i * batch + b0));
      }
    }
    out = transposed(out_t, width, batch);
  }

  if (cache != nullptr) {
    cache->mode = mode;
    cache->batch = batch;
    cache->input.assign(probs.begin(), probs.end());
  }
  return out;
}

LayerGrad backward(const LutLayer& layer, const LayerCache& cache,
                   std::span<const double> upstream, bool want_input_grad) {
  check_cache(layer, cache, upstream);
  const auto in_w = static_cast<std::size_t>(layer.in_width());
  const auto width = static_cast<std::size_t>(layer.width());
  const int k = layer.arity();
  const auto ku = static_cast<std::size_t>(k);
  const std::size_t tsize = std::size_t{1} << k;
  const std::size_t batch = cache.batch;

  const auto input_t = transposed(cache.input, batch, in_w);
  const auto up_t = transposed(upstream, batch, width);

  LayerGrad grad;
  grad.table.assign(width * tsize, 0.0);
  // d loss / d (input feeding slot j of LUT i), (width * k) x batch.
  std::vector<double> slot_t(width * ku * batch, 0.0);

  if (cache.mode == GradientMode::kEfd) {
    // 1 / (Hamming distance excluding the differentiated bit + 1).
    std::array<double, kMaxArity + 1> inv_dist{};
    for (std::size_t h = 0; h <= kMaxArity; ++h) inv_dist[h] = 1.0 / double(h + 1);
    for (std::size_t i = 0; i < width; ++i) {
      for (std::size_t b = 0; b < batch; ++b) {
        const double up = up_t[i * batch + b];
        if (up == 0.0) continue;
        const std::uint32_t a = hard_address(layer, i, input_t.data(), batch, b);
        grad.table[i * tsize + a] += up;
        for (int j = 0; j < k; ++j) {
          const std::uint32_t mask = ~(1u << j);
          double d = 0.0;
          for (std::uint32_t t = 0; t < tsize; ++t) {
            if (!layer.table_bit(static_cast<int>(i), t)) continue;
            const auto h = static_cast<std::size_t>(std::popcount((t ^ a) & mask));
            d += ((t >> j) & 1u ? 1.0 : -1.0) * inv_dist[h];
          }
          slot_t[(i * ku + static_cast<std::size_t>(j)) * batch + b] = up * d;
        }
      }
    }
  } else {
    const auto tables = sigmoid_tables(layer);
    auto scratch = std::make_unique<BlockScratch>();
    BlockScratch& sc = *scratch;
    for (std::size_t i = 0; i < width; ++i) {
      // Lane-wise table gradient accumulated over all blocks of this LUT.
      for (std::size_t a = 0; a < tsize; ++a) sc.acc[a].fill(0.0);
      for (std::size_t b0 = 0; b0 < batch; b0 += kLanes) {
        const std::size_t n = std::min(kLanes, batch - b0);
        const double* up = up_t.data() + i * batch + b0;
        if (std::all_of(up, up + n, [](double v) { return v == 0.0; })) continue;
        Lane* g = sc.g.data();
        Lane* g_next = sc.g_next.data();
        std::copy(up, up + n, g[0].begin());
        std::fill(g[0].begin() + static_cast<std::ptrdiff_t>(n), g[0].end(), 0.0);
        gather_block(layer, i, input_t.data(), batch, b0, n, sc);
        contract_block(tables.data() + i * tsize, k, sc);

        // Walk the contraction chain backwards, slot 0 was folded last.
        std::size_t offset = 2 * tsize - 2;  // one past the last level
        for (int j = 0; j < k; ++j) {
          const std::size_t half = std::size_t{1} << j;
          offset -= 2 * half;
          Lane dp{};
          for (std::size_t a = 0; a < half; ++a) {
            chain_lanes(dp.data(), g_next[a].data(), g_next[a + half].data(), g[a].data(),
                        sc.levels[offset + a].data(), sc.levels[offset + a + half].data(),
                        sc.p[static_cast<std::size_t>(j)].data());
          }
          std::swap(g, g_next);
          std::copy(dp.begin(), dp.begin() + static_cast<std::ptrdiff_t>(n),
                    slot_t.begin() +
                        static_cast<std::ptrdiff_t>((i * ku + static_cast<std::size_t>(j)) * batch + b0));
        }
        for (std::size_t a = 0; a < tsize; ++a) add_lanes(sc.acc[a].data(), g[a].data());
      }
      double* tg = grad.table.data() + i * tsize;
      for (std::size_t a = 0; a < tsize; ++a) {
        double sum = 0.0;
        for (std::size_t l = 0; l < kLanes; ++l) sum += sc.acc[a][l];
        tg[a] = sum;
      }
    }
    // Chain through the sigmoid.
    for (std::size_t n = 0; n < grad.table.size(); ++n) {
      grad.table[n] *= tables[n] * (1.0 - tables[n]);
    }
  }

  if (want_input_grad) {
    std::vector<double> in_grad_t(in_w * batch, 0.0);
    for (std::size_t r = 0; r < width * ku; ++r) {
      const auto c = static_cast<std::size_t>(layer.selection()[r]);
      const double* src = slot_t.data() + r * batch;
      double* dst = in_grad_t.data() + c * batch;
      for (std::size_t b = 0; b < batch; ++b) dst[b] += src[b];
    }
    grad.input = transposed(in_grad_t, in_w, batch);
  }
  if (layer.trainable_interconnect()) {
    grad.interconnect = interconnect_grad(layer, cache, slot_t);
  }
  return grad;
}

}  // namespace dwc
