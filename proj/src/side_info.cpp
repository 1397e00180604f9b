#include "lfgt/side_info.hpp"

#include <cmath>
#include <queue>

#include "lfgt/arith.hpp"

namespace lfgt {
namespace {

constexpr int kDr[4] = {0, 1, 0, -1};  // E, S, W, N on the corner lattice
constexpr int kDc[4] = {1, 0, -1, 0};

// Crack edges of a rows x cols image, addressed from corner (r, c).
class CrackLattice {
 public:
  CrackLattice(int rows, int cols)
      : rows_(rows), cols_(cols),
        present_(static_cast<std::size_t>((rows + 1) * cols + rows * (cols + 1)), 0) {}

  int corner_rows() const { return rows_ + 1; }
  int corner_cols() const { return cols_ + 1; }

  // Edge leaving corner (r, c) in direction d, or -1 if it is not an
  // interior crack.
  int edge(int r, int c, int d) const {
    switch (d) {
      case 0: return horizontal(r, c);
      case 2: return horizontal(r, c - 1);
      case 1: return vertical(r, c);
      default: return vertical(r - 1, c);
    }
  }
  // Crack between pixels (r-1, c) and (r, c).
  int horizontal(int r, int c) const {
    if (r < 1 || r > rows_ - 1 || c < 0 || c > cols_ - 1) return -1;
    return r * cols_ + c;
  }
  // Crack between pixels (r, c-1) and (r, c).
  int vertical(int r, int c) const {
    if (c < 1 || c > cols_ - 1 || r < 0 || r > rows_ - 1) return -1;
    return (rows_ + 1) * cols_ + r * (cols_ + 1) + c;
  }

  std::vector<std::uint8_t>& flags() { return present_; }
  const std::vector<std::uint8_t>& flags() const { return present_; }

  int live_degree(int r, int c) const {
    int n = 0;
    for (int d = 0; d < 4; ++d) {
      const int e = edge(r, c, d);
      if (e >= 0 && present_[static_cast<std::size_t>(e)]) ++n;
    }
    return n;
  }

 private:
  int rows_;
  int cols_;
  std::vector<std::uint8_t> present_;
};

int lattice_bits(int corners) {
  int bits = 0;
  while ((1LL << bits) < corners) ++bits;
  return bits;
}

struct ChainModels {
  BitModel count[9];
  BitModel length[9];
  BitModel straight[9];  // context: previous two moves
  BitModel left[9];
};

int turn(int direction, int move) {
  if (move == 1) return (direction + 3) % 4;
  if (move == 2) return (direction + 1) % 4;
  return direction;
}

}  // namespace

std::vector<ContourChain> trace_contours(const LabelMap& labels) {
  const int rows = labels.rows();
  const int cols = labels.cols();
  CrackLattice lattice(rows, cols);
  auto& live = lattice.flags();
  for (int r = 1; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      if (labels(r - 1, c) != labels(r, c)) live[static_cast<std::size_t>(lattice.horizontal(r, c))] = 1;
  for (int r = 0; r < rows; ++r)
    for (int c = 1; c < cols; ++c)
      if (labels(r, c - 1) != labels(r, c)) live[static_cast<std::size_t>(lattice.vertical(r, c))] = 1;

  std::vector<ContourChain> chains;
  auto walk = [&](int r, int c) {
    ContourChain chain;
    chain.start_row = r;
    chain.start_col = c;
    int dir = -1;
    for (int d = 0; d < 4 && dir < 0; ++d) {
      const int e = lattice.edge(r, c, d);
      if (e >= 0 && live[static_cast<std::size_t>(e)]) dir = d;
    }
    chain.direction = dir;
    for (;;) {
      live[static_cast<std::size_t>(lattice.edge(r, c, dir))] = 0;
      r += kDr[dir];
      c += kDc[dir];
      int next = -1;
      for (int move = 0; move < 3 && next < 0; ++move) {
        const int e = lattice.edge(r, c, turn(dir, move));
        if (e >= 0 && live[static_cast<std::size_t>(e)]) next = move;
      }
      if (next < 0) break;
      chain.moves.push_back(next);
      dir = turn(dir, next);
    }
    chains.push_back(std::move(chain));
  };

  for (int r = 0; r <= rows; ++r)
    for (int c = 0; c <= cols; ++c)
      while (lattice.live_degree(r, c) % 2 == 1) walk(r, c);
  for (int r = 0; r <= rows; ++r)
    for (int c = 0; c <= cols; ++c)
      while (lattice.live_degree(r, c) > 0) walk(r, c);
  return chains;
}

std::vector<std::uint8_t> encode_segmentation(const SuperPixelMap& map) {
  const SuperPixelMap canonical = canonicalize_labels(map.labels);
  if (!is_valid_superpixel_map(canonical)) throw Error("segmentation labels must form 4-connected regions");
  const LabelMap& labels = canonical.labels;
  const auto chains = trace_contours(labels);
  const int corners = (labels.rows() + 1) * (labels.cols() + 1);
  const int bits = lattice_bits(corners);

  RangeEncoder enc;
  ChainModels m;
  encode_eg0(enc, static_cast<std::uint32_t>(chains.size()), m.count);
  for (const auto& chain : chains) {
    enc.encode_bits(static_cast<std::uint32_t>(chain.start_row * (labels.cols() + 1) + chain.start_col), bits);
    enc.encode_bits(static_cast<std::uint32_t>(chain.direction), 2);
    encode_eg0(enc, static_cast<std::uint32_t>(chain.length() - 1), m.length);
    int prev1 = 0, prev2 = 0;
    for (int move : chain.moves) {
      const int ctx = prev2 * 3 + prev1;
      enc.encode(m.straight[ctx], move == 0 ? 0 : 1);
      if (move != 0) enc.encode(m.left[ctx], move == 1 ? 0 : 1);
      prev2 = prev1;
      prev1 = move;
    }
  }
  return enc.finish();
}

SuperPixelMap decode_segmentation(std::span<const std::uint8_t> bytes, int rows, int cols) {
  if (rows < 1 || cols < 1) throw FormatError("invalid segmentation dimensions");
  CrackLattice lattice(rows, cols);
  auto& boundary = lattice.flags();
  const int corners = (rows + 1) * (cols + 1);
  const int bits = lattice_bits(corners);

  RangeDecoder dec(bytes, "segmentation");
  ChainModels m;
  const std::uint32_t count = decode_eg0(dec, m.count);
  if (count > boundary.size()) throw FormatError("corrupt segmentation payload (chain count)");
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint32_t start = dec.decode_bits(bits);
    if (start >= static_cast<std::uint32_t>(corners)) throw FormatError("corrupt segmentation payload (chain start)");
    int r = static_cast<int>(start) / (cols + 1);
    int c = static_cast<int>(start) % (cols + 1);
    int dir = static_cast<int>(dec.decode_bits(2));
    const std::uint32_t extra = decode_eg0(dec, m.length);
    if (extra >= boundary.size()) throw FormatError("corrupt segmentation payload (chain length)");
    int prev1 = 0, prev2 = 0;
    for (std::uint32_t step = 0;; ++step) {
      const int e = lattice.edge(r, c, dir);
      if (e < 0 || boundary[static_cast<std::size_t>(e)]) throw FormatError("corrupt segmentation payload (chain move)");
      boundary[static_cast<std::size_t>(e)] = 1;
      r += kDr[dir];
      c += kDc[dir];
      if (step == extra) break;
      const int ctx = prev2 * 3 + prev1;
      int move = 0;
      if (dec.decode(m.straight[ctx])) move = dec.decode(m.left[ctx]) ? 2 : 1;
      dir = turn(dir, move);
      prev2 = prev1;
      prev1 = move;
    }
  }
  dec.finish();

  SuperPixelMap out;
  out.labels = LabelMap(rows, cols, -1);
  for (int r0 = 0; r0 < rows; ++r0)
    for (int c0 = 0; c0 < cols; ++c0) {
      if (out.labels(r0, c0) != -1) continue;
      const int id = out.count++;
      std::queue<Pixel> queue;
      queue.push({r0, c0});
      out.labels(r0, c0) = id;
      while (!queue.empty()) {
        const auto [r, c] = queue.front();
        queue.pop();
        auto visit = [&](int nr, int nc, int crack) {
          if (!out.labels.contains(nr, nc) || out.labels(nr, nc) != -1) return;
          if (boundary[static_cast<std::size_t>(crack)]) return;
          out.labels(nr, nc) = id;
          queue.push({nr, nc});
        };
        if (c + 1 < cols) visit(r, c + 1, lattice.vertical(r, c + 1));
        if (c > 0) visit(r, c - 1, lattice.vertical(r, c));
        if (r + 1 < rows) visit(r + 1, c, lattice.horizontal(r + 1, c));
        if (r > 0) visit(r - 1, c, lattice.horizontal(r, c));
      }
    }
  return out;
}

std::int64_t quantize_disparity(double d) {
  if (!std::isfinite(d)) throw Error("non-finite disparity");
  return static_cast<std::int64_t>(std::round(d / kDisparityStep));
}

double dequantize_disparity(std::int64_t q) { return static_cast<double>(q) * kDisparityStep; }

std::vector<std::uint8_t> encode_disparities(const std::vector<double>& values) {
  RangeEncoder enc;
  SignedModels m;
  std::int64_t prev = 0;
  for (double d : values) {
    const std::int64_t q = quantize_disparity(d);
    encode_signed(enc, q - prev, m);
    prev = q;
  }
  return enc.finish();
}

std::vector<double> decode_disparities(std::span<const std::uint8_t> bytes, int count) {
  if (count < 0) throw FormatError("negative disparity count");
  RangeDecoder dec(bytes, "disparity");
  SignedModels m;
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(count));
  std::int64_t prev = 0;
  for (int i = 0; i < count; ++i) {
    prev += decode_signed(dec, m);
    out.push_back(dequantize_disparity(prev));
  }
  dec.finish();
  return out;
}

}  // namespace lfgt
