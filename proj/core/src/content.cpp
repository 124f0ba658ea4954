#include "msgeo/content.hpp"

#include <array>
#include <algorithm>
#include <cmath>
#include <numeric>

namespace msgeo {

double pow2_at_least(double x) {
  if (!(x > 0.0)) throw Error("pow2_at_least: need a positive value");
  double p = std::exp2(std::ceil(std::log2(x)));
  while (p < x) p *= 2.0;
  while (p / 2.0 >= x) p /= 2.0;
  return p;
}

namespace {

bool is_pow2(double x) {
  if (!(x > 0.0)) return false;
  const double l = std::log2(x);
  return std::abs(l - std::round(l)) < 1e-9;
}

struct ContentDp {
  const Mat& pts;
  int d;
  std::vector<std::pair<unsigned, int>> buf;  // (child code, point index)

  double run(std::vector<int> idx, const Vec& corner, double side, int levels) {
    buf.reserve(idx.size());
    return rec(std::move(idx), corner, side, levels);
  }

  double rec(std::vector<int> idx, const Vec& corner, double side, int levels) {
    const double cell_cost = std::pow(side, d);
    if (idx.size() == 1) return std::pow(side * std::exp2(-levels), d);  // lone leaf chain
    if (levels == 0) return cell_cost;
    const int n = static_cast<int>(pts.cols());
    const double half = side / 2.0;
    std::vector<std::pair<unsigned, int>> coded;
    coded.reserve(idx.size());
    for (int p : idx) {
      unsigned c = 0;
      for (int a = 0; a < n; ++a)
        if (pts(p, a) >= corner[a] + half) c |= (1u << a);
      coded.emplace_back(c, p);
    }
    std::sort(coded.begin(), coded.end());
    double sum = 0.0;
    std::size_t i = 0;
    while (i < coded.size()) {
      const unsigned c = coded[i].first;
      std::size_t j = i;
      std::vector<int> sub;
      while (j < coded.size() && coded[j].first == c) sub.push_back(coded[j++].second);
      Vec child_corner = corner;
      for (int a = 0; a < n; ++a)
        if ((c >> a) & 1u) child_corner[a] += half;
      sum += rec(std::move(sub), child_corner, half, levels - 1);
      if (sum >= cell_cost) return cell_cost;  // min() saturates
      i = j;
    }
    return std::min(cell_cost, sum);
  }
};

}  // namespace

double dyadic_content_points(const Mat& pts, int d, double min_cell) {
  if (pts.rows() == 0) return 0.0;
  if (d < 0) throw Error("dyadic_content: d must be >= 0");
  if (!is_pow2(min_cell)) throw Error("dyadic_content: min_cell must be a power of two");
  const Vec lo = pts.colwise().minCoeff().transpose().array().floor().matrix();
  double ext = 0.0;
  for (int c = 0; c < pts.cols(); ++c) ext = std::max(ext, pts.colwise().maxCoeff()(c) - lo[c]);
  double root = pow2_at_least(std::max(ext, min_cell));
  const int levels = std::max(0, static_cast<int>(std::llround(std::log2(root / min_cell))));

  std::vector<int> idx(static_cast<std::size_t>(pts.rows()));
  std::iota(idx.begin(), idx.end(), 0);
  ContentDp dp{pts, d, {}};
  return dp.run(std::move(idx), lo, root, levels);
}

double dyadic_content(const PointCloud& cloud, int d, double min_cell) {
  if (!is_pow2(min_cell)) throw Error("dyadic_content: min_cell must be a power of two");
  if (min_cell < cloud.resolution() * (1.0 - 1e-12))
    throw Error("dyadic_content: min_cell finer than the cloud resolution");
  return dyadic_content_points(cloud.points(), d, min_cell);
}

double content_min_cell(double resolution, double diam) {
  return pow2_at_least(std::max(resolution, std::exp2(-20.0) * std::max(diam, resolution)));
}

ContentAccumulator::ContentAccumulator(DyadicLattice lattice, int leaf_level, int d)
    : lattice_(std::move(lattice)), leaf_level_(leaf_level), d_(d) {
  if (leaf_level_ < 0) throw Error("ContentAccumulator: leaf level must be >= 0");
  cell_cost_.resize(static_cast<std::size_t>(leaf_level_ + 1));
  for (int k = 0; k <= leaf_level_; ++k)
    cell_cost_[static_cast<std::size_t>(k)] = std::pow(lattice_.side(k), d_);
  width_ = std::max(1, leaf_level_);
  packed_ = static_cast<long>(lattice_.n) * width_ <= 62;
  if (packed_)
    fast_.resize(static_cast<std::size_t>(leaf_level_ + 1));
  else
    slow_.resize(static_cast<std::size_t>(leaf_level_ + 1));
}

ContentAccumulator ContentAccumulator::for_points(const Mat& pts, int d, double min_cell) {
  if (pts.rows() == 0) throw Error("ContentAccumulator: empty candidate set");
  DyadicLattice lat;
  lat.n = static_cast<int>(pts.cols());
  lat.corner = pts.colwise().minCoeff().transpose().array().floor().matrix();
  double ext = 0.0;
  for (int c = 0; c < lat.n; ++c) ext = std::max(ext, pts.colwise().maxCoeff()(c) - lat.corner[c]);
  lat.root_side = pow2_at_least(std::max(ext, min_cell));
  const int levels = std::max(0, static_cast<int>(std::llround(std::log2(lat.root_side / min_cell))));
  return ContentAccumulator(std::move(lat), levels, d);
}

void ContentAccumulator::insert(const Eigen::Ref<const Vec>& x) {
  // leaf cell coordinates without heap traffic
  std::array<std::int64_t, 32> leaf_buf{};
  const int n = lattice_.n;
  const bool small_n = n <= 32;
  Coords leaf_vec;
  if (!small_n) leaf_vec = lattice_.cell_of_clamped(x, leaf_level_);
  if (small_n) {
    const double s = lattice_.side(leaf_level_);
    const std::int64_t cells = std::int64_t{1} << leaf_level_;
    for (int i = 0; i < n; ++i) {
      auto k = static_cast<std::int64_t>(std::floor((x[i] - lattice_.corner[i]) / s));
      leaf_buf[static_cast<std::size_t>(i)] = std::clamp<std::int64_t>(k, 0, cells - 1);
    }
  }
  const std::int64_t* leaf = small_n ? leaf_buf.data() : leaf_vec.data();

  if (packed_) {
    // coords at level k are the leaf coords shifted down; keys pack each
    // coordinate into `width_` bits
    auto key_at = [&](int k) {
      std::uint64_t key = 0;
      const int shift = leaf_level_ - k;
      for (int i = 0; i < n; ++i)
        key |= static_cast<std::uint64_t>(leaf[i] >> shift) << (i * width_);
      return key;
    };
    auto& leafs = fast_[static_cast<std::size_t>(leaf_level_)];
    const auto leaf_key = key_at(leaf_level_);
    double child_cost_new = cell_cost_[static_cast<std::size_t>(leaf_level_)];
    if (!leafs.try_emplace(leaf_key, Node{0.0, child_cost_new}).second) return;
    for (int k = leaf_level_ - 1; k >= 0; --k) {
      auto [it, created] = fast_[static_cast<std::size_t>(k)].try_emplace(key_at(k), Node{});
      Node& nd = it->second;
      const double old_cost = created ? 0.0 : nd.cost;
      nd.child_sum += child_cost_new;
      nd.cost = std::min(cell_cost_[static_cast<std::size_t>(k)], nd.child_sum);
      child_cost_new = nd.cost - old_cost;
      if (child_cost_new == 0.0 && !created) return;  // ancestors unchanged
    }
    return;
  }

  std::vector<Coords> chain(static_cast<std::size_t>(leaf_level_ + 1));
  chain[static_cast<std::size_t>(leaf_level_)] = Coords(leaf, leaf + n);
  for (int k = leaf_level_; k > 0; --k)
    chain[static_cast<std::size_t>(k - 1)] = DyadicLattice::parent_of(chain[static_cast<std::size_t>(k)]);

  auto& leafs = slow_[static_cast<std::size_t>(leaf_level_)];
  double child_cost_new = cell_cost_[static_cast<std::size_t>(leaf_level_)];
  if (!leafs.try_emplace(chain[static_cast<std::size_t>(leaf_level_)], Node{0.0, child_cost_new}).second)
    return;
  for (int k = leaf_level_ - 1; k >= 0; --k) {
    auto [it, created] = slow_[static_cast<std::size_t>(k)].try_emplace(chain[static_cast<std::size_t>(k)], Node{});
    Node& nd = it->second;
    const double old_cost = created ? 0.0 : nd.cost;
    nd.child_sum += child_cost_new;
    nd.cost = std::min(cell_cost_[static_cast<std::size_t>(k)], nd.child_sum);
    child_cost_new = nd.cost - old_cost;
    if (child_cost_new == 0.0 && !created) return;  // ancestors unchanged
  }
}

double ContentAccumulator::value() const {
  double v = 0.0;
  if (packed_) {
    for (const auto& [k, nd] : fast_[0]) v += nd.cost;  // a clamped root has one cell
  } else {
    for (const auto& [c, nd] : slow_[0]) v += nd.cost;
  }
  return v;
}

void ContentAccumulator::reset() {
  for (auto& level : fast_) level.clear();
  for (auto& level : slow_) level.clear();
}

}  // namespace msgeo
