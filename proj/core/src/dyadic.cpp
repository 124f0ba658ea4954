#include "msgeo/dyadic.hpp"

#include <algorithm>
#include <cmath>

namespace msgeo {

Coords DyadicLattice::cell_of_clamped(const Eigen::Ref<const Vec>& x, int level) const {
  const double s = side(level);
  const std::int64_t cells = std::int64_t{1} << level;
  Coords c(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    auto k = static_cast<std::int64_t>(std::floor((x[i] - corner[i]) / s));
    c[static_cast<std::size_t>(i)] = std::clamp<std::int64_t>(k, 0, cells - 1);
  }
  return c;
}

Coords DyadicLattice::cell_of(const Eigen::Ref<const Vec>& x, int level) const {
  const double s = side(level);
  Coords c(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    c[static_cast<std::size_t>(i)] = static_cast<std::int64_t>(std::floor((x[i] - corner[i]) / s));
  return c;
}

Vec DyadicLattice::cell_corner(int level, const Coords& c) const {
  const double s = side(level);
  Vec out(n);
  for (int i = 0; i < n; ++i) out[i] = corner[i] + s * static_cast<double>(c[static_cast<std::size_t>(i)]);
  return out;
}

Coords DyadicLattice::parent_of(const Coords& c) {
  Coords p(c.size());
  for (std::size_t i = 0; i < c.size(); ++i)
    p[i] = (c[i] >= 0) ? (c[i] >> 1) : -((-c[i] + 1) >> 1);
  return p;
}

Coords DyadicLattice::child_of(const Coords& c, unsigned mask) {
  Coords k(c.size());
  for (std::size_t i = 0; i < c.size(); ++i)
    k[i] = 2 * c[i] + static_cast<std::int64_t>((mask >> i) & 1u);
  return k;
}

double DyadicLattice::dist_to_cell(const Eigen::Ref<const Vec>& x, int level, const Coords& c) const {
  const double s = side(level);
  double d2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double lo = corner[i] + s * static_cast<double>(c[static_cast<std::size_t>(i)]);
    const double hi = lo + s;
    double d = 0.0;
    if (x[i] < lo) d = lo - x[i];
    else if (x[i] > hi) d = x[i] - hi;
    d2 += d * d;
  }
  return std::sqrt(d2);
}

bool DyadicLattice::cell_contains(const Eigen::Ref<const Vec>& x, int level, const Coords& c,
                                  double tol) const {
  const double s = side(level);
  for (int i = 0; i < n; ++i) {
    const double lo = corner[i] + s * static_cast<double>(c[static_cast<std::size_t>(i)]);
    if (x[i] < lo - tol || x[i] > lo + s + tol) return false;
  }
  return true;
}

DyadicLattice make_lattice(const PointCloud& cloud, double min_side) {
  DyadicLattice lat;
  lat.n = cloud.n();
  lat.corner = cloud.bbox_min().array().floor().matrix();
  double ext = 0.0;
  for (int i = 0; i < lat.n; ++i) ext = std::max(ext, cloud.bbox_max()[i] - lat.corner[i]);
  ext = std::max({ext, min_side, 1e-300});
  lat.root_side = std::exp2(std::ceil(std::log2(ext)));
  if (lat.root_side < ext) lat.root_side *= 2.0;  // guard rounding at exact powers
  return lat;
}

DyadicIndex::DyadicIndex(const PointCloud& cloud, int max_level)
    : cloud_(&cloud), max_level_(max_level) {
  if (max_level < 0) throw Error("DyadicIndex: max_level must be >= 0");
  lattice_ = make_lattice(cloud);
  if (lattice_.side(max_level) < cloud.resolution() / 4.0)
    throw Error("DyadicIndex: cells at max_level are finer than resolution/4");

  by_level_.resize(static_cast<std::size_t>(max_level + 1));
  lookup_.resize(static_cast<std::size_t>(max_level + 1));

  // level sweep; each level re-buckets the previous level's member lists
  std::vector<int> prev;  // cube ids at level-1
  for (int k = 0; k <= max_level; ++k) {
    std::map<Coords, std::vector<int>> cells;
    if (k == 0) {
      std::vector<int> all(cloud.size());
      for (std::size_t i = 0; i < cloud.size(); ++i) all[i] = static_cast<int>(i);
      cells.emplace(Coords(static_cast<std::size_t>(lattice_.n), 0), std::move(all));
    } else {
      for (int pid : prev) {
        const auto& pc = cubes_[static_cast<std::size_t>(pid)];
        std::map<Coords, std::vector<int>> sub;
        for (int pt : pc.members)
          sub[lattice_.cell_of_clamped(cloud.point(pt), k)].push_back(pt);
        for (auto& [c, mem] : sub) cells.emplace(c, std::move(mem));
      }
    }
    for (auto& [c, mem] : cells) {
      DyadicCubeRec rec;
      rec.id = static_cast<int>(cubes_.size());
      rec.level = k;
      rec.coords = c;
      rec.members = std::move(mem);
      if (k > 0) {
        const int pid = lookup_[static_cast<std::size_t>(k - 1)].at(DyadicLattice::parent_of(c));
        rec.parent = pid;
        cubes_[static_cast<std::size_t>(pid)].children.push_back(rec.id);
      }
      lookup_[static_cast<std::size_t>(k)].emplace(c, rec.id);
      by_level_[static_cast<std::size_t>(k)].push_back(rec.id);
      cubes_.push_back(std::move(rec));
    }
    prev = by_level_[static_cast<std::size_t>(k)];
  }
}

int DyadicIndex::find(int level, const Coords& c) const {
  if (level < 0 || level > max_level_) return -1;
  const auto& m = lookup_[static_cast<std::size_t>(level)];
  auto it = m.find(c);
  return it == m.end() ? -1 : it->second;
}

std::vector<std::size_t> DyadicIndex::occupancy_counts() const {
  std::vector<std::size_t> out;
  out.reserve(by_level_.size());
  for (const auto& v : by_level_) out.push_back(v.size());
  return out;
}

DyadicIndex build_dyadic_index(const PointCloud& cloud, int max_level) {
  return DyadicIndex(cloud, max_level);
}

}  // namespace msgeo
