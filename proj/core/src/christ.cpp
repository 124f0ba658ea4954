#include "msgeo/christ.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "msgeo/kd_tree.hpp"

namespace msgeo {

Ball CubeForest::cube_ball(int id, double scale) const {
  if (!(scale > 0.0)) throw Error("cube_ball: scale must be positive");
  return Ball(center(id), scale * size_of(id));
}

std::vector<int> CubeForest::descendants(int id) const {
  std::vector<int> out{id};
  std::size_t head = 0;
  while (head < out.size()) {
    const auto& c = cube(out[head++]);
    out.insert(out.end(), c.children.begin(), c.children.end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

CubeForest build_christ_cubes(const PointCloud& cloud, double rho, int depth, std::uint64_t seed) {
  (void)seed;
  if (!(rho > 0.0 && rho <= 0.5)) throw Error("build_christ_cubes: rho must lie in (0, 1/2]");
  if (depth < 1) throw Error("build_christ_cubes: depth must be >= 1");
  const std::size_t npts = cloud.size();
  const double diam = cloud.diameter();
  // ell(Q) = rho^k * diam/(1-rho): the 1/(1-rho) absorbs the telescoping of
  // nearest-net-point assignment chains, so members(Q) ⊆ B(zeta_Q, ell(Q))
  // holds exactly for every rho <= 1/2
  const double diam_scale = (diam > 0.0 ? diam : cloud.resolution()) / (1.0 - rho);
  if (npts > 1 && 5.0 * std::pow(rho, depth) * diam < cloud.resolution() * (1.0 - 1e-12))
    throw Error("build_christ_cubes: 5*rho^depth*diam below the cloud resolution");

  CubeForest f;
  f.cloud_ = &cloud;
  f.rho = rho;
  f.diam_scale = diam_scale;

  // one farthest-point sweep; insertion radii are non-increasing, so every
  // net X_k is a prefix of the same ordering
  std::vector<int> order;
  std::vector<double> radius;  // radius[i] = dist to the net when order[i] was added
  {
    std::vector<double> dist(npts, std::numeric_limits<double>::infinity());
    order.push_back(0);
    radius.push_back(std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < npts; ++i)
      dist[i] = (cloud.point(static_cast<int>(i)) - cloud.point(0)).norm();
    while (order.size() < npts) {
      int arg = -1;
      double best = -1.0;
      for (std::size_t i = 0; i < npts; ++i)
        if (dist[i] > best) {
          best = dist[i];
          arg = static_cast<int>(i);
        }
      if (!(best > 0.0)) break;
      order.push_back(arg);
      radius.push_back(best);
      for (std::size_t i = 0; i < npts; ++i)
        dist[i] = std::min(dist[i], (cloud.point(static_cast<int>(i)) - cloud.point(arg)).norm());
    }
  }

  // X_0 = {lowest index}; X_k = prefix of points inserted at radius >= rho^k*diam
  int eff_depth = depth;
  f.nets_.push_back({order[0]});
  for (int k = 1; k <= depth; ++k) {
    const double sep = std::pow(rho, k) * diam;
    std::size_t len = 1;
    while (len < order.size() && radius[len] >= sep) ++len;
    std::vector<int> net(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(len));
    std::sort(net.begin(), net.end());
    if (npts > 1 && net.size() == npts && f.nets_.back().size() == npts) {
      eff_depth = k - 1;
      f.warnings.push_back("nets saturated at level " + std::to_string(k - 1) +
                           "; forest truncated");
      break;
    }
    f.nets_.push_back(std::move(net));
  }
  f.depth = eff_depth;

  // cubes: one per net point per level; parents by nearest coarser net point
  f.by_level_.resize(static_cast<std::size_t>(f.depth + 1));
  std::vector<std::vector<int>> cube_of_net(static_cast<std::size_t>(f.depth + 1));
  for (int k = 0; k <= f.depth; ++k) {
    const auto& net = f.nets_[static_cast<std::size_t>(k)];
    KdTree coarser = k > 0 ? KdTree(cloud.points(), f.nets_[static_cast<std::size_t>(k - 1)]) : KdTree();
    cube_of_net[static_cast<std::size_t>(k)].resize(net.size());
    for (std::size_t i = 0; i < net.size(); ++i) {
      ChristCube q;
      q.id = static_cast<int>(f.cubes_.size());
      q.level = k;
      q.net_point = net[i];
      q.size = 5.0 * std::pow(rho, k) * (diam_scale / 5.0);
      if (k > 0) {
        const int pnet = coarser.nearest(cloud.point(net[i])).first;
        const auto& prevnet = f.nets_[static_cast<std::size_t>(k - 1)];
        const auto pos = std::lower_bound(prevnet.begin(), prevnet.end(), pnet) - prevnet.begin();
        q.parent = cube_of_net[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(pos)];
        f.cubes_[static_cast<std::size_t>(q.parent)].children.push_back(q.id);
      }
      cube_of_net[static_cast<std::size_t>(k)][i] = q.id;
      f.by_level_[static_cast<std::size_t>(k)].push_back(q.id);
      f.cubes_.push_back(std::move(q));
    }
  }

  // members: every point chains through its nearest finest-net point
  f.cube_of_.assign(static_cast<std::size_t>(f.depth + 1), std::vector<int>(npts, -1));
  {
    const auto& finest = f.nets_[static_cast<std::size_t>(f.depth)];
    KdTree leaf_net(cloud.points(), finest);
    for (std::size_t p = 0; p < npts; ++p) {
      const int hit = leaf_net.nearest(cloud.point(static_cast<int>(p))).first;
      const auto pos = std::lower_bound(finest.begin(), finest.end(), hit) - finest.begin();
      int cid = cube_of_net[static_cast<std::size_t>(f.depth)][static_cast<std::size_t>(pos)];
      for (int k = f.depth; k >= 0; --k) {
        f.cube_of_[static_cast<std::size_t>(k)][p] = cid;
        f.cubes_[static_cast<std::size_t>(cid)].members.push_back(static_cast<int>(p));
        cid = f.cubes_[static_cast<std::size_t>(cid)].parent;
      }
    }
  }
  for (auto& q : f.cubes_) std::sort(q.members.begin(), q.members.end());

  // observed interior-ball constant: largest c with B(zeta, c*ell) ∩ cloud ⊆ Q
  double c0 = 1.0;
  for (const auto& q : f.cubes_) {
    const auto cand = cloud.tree().within(cloud.point(q.net_point), q.size);
    double foreign = std::numeric_limits<double>::infinity();
    for (int p : cand) {
      if (std::binary_search(q.members.begin(), q.members.end(), p)) continue;
      foreign = std::min(foreign, (cloud.point(p) - cloud.point(q.net_point)).norm());
    }
    if (std::isfinite(foreign)) c0 = std::min(c0, foreign / q.size);
  }
  f.c0_observed = c0;
  return f;
}

std::string CubeForest::to_json(bool include_members) const {
  nlohmann::ordered_json j;
  j["rho"] = rho;
  j["depth"] = depth;
  j["c0_observed"] = c0_observed;
  j["warnings"] = warnings;
  j["cubes"] = nlohmann::ordered_json::array();
  for (const auto& q : cubes_) {
    nlohmann::ordered_json jq;
    jq["id"] = q.id;
    jq["level"] = q.level;
    const Vec c = center(q.id);
    jq["center"] = std::vector<double>(c.data(), c.data() + c.size());
    jq["size"] = q.size;
    jq["parent"] = q.parent;
    jq["children"] = q.children;
    jq["member_count"] = q.members.size();
    if (include_members) jq["members"] = q.members;
    j["cubes"].push_back(jq);
  }
  return j.dump(2);
}

}  // namespace msgeo
