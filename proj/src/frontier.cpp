#include "eaae/frontier.hpp"

#include <algorithm>
#include <deque>
#include <iomanip>
#include <numeric>
#include <random>
#include <sstream>

namespace eaae {

FrontierSet detect_frontiers(const VoxelMap& map) {
  const auto& g = map.geometry();
  FrontierSet out;
  const std::size_t n = g.size();
  for (std::size_t idx = 0; idx < n; ++idx) {
    if (map.state_at_index(idx) != VoxelState::Free) continue;
    const VoxelKey key = g.key_at(idx);
    for (const VoxelKey& nb : neighbors6(g, key)) {
      if (map.is_unknown(nb)) {
        out.push_back(key);
        break;
      }
    }
  }
  return out;
}

double cluster_cutoff(double fov_hor, double d_max) { return std::tan(0.5 * fov_hor) * d_max; }

namespace {

using Members = std::vector<std::uint32_t>;

struct Stats {
  Vec3 centroid;
  double radius;
};

Stats stats_of(const std::vector<Vec3>& pts, const Members& m) {
  Vec3 c = Vec3::Zero();
  for (auto i : m) c += pts[i];
  c /= double(m.size());
  double r2 = 0.0;
  for (auto i : m) r2 = std::max(r2, (pts[i] - c).squaredNorm());
  return {c, std::sqrt(r2)};
}

std::uint32_t farthest_from(const std::vector<Vec3>& pts, const Members& m, const Vec3& from) {
  std::uint32_t best = m.front();
  double best_d = -1.0;
  for (auto i : m) {
    const double d = (pts[i] - from).squaredNorm();
    if (d > best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

std::pair<std::uint32_t, std::uint32_t> farthest_pair(const std::vector<Vec3>& pts, const Members& m,
                                                      std::mt19937_64& rng) {
  if (m.size() <= kExactFarthestPairLimit) {
    std::pair<std::uint32_t, std::uint32_t> best{m[0], m[0]};
    double best_d = -1.0;
    for (std::size_t a = 0; a < m.size(); ++a)
      for (std::size_t b = a + 1; b < m.size(); ++b) {
        const double d = (pts[m[a]] - pts[m[b]]).squaredNorm();
        if (d > best_d) {
          best_d = d;
          best = {m[a], m[b]};
        }
      }
    return best;
  }
  std::uniform_int_distribution<std::size_t> pick(0, m.size() - 1);
  const std::uint32_t s = m[pick(rng)];
  const std::uint32_t a = farthest_from(pts, m, pts[s]);
  const std::uint32_t b = farthest_from(pts, m, pts[a]);
  return {a, b};
}

std::pair<Members, Members> median_split(const std::vector<Vec3>& pts, const Members& m) {
  Vec3 mean = Vec3::Zero();
  for (auto i : m) mean += pts[i];
  mean /= double(m.size());
  Vec3 var = Vec3::Zero();
  for (auto i : m) var += (pts[i] - mean).cwiseAbs2();
  int axis = 0;
  var.maxCoeff(&axis);
  Members sorted = m;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [&](std::uint32_t a, std::uint32_t b) { return pts[a][axis] < pts[b][axis]; });
  const std::size_t half = sorted.size() / 2;
  Members left(sorted.begin(), sorted.begin() + std::ptrdiff_t(half));
  Members right(sorted.begin() + std::ptrdiff_t(half), sorted.end());
  std::sort(left.begin(), left.end());
  std::sort(right.begin(), right.end());
  return {left, right};
}

std::pair<Members, Members> two_means(const std::vector<Vec3>& pts, const Members& m, std::mt19937_64& rng) {
  const auto [a, b] = farthest_pair(pts, m, rng);
  Vec3 c0 = pts[a];
  Vec3 c1 = pts[b];
  std::vector<std::uint8_t> side(m.size(), 2);
  constexpr int kMaxIterations = 20;
  for (int it = 0; it < kMaxIterations; ++it) {
    bool changed = false;
    Vec3 s0 = Vec3::Zero(), s1 = Vec3::Zero();
    std::size_t n0 = 0, n1 = 0;
    for (std::size_t q = 0; q < m.size(); ++q) {
      const Vec3& p = pts[m[q]];
      const std::uint8_t s = (p - c1).squaredNorm() < (p - c0).squaredNorm() ? 1 : 0;
      if (s != side[q]) {
        side[q] = s;
        changed = true;
      }
      if (s == 0) {
        s0 += p;
        ++n0;
      } else {
        s1 += p;
        ++n1;
      }
    }
    if (!changed || n0 == 0 || n1 == 0) break;
    c0 = s0 / double(n0);
    c1 = s1 / double(n1);
  }
  Members left, right;
  for (std::size_t q = 0; q < m.size(); ++q) (side[q] == 0 ? left : right).push_back(m[q]);
  if (left.empty() || right.empty()) return median_split(pts, m);
  return {left, right};
}

}  // namespace

std::vector<FrontierCluster> cluster_frontiers(const FrontierSet& frontiers, const MapGeometry& geometry,
                                               double r_max, std::uint64_t seed) {
  std::vector<FrontierCluster> out;
  if (frontiers.empty()) return out;
  std::vector<Vec3> pts;
  pts.reserve(frontiers.size());
  for (const auto& k : frontiers) pts.push_back(geometry.center(k));

  std::mt19937_64 rng(seed);
  std::deque<Members> queue;
  Members all(frontiers.size());
  std::iota(all.begin(), all.end(), 0u);
  queue.push_back(std::move(all));

  while (!queue.empty()) {
    Members m = std::move(queue.front());
    queue.pop_front();
    const Stats st = stats_of(pts, m);
    if (st.radius <= r_max || m.size() < 2) {
      FrontierCluster c;
      c.id = int(out.size());
      c.members.reserve(m.size());
      for (auto i : m) c.members.push_back(frontiers[i]);
      c.centroid = st.centroid;
      c.count = int(m.size());
      c.radius = st.radius;
      out.push_back(std::move(c));
      continue;
    }
    auto [left, right] = two_means(pts, m, rng);
    queue.push_back(std::move(left));
    queue.push_back(std::move(right));
  }
  return out;
}

std::vector<FrontierCluster> filter_feasible(const std::vector<FrontierCluster>& clusters, const VoxelMap& map,
                                             double clearance) {
  std::vector<FrontierCluster> out;
  for (const auto& c : clusters)
    if (!map.occupied_within(c.centroid, clearance)) out.push_back(c);
  return out;
}

std::vector<FrontierCluster> top_k_by_gain(std::vector<FrontierCluster> clusters, int k) {
  std::stable_sort(clusters.begin(), clusters.end(), [](const FrontierCluster& a, const FrontierCluster& b) {
    if (a.count != b.count) return a.count > b.count;
    return a.id < b.id;
  });
  if (k >= 0 && std::size_t(k) < clusters.size()) clusters.resize(std::size_t(k));
  return clusters;
}

std::vector<Viewpoint> sample_viewpoints(const FrontierCluster& cluster, const VoxelMap& map,
                                         const ViewpointConfig& config, const std::optional<Vec3>& reference) {
  std::vector<Viewpoint> out;
  const int n = std::max(1, config.n_azimuth);
  const double step = 2.0 * kPi / n;
  double base = 0.0;
  std::vector<int> order;
  if (reference) {
    const Vec3 d = *reference - cluster.centroid;
    if (d.head<2>().norm() > 1e-9) base = std::atan2(d.y(), d.x());
    order.push_back(0);
    for (int s = 1; int(order.size()) < n; ++s) {
      order.push_back(s);
      if (int(order.size()) < n) order.push_back(n - s);
    }
  } else {
    for (int j = 0; j < n; ++j) order.push_back(j);
  }

  const auto& g = map.geometry();
  const double z = std::clamp(cluster.centroid.z(), config.z_min, config.z_max);
  for (int j : order) {
    const double a = base + step * j;
    const Vec3 p(cluster.centroid.x() + config.d_view * std::cos(a), cluster.centroid.y() + config.d_view * std::sin(a),
                 z);
    const auto key = g.key_of(p);
    if (!key || !map.is_free(*key)) continue;
    if (map.near_occupied(*key, config.clearance)) continue;
    const Vec3 to_c = cluster.centroid - p;
    out.push_back({p, std::atan2(to_c.y(), to_c.x()), cluster.id});
  }
  return out;
}

std::string export_clusters(const std::vector<FrontierCluster>& clusters,
                            const std::vector<std::vector<Viewpoint>>& viewpoints) {
  std::ostringstream os;
  os << std::setprecision(9);
  os << "# cluster id cx cy cz count radius | viewpoint x y z yaw\n";
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    const auto& c = clusters[i];
    os << "cluster " << c.id << ' ' << c.centroid.x() << ' ' << c.centroid.y() << ' ' << c.centroid.z() << ' '
       << c.count << ' ' << c.radius << '\n';
    if (i < viewpoints.size())
      for (const auto& v : viewpoints[i])
        os << "viewpoint " << v.position.x() << ' ' << v.position.y() << ' ' << v.position.z() << ' ' << v.yaw
           << '\n';
  }
  return os.str();
}

}  // namespace eaae
