#pragma once

#include "eaae/mapping.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace eaae {

/// Frontier voxels in ascending voxel-index order.
using FrontierSet = std::vector<VoxelKey>;

struct FrontierCluster {
  int id = 0;
  std::vector<VoxelKey> members;
  Vec3 centroid = Vec3::Zero();
  int count = 0;        // information gain: number of member voxels
  double radius = 0.0;  // max member-centre distance to the centroid
};

struct Viewpoint {
  Vec3 position = Vec3::Zero();
  double yaw = 0.0;
  int cluster_id = 0;
};

/// Free voxels with at least one unknown face neighbour.
FrontierSet detect_frontiers(const VoxelMap& map);

/// Largest cluster radius still fully visible from one viewpoint at range
/// d_max: tan(fov_hor / 2) * d_max.
double cluster_cutoff(double fov_hor, double d_max);

/// Divisive 2-means: a FIFO work queue splits every cluster whose radius
/// exceeds r_max. Ids follow emission order. The seed only picks the sweep
/// start for clusters too large for an exact farthest-pair search.
std::vector<FrontierCluster> cluster_frontiers(const FrontierSet& frontiers, const MapGeometry& geometry,
                                               double r_max, std::uint64_t seed);

/// Members above this size use the double-sweep farthest-pair heuristic.
inline constexpr std::size_t kExactFarthestPairLimit = 2000;

/// Drops clusters with an occupied voxel centre within `clearance` of the
/// centroid.
std::vector<FrontierCluster> filter_feasible(const std::vector<FrontierCluster>& clusters, const VoxelMap& map,
                                             double clearance);

/// The K largest clusters by count, ties by lower id, gain-sorted.
std::vector<FrontierCluster> top_k_by_gain(std::vector<FrontierCluster> clusters, int k);

struct ViewpointConfig {
  double d_view = 2.5;
  int n_azimuth = 8;
  double z_min = 0.5;
  double z_max = 2.0;
  double clearance = 0.4;
};

/// Ring of candidate positions around the centroid, kept when in known free
/// space with clearance. With a reference position the ring starts at the
/// bearing toward it and alternates outward (0, +1, -1, +2, ...); without
/// one it starts at +x and runs counter-clockwise.
std::vector<Viewpoint> sample_viewpoints(const FrontierCluster& cluster, const VoxelMap& map,
                                         const ViewpointConfig& config,
                                         const std::optional<Vec3>& reference = std::nullopt);

/// Text export for visualization: one line per cluster followed by its
/// viewpoints.
std::string export_clusters(const std::vector<FrontierCluster>& clusters,
                            const std::vector<std::vector<Viewpoint>>& viewpoints);

}  // namespace eaae
