#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace vrjp {

using Vertex = std::size_t;

struct Edge {
  Vertex u = 0;
  Vertex v = 0;
  double weight = 0.0;
};

struct Neighbor {
  Vertex vertex = 0;
  double weight = 0.0;
  std::size_t edge = 0;  // index into WeightedGraph::edges()
};

/// Centered box [center - half_side, center + half_side]^d of Z^d.
struct BoxSpec {
  int dimension = 1;
  int half_side = 1;
  std::vector<int> center;  // empty means the origin
  bool wired = false;

  int side() const { return 2 * half_side + 1; }
  std::size_t site_count() const;
};

/// Lattice geometry carried by graphs produced by build_box / wire_box.
struct LatticeInfo {
  BoxSpec spec;
  /// Uniform nearest-neighbour weight the box was built with; absent once the
  /// weights have been altered (random weights, theta scaling).
  std::optional<double> uniform_weight;
  double theta = 1.0;
  std::optional<double> theta_delta;
};

/// Finite, connected, loop-free weighted graph with vertex weights theta and
/// boundary field eta. Immutable once built; builders return new graphs.
class WeightedGraph {
 public:
  /// Validates and builds. Throws std::invalid_argument on a non-positive
  /// weight, self-loop, duplicate edge, theta <= 0, eta < 0, or a
  /// disconnected graph. An empty eta means eta == 0.
  static WeightedGraph from_edges(std::size_t vertex_count, std::vector<Edge> edges,
                                  std::vector<double> theta, std::vector<double> eta = {},
                                  std::optional<Vertex> boundary = std::nullopt);

  std::size_t vertex_count() const { return theta_.size(); }
  std::span<const Edge> edges() const { return edges_; }
  std::span<const Neighbor> neighbors(Vertex i) const {
    return {adjacency_.data() + offsets_[i], adjacency_.data() + offsets_[i + 1]};
  }
  std::size_t degree(Vertex i) const { return offsets_[i + 1] - offsets_[i]; }
  /// W_{i,j}; zero when i and j are not adjacent (including i == j).
  double weight(Vertex i, Vertex j) const;
  std::span<const double> theta() const { return theta_; }
  std::span<const double> eta() const { return eta_; }
  bool eta_is_zero() const;
  std::optional<Vertex> boundary() const { return boundary_; }
  const std::optional<LatticeInfo>& lattice() const { return lattice_; }

  WeightedGraph with_edge_weights(std::span<const double> weights) const;
  WeightedGraph with_theta(std::vector<double> theta) const;
  WeightedGraph with_eta(std::vector<double> eta) const;

  friend bool operator==(const WeightedGraph& a, const WeightedGraph& b);

 private:
  friend WeightedGraph build_box(const BoxSpec&, double, double);
  friend WeightedGraph wire_box(const WeightedGraph&, double, std::span<const double>);
  friend WeightedGraph graph_from_json(const nlohmann::json&);

  void index();

  std::vector<Edge> edges_;
  std::vector<double> theta_;
  std::vector<double> eta_;
  std::optional<Vertex> boundary_;
  std::optional<LatticeInfo> lattice_;
  std::vector<std::size_t> offsets_;
  std::vector<Neighbor> adjacency_;
};

/// Nearest-neighbour box with uniform weight W and vertex weight theta,
/// vertices in row-major lattice order (last coordinate fastest).
WeightedGraph build_box(const BoxSpec& spec, double weight, double theta);

/// Adds the boundary vertex delta (index N, last) joined to each boundary
/// site i with W_{delta,i} = summed weight of i's missing lattice neighbours.
/// `cut_weights`, when non-empty, gives the weight of each missing lattice
/// edge in the order enumerated by cut_edge_count(); otherwise the box's
/// uniform weight is used for every cut edge.
WeightedGraph wire_box(const WeightedGraph& box, double theta_delta,
                       std::span<const double> cut_weights = {});

/// Number of lattice edges leaving the box (the edges wire_box collapses).
std::size_t cut_edge_count(const BoxSpec& spec);

/// W'_{i,j} = W_{i,j} theta_i theta_j, theta' = 1. Requires eta == 0.
WeightedGraph scale_to_unit_theta(const WeightedGraph& graph);

/// Simple path on n vertices with uniform weights.
WeightedGraph build_path(std::size_t n, double weight, double theta);

/// Cycle on n >= 3 vertices with uniform weights.
WeightedGraph build_cycle(std::size_t n, double weight, double theta);

// Lattice helpers for box graphs (boundary vertex excluded).
Vertex lattice_index(const BoxSpec& spec, std::span<const int> offset);
std::vector<int> lattice_offset(const BoxSpec& spec, Vertex v);
Vertex box_center(const BoxSpec& spec);

/// Hop distances from `source` (breadth-first search).
std::vector<std::size_t> hop_distances(const WeightedGraph& graph, Vertex source);

nlohmann::json graph_to_json(const WeightedGraph& graph);
WeightedGraph graph_from_json(const nlohmann::json& doc);

}  // namespace vrjp
