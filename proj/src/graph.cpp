#include "vrjp/graph.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>
#include <utility>

namespace vrjp {

std::size_t BoxSpec::site_count() const {
  std::size_t count = 1;
  for (int k = 0; k < dimension; ++k) count *= static_cast<std::size_t>(side());
  return count;
}

namespace {

void validate_box(const BoxSpec& spec) {
  if (spec.dimension < 1) throw std::invalid_argument("box dimension must be >= 1");
  if (spec.half_side < 1) throw std::invalid_argument("box half_side must be >= 1");
  if (!spec.center.empty() && spec.center.size() != static_cast<std::size_t>(spec.dimension))
    throw std::invalid_argument("box center has wrong dimension");
}

std::vector<std::size_t> strides(const BoxSpec& spec) {
  std::vector<std::size_t> s(static_cast<std::size_t>(spec.dimension), 1);
  for (int k = spec.dimension - 2; k >= 0; --k)
    s[static_cast<std::size_t>(k)] = s[static_cast<std::size_t>(k) + 1] * static_cast<std::size_t>(spec.side());
  return s;
}

}  // namespace

WeightedGraph WeightedGraph::from_edges(std::size_t vertex_count, std::vector<Edge> edges,
                                        std::vector<double> theta, std::vector<double> eta,
                                        std::optional<Vertex> boundary) {
  if (vertex_count == 0) throw std::invalid_argument("graph needs at least one vertex");
  if (theta.size() != vertex_count) throw std::invalid_argument("theta size mismatch");
  if (eta.empty()) eta.assign(vertex_count, 0.0);
  if (eta.size() != vertex_count) throw std::invalid_argument("eta size mismatch");
  for (double t : theta)
    if (!(t > 0.0) || !std::isfinite(t)) throw std::invalid_argument("theta must be positive");
  for (double e : eta)
    if (!(e >= 0.0) || !std::isfinite(e)) throw std::invalid_argument("eta must be non-negative");
  if (boundary && *boundary >= vertex_count) throw std::invalid_argument("boundary vertex out of range");

  std::vector<std::pair<Vertex, Vertex>> keys;
  keys.reserve(edges.size());
  for (const Edge& e : edges) {
    if (e.u >= vertex_count || e.v >= vertex_count) throw std::invalid_argument("edge endpoint out of range");
    if (e.u == e.v) throw std::invalid_argument("self-loops are not represented");
    if (!(e.weight > 0.0) || !std::isfinite(e.weight)) throw std::invalid_argument("edge weight must be positive");
    keys.emplace_back(std::min(e.u, e.v), std::max(e.u, e.v));
  }
  std::sort(keys.begin(), keys.end());
  if (std::adjacent_find(keys.begin(), keys.end()) != keys.end())
    throw std::invalid_argument("duplicate edge");

  WeightedGraph g;
  g.edges_ = std::move(edges);
  g.theta_ = std::move(theta);
  g.eta_ = std::move(eta);
  g.boundary_ = boundary;
  g.index();

  if (vertex_count > 1) {
    const auto dist = hop_distances(g, 0);
    for (std::size_t d : dist)
      if (d == static_cast<std::size_t>(-1)) throw std::invalid_argument("graph is not connected");
  }
  return g;
}

void WeightedGraph::index() {
  const std::size_t n = theta_.size();
  offsets_.assign(n + 1, 0);
  for (const Edge& e : edges_) {
    ++offsets_[e.u + 1];
    ++offsets_[e.v + 1];
  }
  for (std::size_t i = 0; i < n; ++i) offsets_[i + 1] += offsets_[i];
  adjacency_.assign(offsets_[n], Neighbor{});
  std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
  for (std::size_t k = 0; k < edges_.size(); ++k) {
    const Edge& e = edges_[k];
    adjacency_[fill[e.u]++] = Neighbor{e.v, e.weight, k};
    adjacency_[fill[e.v]++] = Neighbor{e.u, e.weight, k};
  }
}

double WeightedGraph::weight(Vertex i, Vertex j) const {
  for (const Neighbor& nb : neighbors(i))
    if (nb.vertex == j) return nb.weight;
  return 0.0;
}

bool WeightedGraph::eta_is_zero() const {
  return std::all_of(eta_.begin(), eta_.end(), [](double e) { return e == 0.0; });
}

WeightedGraph WeightedGraph::with_edge_weights(std::span<const double> weights) const {
  if (weights.size() != edges_.size()) throw std::invalid_argument("edge weight count mismatch");
  std::vector<Edge> edges = edges_;
  for (std::size_t k = 0; k < edges.size(); ++k) edges[k].weight = weights[k];
  WeightedGraph g = from_edges(vertex_count(), std::move(edges), theta_, eta_, boundary_);
  g.lattice_ = lattice_;
  if (g.lattice_) g.lattice_->uniform_weight.reset();
  return g;
}

WeightedGraph WeightedGraph::with_theta(std::vector<double> theta) const {
  WeightedGraph g = from_edges(vertex_count(), edges_, std::move(theta), eta_, boundary_);
  g.lattice_ = lattice_;
  if (g.lattice_) g.lattice_->uniform_weight.reset();
  return g;
}

WeightedGraph WeightedGraph::with_eta(std::vector<double> eta) const {
  WeightedGraph g = from_edges(vertex_count(), edges_, theta_, std::move(eta), boundary_);
  g.lattice_ = lattice_;
  if (g.lattice_) g.lattice_->uniform_weight.reset();
  return g;
}

bool operator==(const WeightedGraph& a, const WeightedGraph& b) {
  if (a.theta_ != b.theta_ || a.eta_ != b.eta_ || a.boundary_ != b.boundary_) return false;
  if (a.edges_.size() != b.edges_.size()) return false;
  for (std::size_t k = 0; k < a.edges_.size(); ++k) {
    const Edge& x = a.edges_[k];
    const Edge& y = b.edges_[k];
    if (x.u != y.u || x.v != y.v || x.weight != y.weight) return false;
  }
  return true;
}

Vertex lattice_index(const BoxSpec& spec, std::span<const int> offset) {
  if (offset.size() != static_cast<std::size_t>(spec.dimension))
    throw std::invalid_argument("lattice offset has wrong dimension");
  const auto s = strides(spec);
  Vertex v = 0;
  for (std::size_t k = 0; k < offset.size(); ++k) {
    if (offset[k] < -spec.half_side || offset[k] > spec.half_side)
      throw std::out_of_range("lattice point outside the box");
    v += static_cast<std::size_t>(offset[k] + spec.half_side) * s[k];
  }
  return v;
}

std::vector<int> lattice_offset(const BoxSpec& spec, Vertex v) {
  const auto s = strides(spec);
  std::vector<int> off(s.size());
  for (std::size_t k = 0; k < s.size(); ++k) {
    off[k] = static_cast<int>(v / s[k]) - spec.half_side;
    v %= s[k];
  }
  return off;
}

Vertex box_center(const BoxSpec& spec) { return (spec.site_count() - 1) / 2; }

WeightedGraph build_box(const BoxSpec& spec, double weight, double theta) {
  validate_box(spec);
  if (!(weight > 0.0)) throw std::invalid_argument("box weight W must be positive");
  if (!(theta > 0.0)) throw std::invalid_argument("box theta must be positive");
  const std::size_t n = spec.site_count();
  const auto s = strides(spec);
  std::vector<Edge> edges;
  for (Vertex v = 0; v < n; ++v) {
    const auto off = lattice_offset(spec, v);
    for (std::size_t k = 0; k < s.size(); ++k)
      if (off[k] < spec.half_side) edges.push_back({v, v + s[k], weight});
  }
  WeightedGraph g = WeightedGraph::from_edges(n, std::move(edges), std::vector<double>(n, theta));
  BoxSpec stored = spec;
  stored.wired = false;
  g.lattice_ = LatticeInfo{stored, weight, theta, std::nullopt};
  return g;
}

std::size_t cut_edge_count(const BoxSpec& spec) {
  // Each of the 2d faces has side^{d-1} sites with one missing neighbour.
  std::size_t face = 1;
  for (int k = 1; k < spec.dimension; ++k) face *= static_cast<std::size_t>(spec.side());
  return 2 * static_cast<std::size_t>(spec.dimension) * face;
}

WeightedGraph wire_box(const WeightedGraph& box, double theta_delta,
                       std::span<const double> cut_weights) {
  if (!box.lattice_) throw std::invalid_argument("wire_box needs a lattice box");
  if (box.lattice_->spec.wired || box.boundary_) throw std::invalid_argument("box is already wired");
  if (!(theta_delta > 0.0)) throw std::invalid_argument("theta_delta must be positive");
  const BoxSpec& spec = box.lattice_->spec;
  if (cut_weights.empty() && !box.lattice_->uniform_weight)
    throw std::invalid_argument("non-uniform box needs explicit cut weights");
  if (!cut_weights.empty() && cut_weights.size() != cut_edge_count(spec))
    throw std::invalid_argument("cut weight count mismatch");

  const std::size_t n = box.vertex_count();
  std::vector<double> to_delta(n, 0.0);
  std::size_t cut = 0;
  for (Vertex v = 0; v < n; ++v) {
    const auto off = lattice_offset(spec, v);
    for (std::size_t k = 0; k < off.size(); ++k) {
      for (int dir : {-1, +1}) {
        if (std::abs(off[k] + dir) <= spec.half_side) continue;
        const double w = cut_weights.empty() ? *box.lattice_->uniform_weight : cut_weights[cut];
        if (!(w > 0.0)) throw std::invalid_argument("cut weights must be positive");
        to_delta[v] += w;
        ++cut;
      }
    }
  }

  std::vector<Edge> edges(box.edges_.begin(), box.edges_.end());
  for (Vertex v = 0; v < n; ++v)
    if (to_delta[v] > 0.0) edges.push_back({v, n, to_delta[v]});
  std::vector<double> theta(box.theta_.begin(), box.theta_.end());
  theta.push_back(theta_delta);
  std::vector<double> eta(box.eta_.begin(), box.eta_.end());
  eta.push_back(0.0);
  WeightedGraph g = WeightedGraph::from_edges(n + 1, std::move(edges), std::move(theta),
                                              std::move(eta), n);
  g.lattice_ = box.lattice_;
  g.lattice_->spec.wired = true;
  g.lattice_->theta_delta = theta_delta;
  if (!cut_weights.empty()) g.lattice_->uniform_weight.reset();
  return g;
}

WeightedGraph scale_to_unit_theta(const WeightedGraph& graph) {
  if (!graph.eta_is_zero()) throw std::invalid_argument("theta scaling requires eta == 0");
  const auto theta = graph.theta();
  std::vector<double> weights;
  weights.reserve(graph.edges().size());
  for (const Edge& e : graph.edges()) weights.push_back(e.weight * theta[e.u] * theta[e.v]);
  return graph.with_edge_weights(weights).with_theta(std::vector<double>(graph.vertex_count(), 1.0));
}

WeightedGraph build_path(std::size_t n, double weight, double theta) {
  std::vector<Edge> edges;
  for (Vertex v = 0; v + 1 < n; ++v) edges.push_back({v, v + 1, weight});
  return WeightedGraph::from_edges(n, std::move(edges), std::vector<double>(n, theta));
}

WeightedGraph build_cycle(std::size_t n, double weight, double theta) {
  if (n < 3) throw std::invalid_argument("cycle needs at least 3 vertices");
  std::vector<Edge> edges;
  for (Vertex v = 0; v < n; ++v) edges.push_back({v, (v + 1) % n, weight});
  return WeightedGraph::from_edges(n, std::move(edges), std::vector<double>(n, theta));
}

std::vector<std::size_t> hop_distances(const WeightedGraph& graph, Vertex source) {
  std::vector<std::size_t> dist(graph.vertex_count(), static_cast<std::size_t>(-1));
  std::queue<Vertex> queue;
  dist[source] = 0;
  queue.push(source);
  while (!queue.empty()) {
    const Vertex v = queue.front();
    queue.pop();
    for (const Neighbor& nb : graph.neighbors(v)) {
      if (dist[nb.vertex] != static_cast<std::size_t>(-1)) continue;
      dist[nb.vertex] = dist[v] + 1;
      queue.push(nb.vertex);
    }
  }
  return dist;
}

// Serialization. Pristine boxes are written by their description; anything
// else as an explicit edge list. Doubles round-trip exactly through the
// shortest-representation printer.

nlohmann::json graph_to_json(const WeightedGraph& graph) {
  using nlohmann::json;
  const auto& lat = graph.lattice();
  if (lat && lat->uniform_weight && graph.eta_is_zero()) {
    json doc{{"format", "box"},
             {"dimension", lat->spec.dimension},
             {"half_side", lat->spec.half_side},
             {"center", lat->spec.center},
             {"W", *lat->uniform_weight},
             {"theta", lat->theta},
             {"wired", lat->spec.wired}};
    if (lat->theta_delta) doc["theta_delta"] = *lat->theta_delta;
    return doc;
  }
  json edges = json::array();
  for (const Edge& e : graph.edges()) edges.push_back(json::array({e.u, e.v, e.weight}));
  json doc{{"format", "edges"},
           {"vertex_count", graph.vertex_count()},
           {"edges", edges},
           {"theta", std::vector<double>(graph.theta().begin(), graph.theta().end())},
           {"eta", std::vector<double>(graph.eta().begin(), graph.eta().end())}};
  doc["boundary"] = graph.boundary() ? json(*graph.boundary()) : json(nullptr);
  if (lat) {
    doc["lattice"] = json{{"dimension", lat->spec.dimension},
                          {"half_side", lat->spec.half_side},
                          {"center", lat->spec.center},
                          {"wired", lat->spec.wired}};
  }
  return doc;
}

WeightedGraph graph_from_json(const nlohmann::json& doc) {
  const std::string format = doc.at("format").get<std::string>();
  if (format == "box") {
    BoxSpec spec;
    spec.dimension = doc.at("dimension").get<int>();
    spec.half_side = doc.at("half_side").get<int>();
    spec.center = doc.value("center", std::vector<int>{});
    const bool wired = doc.value("wired", false);
    const double theta = doc.at("theta").get<double>();
    WeightedGraph g = build_box(spec, doc.at("W").get<double>(), theta);
    if (wired) g = wire_box(g, doc.value("theta_delta", theta));
    return g;
  }
  if (format != "edges") throw std::invalid_argument("unknown graph format: " + format);
  std::vector<Edge> edges;
  for (const auto& e : doc.at("edges"))
    edges.push_back({e.at(0).get<Vertex>(), e.at(1).get<Vertex>(), e.at(2).get<double>()});
  std::optional<Vertex> boundary;
  if (doc.contains("boundary") && !doc.at("boundary").is_null()) boundary = doc.at("boundary").get<Vertex>();
  WeightedGraph g = WeightedGraph::from_edges(
      doc.at("vertex_count").get<std::size_t>(), std::move(edges),
      doc.at("theta").get<std::vector<double>>(), doc.value("eta", std::vector<double>{}), boundary);
  if (doc.contains("lattice")) {
    const auto& l = doc.at("lattice");
    LatticeInfo info;
    info.spec.dimension = l.at("dimension").get<int>();
    info.spec.half_side = l.at("half_side").get<int>();
    info.spec.center = l.value("center", std::vector<int>{});
    info.spec.wired = l.value("wired", false);
    g.lattice_ = info;
  }
  return g;
}

}  // namespace vrjp
