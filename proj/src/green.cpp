#include "vrjp/green.hpp"

#include <cmath>

#include "vrjp/replicas.hpp"

namespace vrjp {

SchrodingerMatrix assemble_h(const WeightedGraph& graph, std::span<const double> beta) {
  const std::size_t n = graph.vertex_count();
  if (beta.size() != n) throw std::invalid_argument("beta needs one entry per vertex");
  SchrodingerMatrix h{Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n))};
  for (std::size_t i = 0; i < n; ++i) h.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = 2.0 * beta[i];
  for (const Edge& e : graph.edges()) {
    h.values(static_cast<Eigen::Index>(e.u), static_cast<Eigen::Index>(e.v)) = -e.weight;
    h.values(static_cast<Eigen::Index>(e.v), static_cast<Eigen::Index>(e.u)) = -e.weight;
  }
  return h;
}

GreenMatrix green(const SchrodingerMatrix& h) {
  const Eigen::MatrixXd& m = h.values;
  if (m.rows() != m.cols()) throw std::invalid_argument("H must be square");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw std::invalid_argument("H must be symmetric");

  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) throw NotPositiveDefinite("H is not positive definite");
  const Eigen::MatrixXd l = llt.matrixL();
  const auto pivots = l.diagonal();
  if (!(pivots.minCoeff() > 0.0) || !pivots.allFinite())
    throw NotPositiveDefinite("H is not positive definite");

  GreenMatrix g;
  g.values = llt.solve(Eigen::MatrixXd::Identity(m.rows(), m.cols()));
  g.values = 0.5 * (g.values + g.values.transpose());
  g.log_det_h = 2.0 * pivots.array().log().sum();
  g.min_cholesky_pivot = pivots.minCoeff();
  return g;
}

double identity_residual(const SchrodingerMatrix& h, const GreenMatrix& g) {
  const Eigen::MatrixXd r = h.values * g.values - Eigen::MatrixXd::Identity(h.size(), h.size());
  return r.cwiseAbs().maxCoeff();
}

namespace {

void check_positive_diagonal(std::span<const double> beta) {
  for (double b : beta)
    if (!(2.0 * b > 0.0)) throw std::invalid_argument("random-walk expansion needs 2 beta_i > 0");
}

// Column y of the truncated expansion: D^{-1} sum_k (W D^{-1})^k e_y.
void expansion_column(const WeightedGraph& graph, std::span<const double> inv_diag, int max_len,
                      Vertex y, Eigen::Ref<Eigen::VectorXd> column) {
  const std::size_t n = graph.vertex_count();
  std::vector<double> term(n, 0.0);
  std::vector<double> next(n, 0.0);
  std::vector<double> sum(n, 0.0);
  term[y] = 1.0;
  sum[y] = 1.0;
  for (int k = 0; k < max_len; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (const Neighbor& nb : graph.neighbors(i)) acc += nb.weight * inv_diag[nb.vertex] * term[nb.vertex];
      next[i] = acc;
    }
    term.swap(next);
    for (std::size_t i = 0; i < n; ++i) sum[i] += term[i];
  }
  for (std::size_t i = 0; i < n; ++i) column(static_cast<Eigen::Index>(i)) = inv_diag[i] * sum[i];
}

}  // namespace

Eigen::MatrixXd rw_expansion_serial(const WeightedGraph& graph, std::span<const double> beta, int max_len) {
  if (beta.size() != graph.vertex_count()) throw std::invalid_argument("beta needs one entry per vertex");
  if (max_len < 0) throw std::invalid_argument("max_len must be >= 0");
  check_positive_diagonal(beta);
  const std::size_t n = graph.vertex_count();
  std::vector<double> inv_diag(n);
  for (std::size_t i = 0; i < n; ++i) inv_diag[i] = 1.0 / (2.0 * beta[i]);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t y = 0; y < n; ++y) expansion_column(graph, inv_diag, max_len, y, out.col(static_cast<Eigen::Index>(y)));
  return out;
}

Eigen::MatrixXd rw_expansion(const WeightedGraph& graph, std::span<const double> beta, int max_len, int workers) {
  if (beta.size() != graph.vertex_count()) throw std::invalid_argument("beta needs one entry per vertex");
  if (max_len < 0) throw std::invalid_argument("max_len must be >= 0");
  check_positive_diagonal(beta);
  const std::size_t n = graph.vertex_count();
  std::vector<double> inv_diag(n);
  for (std::size_t i = 0; i < n; ++i) inv_diag[i] = 1.0 / (2.0 * beta[i]);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  const long long cols = static_cast<long long>(n);
#pragma omp parallel for schedule(static) num_threads(resolve_workers(workers))
  for (long long y = 0; y < cols; ++y)
    expansion_column(graph, inv_diag, max_len, static_cast<Vertex>(y), out.col(static_cast<Eigen::Index>(y)));
  return out;
}

std::vector<double> conductances(const WeightedGraph& graph, const GreenMatrix& g, Vertex i0) {
  std::vector<double> c;
  c.reserve(graph.edges().size());
  for (const Edge& e : graph.edges()) c.push_back(e.weight * g(i0, e.u) * g(i0, e.v));
  return c;
}

double return_probability(const WeightedGraph& graph, std::span<const double> c, Vertex i0) {
  const auto delta = graph.boundary();
  if (!delta) throw std::invalid_argument("return_probability needs a wired graph");
  if (c.size() != graph.edges().size()) throw std::invalid_argument("one conductance per edge required");
  if (i0 == *delta) throw std::invalid_argument("start vertex is the boundary vertex");
  const std::size_t n = graph.vertex_count();

  // Unknowns: h(v) for v not in {i0, delta}; h(i0) = 1, h(delta) = 0.
  std::vector<Eigen::Index> slot(n, -1);
  Eigen::Index m = 0;
  for (Vertex v = 0; v < n; ++v)
    if (v != i0 && v != *delta) slot[v] = m++;

  std::vector<double> total(n, 0.0);
  for (std::size_t k = 0; k < c.size(); ++k) {
    if (!(c[k] > 0.0)) throw std::invalid_argument("conductances must be positive");
    total[graph.edges()[k].u] += c[k];
    total[graph.edges()[k].v] += c[k];
  }

  double return_mass = 0.0;
  if (m > 0) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, m);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
    for (Vertex v = 0; v < n; ++v) {
      if (slot[v] < 0) continue;
      a(slot[v], slot[v]) = total[v];
      for (const Neighbor& nb : graph.neighbors(v)) {
        const double cv = c[nb.edge];
        if (nb.vertex == i0) rhs(slot[v]) += cv;
        else if (slot[nb.vertex] >= 0) a(slot[v], slot[nb.vertex]) -= cv;
      }
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    if (!lu.isInvertible()) throw std::runtime_error("singular harmonic system (disconnected network?)");
    const Eigen::VectorXd h = lu.solve(rhs);
    for (const Neighbor& nb : graph.neighbors(i0))
      if (slot[nb.vertex] >= 0) return_mass += c[nb.edge] * h(slot[nb.vertex]);
  }
  if (!(total[i0] > 0.0)) throw std::runtime_error("start vertex has no conductance");
  return return_mass / total[i0];
}

}  // namespace vrjp
