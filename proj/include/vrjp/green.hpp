#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "vrjp/graph.hpp"

namespace vrjp {

/// H_beta = 2[beta] - Delta_W: diagonal 2 beta_i, off-diagonal -W_{i,j}.
struct SchrodingerMatrix {
  Eigen::MatrixXd values;

  Eigen::Index size() const { return values.rows(); }
};

class NotPositiveDefinite : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// G = H^{-1} together with the Cholesky certificate that H > 0.
struct GreenMatrix {
  Eigen::MatrixXd values;
  double log_det_h = 0.0;       // log det H from the factor
  double min_cholesky_pivot = 0.0;

  double operator()(Vertex i, Vertex j) const {
    return values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  Eigen::Index size() const { return values.rows(); }
};

SchrodingerMatrix assemble_h(const WeightedGraph& graph, std::span<const double> beta);

/// Inverse through a Cholesky factorization. Throws NotPositiveDefinite when
/// H is not positive definite and std::invalid_argument when H is not
/// symmetric.
GreenMatrix green(const SchrodingerMatrix& h);

/// max_{i,j} |(H G - I)_{i,j}|.
double identity_residual(const SchrodingerMatrix& h, const GreenMatrix& g);

/// Truncated random-walk expansion D^{-1} sum_{k=0}^{max_len} (W D^{-1})^k,
/// D = 2[beta], i.e. the sum over paths of at most max_len steps of
/// W_sigma / (2 beta)_sigma. Columns are computed independently with sparse
/// matrix-vector products; the OpenMP version splits columns across workers.
/// Throws std::invalid_argument if some 2 beta_i <= 0.
Eigen::MatrixXd rw_expansion(const WeightedGraph& graph, std::span<const double> beta, int max_len,
                             int workers = 0);
Eigen::MatrixXd rw_expansion_serial(const WeightedGraph& graph, std::span<const double> beta,
                                    int max_len);

/// C_{i,j} = W_{i,j} G(i0,i) G(i0,j), one entry per edge of `graph`.
std::vector<double> conductances(const WeightedGraph& graph, const GreenMatrix& g, Vertex i0);

/// Probability that the discrete walk with edge conductances `c` started at
/// i0 returns to i0 before hitting the boundary vertex. Solves the Dirichlet
/// problem for h(v) = P_v(hit i0 before delta). Throws std::invalid_argument
/// if the graph has no boundary vertex and std::runtime_error if the system
/// is singular.
double return_probability(const WeightedGraph& graph, std::span<const double> c, Vertex i0);

}  // namespace vrjp
