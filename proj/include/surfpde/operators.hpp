#pragma once

#include <iosfwd>
#include <stdexcept>
#include <vector>

#include <Eigen/Sparse>

#include "surfpde/localfit.hpp"
#include "surfpde/qp.hpp"
#include "surfpde/stencil.hpp"

namespace surfpde {

struct AssemblyError : std::runtime_error {
  AssemblyError(Index node, const std::string& what)
      : std::runtime_error("node " + std::to_string(node) + ": " + what), node(node) {}
  Index node;
};

/// Stencil-size search and acceptance thresholds.
struct AutotuneConfig {
  Index K0 = 0;  // 0 selects max(2m, 20) for the degree in use
  Index K_step = 2;
  Index K_max = 60;
  double gamma_threshold = 3.0;
  double omega = 1.0 / 3.0;
  int l = 4;
  int l_bd = 4;
  int kappa = 3;
  double delta = kRidgeDelta;
  double radius_multiple = kRadiusMultiple;  // Monge length unit per stencil radius
  bool use_qp = true;  // false: plain RBF-FD with best-gamma fallback

  Index initial_K(int degree) const;
  /// Throws std::invalid_argument on inconsistent settings.
  void validate() const;
};

enum class Execution { Serial, Parallel };

/// Laplacian row for the node `candidates[0]` from candidate neighbors
/// sorted by preference; stencils are prefixes of this list.
WeightRow interior_row_from_candidates(std::span<const Vec3> points, const Frame& frame,
                                       std::span<const Index> candidates, const AutotuneConfig& cfg);

/// Co-normal row, same search with the boundary acceptance rule v_1 > 0.
WeightRow boundary_row_from_candidates(std::span<const Vec3> points, const Frame& frame, const Vec3& conormal,
                                       std::span<const Index> candidates, const AutotuneConfig& cfg);

WeightRow interior_row_autotune(const PointCloud& cloud, const SpatialIndex& index, Index i, const AutotuneConfig& cfg);
WeightRow boundary_row_autotune(const PointCloud& cloud, const SpatialIndex& interior_index, Index b,
                                const AutotuneConfig& cfg);

/// Sparse block of operator rows, one per node in `nodes`.
struct OperatorMatrix {
  Index cols = 0;
  std::vector<Index> nodes;
  std::vector<WeightRow> rows;
  std::vector<double> center_before_identity;  // w_1 as computed by the row kernel

  Index size() const { return static_cast<Index>(rows.size()); }
  Eigen::SparseMatrix<double> matrix() const;
};

/// Rows for all interior nodes, stencils drawn from every node.
OperatorMatrix assemble_interior(const PointCloud& cloud, const AutotuneConfig& cfg,
                                 Execution exec = Execution::Parallel);

/// Rows for all boundary nodes from interior-only restricted stencils; with
/// `robin` the identity is added at the node's own column.
OperatorMatrix assemble_boundary(const PointCloud& cloud, const AutotuneConfig& cfg, bool robin,
                                 Execution exec = Execution::Parallel);

/// Largest |sum_k w_k p(theta_k) - (D p)(0)| over the monomials of `degree`,
/// with theta in the row's own Monge coordinates scaled to the stencil unit
/// and D the Laplacian or the co-normal derivative (`conormal` non-null).
/// `center_offset` is removed from w_1 first, e.g. a Robin identity.
double reproduction_error(std::span<const Vec3> points, const Frame& frame, const Vec3* conormal, const WeightRow& row,
                          int degree, double center_offset = 0.0, double radius_multiple = kRadiusMultiple);

/// One line per row: `index branch K gamma w1`.
void write_diagnostics(std::ostream& os, const OperatorMatrix& op);

/// Runs fn(k) for k in [0, count); the first failure by index is rethrown.
template <class Fn>
void for_each_node(Index count, Execution exec, Fn&& fn);

}  // namespace surfpde

#include "surfpde/detail/parallel.hpp"
