#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "robin/fem.hpp"
#include "robin/mesh.hpp"

namespace robin {

using SpaceTimeFunction = std::function<double(double x, double y, double t)>;

/// Data of the time-dependent problem
///
///   du/dt - div(a grad u) = f      in the domain, 0 < t <= T
///   a du/dn + gamma u     = g      on the inaccessible segment
///   a du/dn               = h      on the accessible segment
///   u(., 0)               = u0
///
/// discretized by P1 elements and implicit Euler on a uniform grid of `steps`
/// intervals. Empty functions are treated as zero.
struct ParabolicProblem {
  Mesh mesh;
  Coefficient a{1.0};
  SpaceTimeFunction f{};
  SpaceTimeFunction g{};
  SpaceTimeFunction h{};
  SpatialFunction u0{};
  double final_time = 2.0;
  std::size_t steps = 64;
  double gamma_min = 0.1;
  double gamma_max = 10.0;
  SolverOptions solver{};
};

struct TimeGrid {
  double final_time = 0.0;
  std::size_t steps = 0;

  double dt() const { return final_time / static_cast<double>(steps); }
  double time(std::size_t n) const {
    return n == steps ? final_time : static_cast<double>(n) * dt();
  }
  std::size_t levels() const { return steps + 1; }
};

/// One field per time level 0..steps.
using TimeSeriesField = std::vector<NodalField>;
using BoundarySeries = std::vector<BoundaryField>;

class ParabolicOperator;

class ParabolicModel {
 public:
  explicit ParabolicModel(ParabolicProblem problem);

  const ParabolicProblem& problem() const { return problem_; }
  const Mesh& mesh() const { return problem_.mesh; }
  const TimeGrid& grid() const { return grid_; }

  ParabolicOperator at(const BoundaryField& gamma) const;

 private:
  friend class ParabolicOperator;
  ParabolicProblem problem_;
  TimeGrid grid_;
  SparseMatrix mass_;
  SparseMatrix stiffness_;
  NodalField initial_;
  std::vector<NodalField> loads_;  // index n holds the load at t_n; index 0 unused
};

/// Implicit-Euler sweeps with the step matrix S = M/dt + K_a + B_gamma.
///
/// The backward (adjoint) sweep is the algebraic transpose of the forward
/// sensitivity sweep: starting from a zero state beyond the final level it
/// solves S w*_n = M w*_{n+1}/dt - load_n for n = N..1, and continues one
/// source-free step to fill level 0. With right-endpoint weights dt on levels
/// 1..N this gives
///
///   sum_n dt int_{Ga} w_n (u_n p_n) ds == sum_n dt int_{Gi} d u_n w*_n ds.
class ParabolicOperator {
 public:
  const SparseMatrix& matrix() const { return matrix_; }

  TimeSeriesField solve_forward() const;
  TimeSeriesField solve_derivative(const TimeSeriesField& u, const BoundaryField& d) const;
  TimeSeriesField solve_adjoint(const TimeSeriesField& u, const BoundarySeries& p) const;
  /// Backward sweep driven by accessible-segment fluxes q_n (level 0 ignored).
  TimeSeriesField solve_adjoint_flux(const BoundarySeries& q) const;

 private:
  friend class ParabolicModel;
  ParabolicOperator(const ParabolicModel& model, SparseMatrix matrix)
      : model_(&model), matrix_(std::move(matrix)) {}

  std::vector<double> step(const std::vector<double>& rhs, const std::vector<double>& guess) const;

  const ParabolicModel* model_;
  SparseMatrix matrix_;
};

TimeSeriesField solve_forward_parabolic(const ParabolicModel& model, const BoundaryField& gamma);
TimeSeriesField solve_derivative_parabolic(const ParabolicModel& model, const BoundaryField& gamma,
                                           const TimeSeriesField& u, const BoundaryField& d);
TimeSeriesField solve_adjoint_parabolic(const ParabolicModel& model, const BoundaryField& gamma,
                                        const TimeSeriesField& u, const BoundarySeries& p);

BoundarySeries trace_series(const Mesh& mesh, const TimeSeriesField& u, Segment segment);

/// Right-endpoint rectangle rule: sum_{n=1..N} dt v_n. Throws
/// std::invalid_argument if the series does not have steps + 1 levels.
BoundaryField time_integral_boundary(std::span<const BoundaryField> series, const TimeGrid& grid);

/// sum_{n=1..N} dt <a_n, b_n>_{segment}
double space_time_inner(const Mesh& mesh, std::span<const BoundaryField> a,
                        std::span<const BoundaryField> b, const TimeGrid& grid);

}  // namespace robin
