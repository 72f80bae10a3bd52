#pragma once

#include <cstddef>

#include "robin/fem.hpp"
#include "robin/mesh.hpp"

namespace robin {

/// Data of the stationary problem
///
///   -div(a grad u) + c u = f      in the domain
///   a du/dn + gamma u    = g      on the inaccessible segment
///   a du/dn              = h      on the accessible segment
///
/// Empty source functions are treated as zero.
struct EllipticProblem {
  Mesh mesh;
  Coefficient a{1.0};
  Coefficient c{1.0};
  SpatialFunction f{};
  SpatialFunction g{};
  SpatialFunction h{};
  double gamma_min = 0.1;
  double gamma_max = 10.0;
  SolverOptions solver{};
};

/// Checks that gamma lives on the inaccessible segment and lies in
/// [gamma_min, gamma_max] nodally. Throws std::invalid_argument otherwise.
void check_admissible(const Mesh& mesh, const BoundaryField& gamma, double gamma_min,
                      double gamma_max);

class EllipticOperator;

/// Owns the problem plus everything that does not depend on gamma: the
/// stiffness + reaction matrix and the assembled right-hand side.
class EllipticModel {
 public:
  explicit EllipticModel(EllipticProblem problem);

  const EllipticProblem& problem() const { return problem_; }
  const Mesh& mesh() const { return problem_.mesh; }

  /// The system matrix K_a + M_c + B_gamma for one coefficient.
  EllipticOperator at(const BoundaryField& gamma) const;

 private:
  friend class EllipticOperator;
  EllipticProblem problem_;
  SparseMatrix base_;
  NodalField load_;
};

/// Forward, sensitivity and adjoint solves sharing one symmetric operator.
///
/// The sensitivity load is the exact derivative of the discrete forward map:
/// -int_{Gi} d_h u_h phi_j ds. The adjoint with direction p carries the flux
/// -(p u) on the accessible segment, with the product formed nodally. Because
/// both use the same symmetric matrix,
///
///   int_{Ga} w (u p) ds == int_{Gi} u d w* ds
///
/// holds up to linear-solver tolerance.
class EllipticOperator {
 public:
  const SparseMatrix& matrix() const { return matrix_; }
  const BoundaryField& gamma() const { return gamma_; }

  NodalField solve_forward() const;
  NodalField solve_derivative(const NodalField& u, const BoundaryField& d) const;
  NodalField solve_adjoint(const NodalField& u, const BoundaryField& p) const;
  /// Adjoint solve driven directly by a flux q on the accessible segment
  /// (solve_adjoint(u, p) is this with q = u p).
  NodalField solve_adjoint_flux(const BoundaryField& q) const;

 private:
  friend class EllipticModel;
  EllipticOperator(const EllipticModel& model, BoundaryField gamma, SparseMatrix matrix)
      : model_(&model), gamma_(std::move(gamma)), matrix_(std::move(matrix)) {}

  NodalField solve(const NodalField& rhs) const;

  const EllipticModel* model_;
  BoundaryField gamma_;
  SparseMatrix matrix_;
};

NodalField solve_forward(const EllipticModel& model, const BoundaryField& gamma);
NodalField solve_derivative(const EllipticModel& model, const BoundaryField& gamma,
                            const NodalField& u, const BoundaryField& d);
NodalField solve_adjoint(const EllipticModel& model, const BoundaryField& gamma,
                         const NodalField& u, const BoundaryField& p);

/// Power-iteration estimate of sup_d ||u'(gamma) d||^2_{Ga} / ||d||^2_{Gi}, the
/// smallest admissible majorization constant of the surrogate functional.
double estimate_derivative_norm_squared(const EllipticModel& model, const BoundaryField& gamma,
                                        std::size_t iterations = 30);

}  // namespace robin
