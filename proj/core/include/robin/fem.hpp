#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "robin/mesh.hpp"

namespace robin {

using SpatialFunction = std::function<double(double x, double y)>;

/// A PDE coefficient that is either a constant or a function of position.
class Coefficient {
 public:
  Coefficient(double value) : constant_(value), is_constant_(true) {}  // NOLINT
  Coefficient(SpatialFunction fn) : fn_(std::move(fn)) {}              // NOLINT

  double operator()(double x, double y) const { return is_constant_ ? constant_ : fn_(x, y); }
  bool is_constant() const { return is_constant_; }

 private:
  SpatialFunction fn_;
  double constant_ = 0.0;
  bool is_constant_ = false;
};

/// P1 coefficient vector indexed by mesh node id.
struct NodalField {
  std::vector<double> values;

  NodalField() = default;
  explicit NodalField(std::size_t n, double fill = 0.0) : values(n, fill) {}
  explicit NodalField(std::vector<double> v) : values(std::move(v)) {}

  std::size_t size() const { return values.size(); }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
};

/// P1 function on one boundary segment, indexed by the segment's local node
/// order (see BoundarySegment).
struct BoundaryField {
  Segment segment = Segment::Inaccessible;
  std::vector<double> values;

  BoundaryField() = default;
  BoundaryField(Segment s, std::size_t n, double fill = 0.0) : segment(s), values(n, fill) {}
  BoundaryField(Segment s, std::vector<double> v) : segment(s), values(std::move(v)) {}

  std::size_t size() const { return values.size(); }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
};

BoundaryField operator+(const BoundaryField& a, const BoundaryField& b);
BoundaryField operator-(const BoundaryField& a, const BoundaryField& b);
BoundaryField operator*(double s, const BoundaryField& a);
/// Nodal (pointwise) product.
BoundaryField hadamard(const BoundaryField& a, const BoundaryField& b);

/// Square sparse matrix in compressed-row layout with sorted column indices.
class SparseMatrix {
 public:
  struct Triplet {
    std::size_t row;
    std::size_t col;
    double value;
  };

  SparseMatrix() = default;
  /// Duplicate (row, col) entries are summed.
  static SparseMatrix from_triplets(std::size_t dim, std::vector<Triplet> triplets);
  static SparseMatrix identity(std::size_t dim);

  std::size_t dim() const { return dim_; }
  std::size_t nonzeros() const { return values_.size(); }

  void multiply(std::span<const double> x, std::span<double> y) const;
  std::vector<double> operator*(std::span<const double> x) const;

  double coeff(std::size_t i, std::size_t j) const;
  std::vector<double> diagonal() const;
  double max_abs() const;
  /// max |A_ij - A_ji|
  double max_asymmetry() const;

  SparseMatrix& operator*=(double s);
  friend SparseMatrix operator+(const SparseMatrix& a, const SparseMatrix& b);

  std::span<const std::size_t> row_ptr() const { return row_ptr_; }
  std::span<const std::size_t> col_idx() const { return col_idx_; }
  std::span<const double> values() const { return values_; }

 private:
  std::size_t dim_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::size_t> col_idx_;
  std::vector<double> values_;
};

SparseMatrix operator*(double s, SparseMatrix a);

// ---------------------------------------------------------------------------
// Linear solver

struct SolverOptions {
  double tolerance = 1e-10;
  /// 0 selects 10 * dimension.
  std::size_t max_iterations = 0;
};

struct SolveStats {
  std::size_t iterations = 0;
  double relative_residual = 0.0;
};

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Jacobi-preconditioned conjugate gradients. Stops when
/// ||b - A x|| <= tol * ||b||. Throws SolverError on non-convergence within the
/// iteration cap or on non-positive curvature p^T A p <= 0.
std::vector<double> solve_spd(const SparseMatrix& a, std::span<const double> b,
                              const SolverOptions& opts = {}, SolveStats* stats = nullptr,
                              std::span<const double> initial_guess = {});

NodalField solve_spd(const SparseMatrix& a, const NodalField& b, const SolverOptions& opts = {},
                     SolveStats* stats = nullptr);

// ---------------------------------------------------------------------------
// Assembly

/// sum_T a(centroid_T) * int_T grad(phi_i) . grad(phi_j).
/// Throws std::invalid_argument if a sample is not positive.
SparseMatrix assemble_stiffness(const Mesh& mesh, const Coefficient& a);

/// int c phi_i phi_j with the edge-midpoint rule (exact for constant c).
/// Throws std::invalid_argument on a negative sample.
SparseMatrix assemble_mass(const Mesh& mesh, const Coefficient& c);

/// Segment-local matrix int_seg w phi_i phi_j ds, with w the piecewise linear
/// interpolant of `weight`. Two-point Gauss per edge, exact for this cubic.
SparseMatrix segment_mass(const Mesh& mesh, const BoundaryField& weight);
SparseMatrix segment_mass(const Mesh& mesh, Segment segment, double weight = 1.0);

/// Same as segment_mass, embedded into a matrix of mesh dimension.
SparseMatrix assemble_boundary_mass(const Mesh& mesh, const BoundaryField& weight);
SparseMatrix assemble_boundary_mass(const Mesh& mesh, Segment segment, double weight);

/// int f phi_i over the domain, edge-midpoint rule.
NodalField assemble_load(const Mesh& mesh, const SpatialFunction& f);

/// int_seg g phi_i ds: two-point Gauss for a function, exact for a P1 field.
NodalField assemble_boundary_load(const Mesh& mesh, Segment segment, const SpatialFunction& g);
NodalField assemble_boundary_load(const Mesh& mesh, const BoundaryField& g);

// ---------------------------------------------------------------------------
// Boundary fields

/// Restriction of a nodal vector to the nodes of one segment.
BoundaryField trace(const Mesh& mesh, const NodalField& u, Segment segment);

/// Scatter-add of a segment-local vector into a vector of mesh dimension.
NodalField embed(const Mesh& mesh, const BoundaryField& v);

BoundaryField interpolate(const Mesh& mesh, Segment segment, const SpatialFunction& fn);
NodalField interpolate(const Mesh& mesh, const SpatialFunction& fn);

/// int_seg u v ds for P1 fields, exact. Throws std::invalid_argument when the
/// fields live on different segments or have the wrong length.
double boundary_inner(const Mesh& mesh, const BoundaryField& u, const BoundaryField& v);
double boundary_norm(const Mesh& mesh, const BoundaryField& u);

/// int_seg w u v ds for P1 fields, exact.
double weighted_boundary_inner(const Mesh& mesh, const BoundaryField& w, const BoundaryField& u,
                               const BoundaryField& v);

/// Solves M_seg x = rhs for the segment mass matrix (tridiagonal).
BoundaryField solve_segment_mass(const Mesh& mesh, const BoundaryField& rhs);

/// L2(segment) projection of the product of two P1 fields onto P1:
/// the field q with <q, v> = int a b v ds for every P1 field v.
BoundaryField project_product(const Mesh& mesh, const BoundaryField& a, const BoundaryField& b);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

}  // namespace robin
