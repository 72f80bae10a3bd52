#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "robin/elliptic.hpp"
#include "robin/fem.hpp"
#include "robin/lm.hpp"
#include "robin/parabolic.hpp"

namespace robin {

enum class ProblemKind { Elliptic, Parabolic };
const char* to_string(ProblemKind k);

/// A registered manufactured test case on the domain (0,1)x(0,2) with the
/// Robin coefficient on x = 1.
///
/// Elliptic cases use a = c = 1, exact solution u = x^2 + cos(pi y),
/// f = (pi^2 + 1) cos(pi y) + x^2 - 2, g = 2 + (cos(pi y) + 1) gamma*, h = 0.
/// Parabolic cases use a = 1, u = (x^2 + cos(pi y)) t, u0 = 0,
/// f = cos(pi y) + x^2 + (pi^2 cos(pi y) - 2) t, g = (2 + (cos(pi y) + 1) gamma*) t, h = 0.
struct ExampleDefinition {
  std::string id;
  ProblemKind kind;
  std::string description;
  std::function<double(double y)> exact_gamma;
  /// Relative-change tolerance used by default for this case.
  double tolerance;
};

const std::vector<ExampleDefinition>& example_registry();
/// Throws std::invalid_argument for an unknown id.
const ExampleDefinition& find_example(std::string_view id);

struct Discretization {
  std::size_t nx = 16;
  std::size_t ny = 32;
  std::size_t steps = 64;
  double final_time = 2.0;
};

struct ExampleSetup {
  const ExampleDefinition* definition = nullptr;
  std::optional<EllipticProblem> elliptic;
  std::optional<ParabolicProblem> parabolic;
  /// gamma* as a function on the boundary.
  SpatialFunction exact_gamma;
  /// Exact forward solution; the elliptic one ignores t.
  SpaceTimeFunction exact_u;

  const Mesh& mesh() const { return elliptic ? elliptic->mesh : parabolic->mesh; }
};

/// Builds the manufactured problem for `id` on an nx x ny mesh. Piecewise
/// definitions need their breakpoint y = 1 on a mesh node, so they reject odd ny.
ExampleSetup make_example(std::string_view id, const Discretization& disc = {},
                          const SolverOptions& solver = {});

/// Exact solution sampled at the accessible-segment nodes.
BoundaryField observe(const Mesh& mesh, const SpaceTimeFunction& exact_u);
/// Same, at every level of the time grid.
BoundarySeries observe(const Mesh& mesh, const TimeGrid& grid, const SpaceTimeFunction& exact_u);

/// Deterministic uniform samples on [-1, 1] from mt19937_64 (top 53 bits), so
/// realizations are identical across standard libraries.
class UniformNoise {
 public:
  explicit UniformNoise(std::uint64_t seed) : engine_(seed) {}
  double next() {
    const double unit = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    return 2.0 * unit - 1.0;
  }

 private:
  std::mt19937_64 engine_;
};

/// z_delta = z (1 + delta R) with R i.i.d. uniform on [-1, 1]. Throws
/// std::invalid_argument for delta < 0. The series version draws level by
/// level, node by node.
BoundaryField add_noise(const BoundaryField& z, double delta, std::uint64_t seed);
BoundarySeries add_noise(const BoundarySeries& z, double delta, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Experiment driver

struct ExperimentSpec {
  std::string example = "5.1";
  Discretization disc;
  double delta = 0.02;
  std::uint64_t seed = 1;
  /// Constant initial guess; nullopt starts from the interpolated gamma*.
  std::optional<double> gamma0 = 2.0;
  LmConfig lm;
  SolverOptions solver;
};

/// Registry defaults for `id` (tolerance 2e-3 elliptic, 5e-3 parabolic).
ExperimentSpec default_spec(std::string_view id);

struct ExperimentResult {
  ExperimentSpec spec;
  ProblemKind kind = ProblemKind::Elliptic;
  LmResult lm{LmState(BoundaryField{}), StopReason::IterationCap, {}};
  BoundaryField exact_gamma;
  /// y coordinates of the inaccessible-segment nodes.
  std::vector<double> profile_y;
  double final_error = 0.0;
  double seconds = 0.0;
};

ExperimentResult run_experiment(const ExperimentSpec& spec);

// ---------------------------------------------------------------------------
// Dense oracle for the linearized subproblem

struct OracleReport {
  std::size_t unknowns = 0;
  double residual_norm = 0.0;
  double beta = 0.0;
  /// J(gamma) = ||u'(gamma_k)(gamma - gamma_k) - r||^2 + beta ||gamma - gamma_k||^2
  double objective_current = 0.0;
  double objective_surrogate = 0.0;
  double objective_dense = 0.0;
  BoundaryField surrogate_step;
  BoundaryField dense_step;
  /// max |(M_a L)_{mj} - (B_u w*_m)_j| / max |M_a L|: the sensitivity matrix
  /// built column by column from derivative solves against the one built row
  /// by row from adjoint solves.
  double operator_mismatch = 0.0;
};

/// Assembles the sensitivity matrix L = u'(gamma_k) explicitly (one derivative
/// solve per inaccessible node), solves the Gauss-Newton normal equations
/// (L^T M_a L + beta M_i) s = L^T M_a r densely and compares the objective
/// with the surrogate step. `beta_override` replaces beta_k = ||r||^2.
OracleReport oracle_optimality_check(const EllipticModel& model, const BoundaryField& gamma_k,
                                     const BoundaryField& observed, const LmConfig& cfg,
                                     std::optional<double> beta_override = std::nullopt);

}  // namespace robin
