#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "robin/elliptic.hpp"
#include "robin/fem.hpp"
#include "robin/parabolic.hpp"

namespace robin {

struct LmConfig {
  /// Majorization constant A of the surrogate functional.
  double majorant = 1.0;
  /// Stop once ||gamma_{k+1} - gamma_k|| / ||gamma_k|| <= tolerance.
  double tolerance = 2e-3;
  std::size_t max_iterations = 100;
  double gamma_min = 0.1;
  double gamma_max = 10.0;
  /// Optional discrepancy stop: residual norm below this value.
  std::optional<double> residual_floor;
  /// Minimum |u| on the accessible segment before the residual is divided by it.
  double trace_guard = 1e-8;

  /// Throws std::invalid_argument on A <= 0, tolerance <= 0, zero iteration
  /// cap or gamma_min <= 0.
  void validate() const;
};

enum class StopReason { RelativeChange, ResidualFloor, IterationCap, Failed };
const char* to_string(StopReason r);

/// Row k (1-based) describes the step gamma_{k-1} -> gamma_k: residual and
/// beta are evaluated at gamma_{k-1}, rel_change and rel_error at gamma_k.
struct IterationRecord {
  std::size_t iteration = 0;
  double residual = 0.0;
  double beta = 0.0;
  double rel_change = 0.0;
  std::optional<double> rel_error;
  std::size_t clamped_nodes = 0;
};

struct LmState {
  std::size_t k = 0;
  BoundaryField gamma;
  /// ||u(gamma_k) - z|| (space-time norm for the parabolic problem); NaN
  /// until the iterate has been evaluated.
  double residual_norm;
  double beta;
  std::vector<IterationRecord> history;

  explicit LmState(BoundaryField gamma0);
};

/// Quantities of one update, mainly for tests.
struct StepDetail {
  BoundaryField step;       ///< pre-clamp increment
  BoundaryField unclamped;  ///< gamma_k + step
  double beta = 0.0;
};

/// |u| fell below the trace guard at an accessible-segment node.
class TraceGuardError : public std::runtime_error {
 public:
  TraceGuardError(std::size_t node, std::size_t level, double value);
  std::size_t node() const { return node_; }
  std::size_t level() const { return level_; }

 private:
  std::size_t node_;
  std::size_t level_;
};

/// Descent data at one iterate: the squared misfit beta_k and the Riesz
/// representative on the inaccessible segment of the misfit gradient,
/// u(gamma_k) u'(gamma_k)^*((z - u(gamma_k)) / u(gamma_k)).
struct Linearization {
  double residual_norm = 0.0;
  double beta = 0.0;
  BoundaryField direction;
};

Linearization linearize(const EllipticModel& model, const BoundaryField& gamma,
                        const BoundaryField& observed, const LmConfig& cfg);
Linearization linearize(const ParabolicModel& model, const BoundaryField& gamma,
                        const BoundarySeries& observed, const LmConfig& cfg);

/// ||u(gamma) - z|| on the accessible segment (space-time norm with
/// right-endpoint weights for the parabolic problem).
double data_misfit(const EllipticModel& model, const BoundaryField& gamma,
                   const BoundaryField& observed);
double data_misfit(const ParabolicModel& model, const BoundaryField& gamma,
                   const BoundarySeries& observed);

/// One surrogate-functional update
///   gamma_{k+1} = clamp(gamma_k + direction / (A + beta_k), gamma_min, gamma_max)
/// with beta_k = ||u(gamma_k) - z||^2.
LmState lm_step_elliptic(const EllipticModel& model, const LmState& state,
                         const BoundaryField& observed, const LmConfig& cfg,
                         const BoundaryField* exact = nullptr, StepDetail* detail = nullptr);
LmState lm_step_parabolic(const ParabolicModel& model, const LmState& state,
                          const BoundarySeries& observed, const LmConfig& cfg,
                          const BoundaryField* exact = nullptr, StepDetail* detail = nullptr);

struct LmResult {
  LmState state;
  StopReason reason = StopReason::IterationCap;
  std::string error;  ///< set when reason == Failed
};

/// Iterates until the relative change drops to cfg.tolerance, the residual
/// falls below cfg.residual_floor, or cfg.max_iterations steps were taken.
/// Step failures end the run with StopReason::Failed; the history recorded up
/// to that point is kept.
LmResult run(const EllipticModel& model, const BoundaryField& gamma0,
             const BoundaryField& observed, const LmConfig& cfg,
             const BoundaryField* exact = nullptr);
LmResult run(const ParabolicModel& model, const BoundaryField& gamma0,
             const BoundarySeries& observed, const LmConfig& cfg,
             const BoundaryField* exact = nullptr);

/// gamma -> A ||gamma - gamma_k - step (A + beta)/A||^2 + beta ||gamma - gamma_k||^2,
/// the surrogate functional without its gamma-independent part. Its exact
/// minimizer is gamma_k + step.
std::function<double(const BoundaryField&)> make_surrogate_objective(
    const Mesh& mesh, BoundaryField gamma_k, BoundaryField step, double beta, double majorant);

double relative_error(const Mesh& mesh, const BoundaryField& gamma, const BoundaryField& exact);

}  // namespace robin
