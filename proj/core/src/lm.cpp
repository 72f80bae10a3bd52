#include "robin/lm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace robin {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string guard_message(std::size_t node, std::size_t level, double value) {
  std::ostringstream msg;
  msg << "trace guard: |u| = " << std::abs(value) << " at accessible node " << node;
  if (level > 0) msg << ", time level " << level;
  return msg.str();
}

BoundaryField residual_over_trace(const BoundaryField& residual, const BoundaryField& ua,
                                  double guard, std::size_t level) {
  BoundaryField p(Segment::Accessible, residual.size());
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (!(std::abs(ua[k]) >= guard)) throw TraceGuardError(k, level, ua[k]);
    p[k] = residual[k] / ua[k];
  }
  return p;
}

LmState advance(const Mesh& mesh, const LmState& state, const Linearization& lin,
                const LmConfig& cfg, const BoundaryField* exact, StepDetail* detail) {
  const double scale = 1.0 / (cfg.majorant + lin.beta);
  BoundaryField step = scale * lin.direction;
  BoundaryField unclamped = state.gamma + step;

  LmState next = state;
  next.gamma = unclamped;
  std::size_t clamped = 0;
  for (double& v : next.gamma.values) {
    const double c = std::clamp(v, cfg.gamma_min, cfg.gamma_max);
    if (c != v) ++clamped;
    v = c;
  }

  IterationRecord row;
  row.iteration = state.k + 1;
  row.residual = lin.residual_norm;
  row.beta = lin.beta;
  row.rel_change = boundary_norm(mesh, next.gamma - state.gamma) / boundary_norm(mesh, state.gamma);
  if (exact) row.rel_error = relative_error(mesh, next.gamma, *exact);
  row.clamped_nodes = clamped;

  next.k = state.k + 1;
  next.residual_norm = kNaN;
  next.beta = kNaN;
  next.history.push_back(row);

  if (detail) *detail = {std::move(step), std::move(unclamped), lin.beta};
  return next;
}

template <typename Model, typename Observation>
LmState step_impl(const Model& model, const LmState& state, const Observation& observed,
                  const LmConfig& cfg, const BoundaryField* exact, StepDetail* detail) {
  cfg.validate();
  const Linearization lin = linearize(model, state.gamma, observed, cfg);
  return advance(model.mesh(), state, lin, cfg, exact, detail);
}

template <typename Model, typename Observation>
LmResult run_impl(const Model& model, const BoundaryField& gamma0, const Observation& observed,
                  const LmConfig& cfg, const BoundaryField* exact) {
  cfg.validate();
  LmResult result{LmState(gamma0), StopReason::IterationCap, {}};
  LmState& state = result.state;
  try {
    while (true) {
      const Linearization lin = linearize(model, state.gamma, observed, cfg);
      state.residual_norm = lin.residual_norm;
      state.beta = lin.beta;
      if (cfg.residual_floor && lin.residual_norm < *cfg.residual_floor) {
        result.reason = StopReason::ResidualFloor;
        break;
      }
      if (state.k >= cfg.max_iterations) {
        result.reason = StopReason::IterationCap;
        break;
      }
      state = advance(model.mesh(), state, lin, cfg, exact, nullptr);
      if (state.history.back().rel_change <= cfg.tolerance) {
        result.reason = StopReason::RelativeChange;
        state.residual_norm = data_misfit(model, state.gamma, observed);
        state.beta = state.residual_norm * state.residual_norm;
        break;
      }
    }
  } catch (const std::exception& e) {
    result.reason = StopReason::Failed;
    std::ostringstream msg;
    msg << "iteration " << state.k << ": " << e.what();
    result.error = msg.str();
  }
  return result;
}

}  // namespace

void LmConfig::validate() const {
  if (!(majorant > 0.0)) throw std::invalid_argument("LmConfig: majorant A must be positive");
  if (!(tolerance > 0.0)) throw std::invalid_argument("LmConfig: tolerance must be positive");
  if (max_iterations == 0) throw std::invalid_argument("LmConfig: max_iterations must be >= 1");
  if (!(gamma_min > 0.0) || gamma_max < gamma_min) {
    throw std::invalid_argument("LmConfig: need 0 < gamma_min <= gamma_max");
  }
  if (!(trace_guard >= 0.0)) throw std::invalid_argument("LmConfig: trace_guard must be >= 0");
}

const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::RelativeChange: return "relative_change";
    case StopReason::ResidualFloor: return "residual_floor";
    case StopReason::IterationCap: return "iteration_cap";
    case StopReason::Failed: return "failed";
  }
  return "unknown";
}

LmState::LmState(BoundaryField gamma0)
    : gamma(std::move(gamma0)), residual_norm(kNaN), beta(kNaN) {}

TraceGuardError::TraceGuardError(std::size_t node, std::size_t level, double value)
    : std::runtime_error(guard_message(node, level, value)), node_(node), level_(level) {}

Linearization linearize(const EllipticModel& model, const BoundaryField& gamma,
                        const BoundaryField& observed, const LmConfig& cfg) {
  const Mesh& mesh = model.mesh();
  if (observed.segment != Segment::Accessible ||
      observed.size() != mesh.segment(Segment::Accessible).size()) {
    throw std::invalid_argument("observations must cover every accessible-segment node");
  }
  const EllipticOperator op = model.at(gamma);
  const NodalField u = op.solve_forward();
  const BoundaryField ua = trace(mesh, u, Segment::Accessible);
  const BoundaryField residual = observed - ua;

  Linearization lin;
  lin.residual_norm = boundary_norm(mesh, residual);
  lin.beta = lin.residual_norm * lin.residual_norm;

  const BoundaryField p = residual_over_trace(residual, ua, cfg.trace_guard, 0);
  const NodalField adjoint = op.solve_adjoint(u, p);
  lin.direction = project_product(mesh, trace(mesh, u, Segment::Inaccessible),
                                  trace(mesh, adjoint, Segment::Inaccessible));
  return lin;
}

Linearization linearize(const ParabolicModel& model, const BoundaryField& gamma,
                        const BoundarySeries& observed, const LmConfig& cfg) {
  const Mesh& mesh = model.mesh();
  const TimeGrid& grid = model.grid();
  if (observed.size() != grid.levels()) {
    throw std::invalid_argument("observations must be given at every time level");
  }
  const ParabolicOperator op = model.at(gamma);
  const TimeSeriesField u = op.solve_forward();

  BoundarySeries residual(grid.levels());
  BoundarySeries p(grid.levels());
  const std::size_t na = mesh.segment(Segment::Accessible).size();
  residual[0] = BoundaryField(Segment::Accessible, na);
  p[0] = residual[0];
  for (std::size_t n = 1; n < grid.levels(); ++n) {
    if (observed[n].segment != Segment::Accessible || observed[n].size() != na) {
      throw std::invalid_argument("observations must cover every accessible-segment node");
    }
    const BoundaryField ua = trace(mesh, u[n], Segment::Accessible);
    residual[n] = observed[n] - ua;
    p[n] = residual_over_trace(residual[n], ua, cfg.trace_guard, n);
  }

  Linearization lin;
  lin.residual_norm = std::sqrt(space_time_inner(mesh, residual, residual, grid));
  lin.beta = lin.residual_norm * lin.residual_norm;

  const TimeSeriesField adjoint = op.solve_adjoint(u, p);
  BoundarySeries products(grid.levels());
  products[0] = BoundaryField(Segment::Inaccessible, mesh.segment(Segment::Inaccessible).size());
  for (std::size_t n = 1; n < grid.levels(); ++n) {
    products[n] = project_product(mesh, trace(mesh, u[n], Segment::Inaccessible),
                                  trace(mesh, adjoint[n], Segment::Inaccessible));
  }
  lin.direction = time_integral_boundary(products, grid);
  return lin;
}

double data_misfit(const EllipticModel& model, const BoundaryField& gamma,
                   const BoundaryField& observed) {
  const Mesh& mesh = model.mesh();
  const NodalField u = solve_forward(model, gamma);
  return boundary_norm(mesh, observed - trace(mesh, u, Segment::Accessible));
}

double data_misfit(const ParabolicModel& model, const BoundaryField& gamma,
                   const BoundarySeries& observed) {
  const Mesh& mesh = model.mesh();
  const BoundarySeries ua = trace_series(mesh, solve_forward_parabolic(model, gamma),
                                         Segment::Accessible);
  if (observed.size() != ua.size()) {
    throw std::invalid_argument("observations must be given at every time level");
  }
  BoundarySeries residual(ua.size());
  for (std::size_t n = 0; n < ua.size(); ++n) residual[n] = observed[n] - ua[n];
  return std::sqrt(space_time_inner(mesh, residual, residual, model.grid()));
}

LmState lm_step_elliptic(const EllipticModel& model, const LmState& state,
                         const BoundaryField& observed, const LmConfig& cfg,
                         const BoundaryField* exact, StepDetail* detail) {
  return step_impl(model, state, observed, cfg, exact, detail);
}

LmState lm_step_parabolic(const ParabolicModel& model, const LmState& state,
                          const BoundarySeries& observed, const LmConfig& cfg,
                          const BoundaryField* exact, StepDetail* detail) {
  return step_impl(model, state, observed, cfg, exact, detail);
}

LmResult run(const EllipticModel& model, const BoundaryField& gamma0,
             const BoundaryField& observed, const LmConfig& cfg, const BoundaryField* exact) {
  return run_impl(model, gamma0, observed, cfg, exact);
}

LmResult run(const ParabolicModel& model, const BoundaryField& gamma0,
             const BoundarySeries& observed, const LmConfig& cfg, const BoundaryField* exact) {
  return run_impl(model, gamma0, observed, cfg, exact);
}

std::function<double(const BoundaryField&)> make_surrogate_objective(
    const Mesh& mesh, BoundaryField gamma_k, BoundaryField step, double beta, double majorant) {
  BoundaryField target = gamma_k + ((majorant + beta) / majorant) * step;
  return [&mesh, gamma_k = std::move(gamma_k), target = std::move(target), beta,
          majorant](const BoundaryField& gamma) {
    const BoundaryField a = gamma - target;
    const BoundaryField b = gamma - gamma_k;
    return majorant * boundary_inner(mesh, a, a) + beta * boundary_inner(mesh, b, b);
  };
}

double relative_error(const Mesh& mesh, const BoundaryField& gamma, const BoundaryField& exact) {
  const double denom = boundary_norm(mesh, exact);
  if (denom == 0.0) throw std::invalid_argument("relative_error: exact coefficient has zero norm");
  return boundary_norm(mesh, gamma - exact) / denom;
}

}  // namespace robin
