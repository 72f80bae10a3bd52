#include "robin/parabolic.hpp"

#include <stdexcept>

#include "robin/elliptic.hpp"

namespace robin {

namespace {

void require_levels(std::size_t got, const TimeGrid& grid, const char* what) {
  if (got != grid.levels()) {
    throw std::invalid_argument(std::string(what) + ": series length does not match the time grid");
  }
}

}  // namespace

ParabolicModel::ParabolicModel(ParabolicProblem problem) : problem_(std::move(problem)) {
  if (!(problem_.final_time > 0.0) || problem_.steps == 0) {
    throw std::invalid_argument("ParabolicProblem: need final_time > 0 and steps >= 1");
  }
  if (!(problem_.gamma_min > 0.0) || problem_.gamma_max < problem_.gamma_min) {
    throw std::invalid_argument("ParabolicProblem: need 0 < gamma_min <= gamma_max");
  }
  grid_ = {problem_.final_time, problem_.steps};
  const Mesh& mesh = problem_.mesh;
  mass_ = assemble_mass(mesh, Coefficient(1.0));
  stiffness_ = assemble_stiffness(mesh, problem_.a);
  initial_ = problem_.u0 ? interpolate(mesh, problem_.u0) : NodalField(mesh.num_nodes());

  loads_.assign(grid_.levels(), NodalField(mesh.num_nodes()));
  for (std::size_t n = 1; n < grid_.levels(); ++n) {
    const double t = grid_.time(n);
    NodalField& load = loads_[n];
    auto accumulate = [&](const NodalField& part) {
      for (std::size_t i = 0; i < load.size(); ++i) load[i] += part[i];
    };
    if (problem_.f) {
      accumulate(assemble_load(mesh, [&](double x, double y) { return problem_.f(x, y, t); }));
    }
    if (problem_.g) {
      accumulate(assemble_boundary_load(mesh, Segment::Inaccessible,
                                        [&](double x, double y) { return problem_.g(x, y, t); }));
    }
    if (problem_.h) {
      accumulate(assemble_boundary_load(mesh, Segment::Accessible,
                                        [&](double x, double y) { return problem_.h(x, y, t); }));
    }
  }
}

ParabolicOperator ParabolicModel::at(const BoundaryField& gamma) const {
  check_admissible(mesh(), gamma, problem_.gamma_min, problem_.gamma_max);
  SparseMatrix s = (1.0 / grid_.dt()) * mass_;
  s = s + stiffness_;
  s = s + assemble_boundary_mass(mesh(), gamma);
  return ParabolicOperator(*this, std::move(s));
}

std::vector<double> ParabolicOperator::step(const std::vector<double>& rhs,
                                            const std::vector<double>& guess) const {
  return solve_spd(matrix_, rhs, model_->problem_.solver, nullptr, guess);
}

TimeSeriesField ParabolicOperator::solve_forward() const {
  const TimeGrid& grid = model_->grid_;
  const double inv_dt = 1.0 / grid.dt();
  TimeSeriesField u(grid.levels());
  u[0] = model_->initial_;
  for (std::size_t n = 1; n < grid.levels(); ++n) {
    std::vector<double> rhs = model_->mass_ * std::span<const double>(u[n - 1].values);
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = rhs[i] * inv_dt + model_->loads_[n][i];
    u[n] = NodalField(step(rhs, u[n - 1].values));
  }
  return u;
}

TimeSeriesField ParabolicOperator::solve_derivative(const TimeSeriesField& u,
                                                    const BoundaryField& d) const {
  const TimeGrid& grid = model_->grid_;
  const Mesh& mesh = model_->mesh();
  require_levels(u.size(), grid, "solve_derivative_parabolic");
  if (d.segment != Segment::Inaccessible) {
    throw std::invalid_argument("solve_derivative_parabolic: direction must live on the inaccessible segment");
  }
  const double inv_dt = 1.0 / grid.dt();
  TimeSeriesField w(grid.levels(), NodalField(mesh.num_nodes()));
  for (std::size_t n = 1; n < grid.levels(); ++n) {
    const BoundaryField ui = trace(mesh, u[n], Segment::Inaccessible);
    const SparseMatrix weighted = segment_mass(mesh, ui);
    const NodalField source =
        embed(mesh, BoundaryField(Segment::Inaccessible, weighted * std::span<const double>(d.values)));
    std::vector<double> rhs = model_->mass_ * std::span<const double>(w[n - 1].values);
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = rhs[i] * inv_dt - source[i];
    w[n] = NodalField(step(rhs, w[n - 1].values));
  }
  return w;
}

TimeSeriesField ParabolicOperator::solve_adjoint_flux(const BoundarySeries& q) const {
  const TimeGrid& grid = model_->grid_;
  const Mesh& mesh = model_->mesh();
  require_levels(q.size(), grid, "solve_adjoint_parabolic");
  const double inv_dt = 1.0 / grid.dt();
  TimeSeriesField w(grid.levels(), NodalField(mesh.num_nodes()));
  std::vector<double> next(mesh.num_nodes(), 0.0);
  for (std::size_t n = grid.levels(); n-- > 0;) {
    std::vector<double> rhs = model_->mass_ * std::span<const double>(next);
    for (double& v : rhs) v *= inv_dt;
    if (n > 0) {
      if (q[n].segment != Segment::Accessible) {
        throw std::invalid_argument("solve_adjoint_parabolic: flux must live on the accessible segment");
      }
      const NodalField source = assemble_boundary_load(mesh, q[n]);
      for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] -= source[i];
    }
    w[n] = NodalField(step(rhs, next));
    next = w[n].values;
  }
  return w;
}

TimeSeriesField ParabolicOperator::solve_adjoint(const TimeSeriesField& u,
                                                 const BoundarySeries& p) const {
  const TimeGrid& grid = model_->grid_;
  const Mesh& mesh = model_->mesh();
  require_levels(u.size(), grid, "solve_adjoint_parabolic");
  require_levels(p.size(), grid, "solve_adjoint_parabolic");
  BoundarySeries q(grid.levels());
  q[0] = BoundaryField(Segment::Accessible, mesh.segment(Segment::Accessible).size());
  for (std::size_t n = 1; n < grid.levels(); ++n) {
    q[n] = hadamard(p[n], trace(mesh, u[n], Segment::Accessible));
  }
  return solve_adjoint_flux(q);
}

TimeSeriesField solve_forward_parabolic(const ParabolicModel& model, const BoundaryField& gamma) {
  return model.at(gamma).solve_forward();
}

TimeSeriesField solve_derivative_parabolic(const ParabolicModel& model, const BoundaryField& gamma,
                                           const TimeSeriesField& u, const BoundaryField& d) {
  return model.at(gamma).solve_derivative(u, d);
}

TimeSeriesField solve_adjoint_parabolic(const ParabolicModel& model, const BoundaryField& gamma,
                                        const TimeSeriesField& u, const BoundarySeries& p) {
  return model.at(gamma).solve_adjoint(u, p);
}

BoundarySeries trace_series(const Mesh& mesh, const TimeSeriesField& u, Segment segment) {
  BoundarySeries r;
  r.reserve(u.size());
  for (const auto& level : u) r.push_back(trace(mesh, level, segment));
  return r;
}

BoundaryField time_integral_boundary(std::span<const BoundaryField> series, const TimeGrid& grid) {
  require_levels(series.size(), grid, "time_integral_boundary");
  BoundaryField sum(series[0].segment, series[0].size());
  const double dt = grid.dt();
  for (std::size_t n = 1; n < series.size(); ++n) {
    if (series[n].segment != sum.segment || series[n].size() != sum.size()) {
      throw std::invalid_argument("time_integral_boundary: levels live on different segments");
    }
    for (std::size_t k = 0; k < sum.size(); ++k) sum[k] += dt * series[n][k];
  }
  return sum;
}

double space_time_inner(const Mesh& mesh, std::span<const BoundaryField> a,
                        std::span<const BoundaryField> b, const TimeGrid& grid) {
  require_levels(a.size(), grid, "space_time_inner");
  require_levels(b.size(), grid, "space_time_inner");
  double s = 0.0;
  for (std::size_t n = 1; n < a.size(); ++n) s += grid.dt() * boundary_inner(mesh, a[n], b[n]);
  return s;
}

}  // namespace robin
