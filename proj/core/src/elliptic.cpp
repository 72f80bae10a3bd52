#include "robin/elliptic.hpp"

#include <cmath>
#include <sstream>

namespace robin {

void check_admissible(const Mesh& mesh, const BoundaryField& gamma, double gamma_min,
                      double gamma_max) {
  if (gamma.segment != Segment::Inaccessible ||
      gamma.size() != mesh.segment(Segment::Inaccessible).size()) {
    throw std::invalid_argument("Robin coefficient must be a field on the inaccessible segment");
  }
  for (std::size_t k = 0; k < gamma.size(); ++k) {
    if (!(gamma[k] >= gamma_min && gamma[k] <= gamma_max)) {
      std::ostringstream msg;
      msg << "Robin coefficient " << gamma[k] << " at segment node " << k << " outside ["
          << gamma_min << ", " << gamma_max << "]";
      throw std::invalid_argument(msg.str());
    }
  }
}

EllipticModel::EllipticModel(EllipticProblem problem) : problem_(std::move(problem)) {
  if (!(problem_.gamma_min > 0.0) || problem_.gamma_max < problem_.gamma_min) {
    throw std::invalid_argument("EllipticProblem: need 0 < gamma_min <= gamma_max");
  }
  const Mesh& mesh = problem_.mesh;
  base_ = assemble_stiffness(mesh, problem_.a) + assemble_mass(mesh, problem_.c);

  load_ = NodalField(mesh.num_nodes());
  auto accumulate = [&](const NodalField& part) {
    for (std::size_t i = 0; i < load_.size(); ++i) load_[i] += part[i];
  };
  if (problem_.f) accumulate(assemble_load(mesh, problem_.f));
  if (problem_.g) accumulate(assemble_boundary_load(mesh, Segment::Inaccessible, problem_.g));
  if (problem_.h) accumulate(assemble_boundary_load(mesh, Segment::Accessible, problem_.h));
}

EllipticOperator EllipticModel::at(const BoundaryField& gamma) const {
  check_admissible(mesh(), gamma, problem_.gamma_min, problem_.gamma_max);
  return EllipticOperator(*this, gamma, base_ + assemble_boundary_mass(mesh(), gamma));
}

NodalField EllipticOperator::solve(const NodalField& rhs) const {
  return solve_spd(matrix_, rhs, model_->problem_.solver);
}

NodalField EllipticOperator::solve_forward() const { return solve(model_->load_); }

NodalField EllipticOperator::solve_derivative(const NodalField& u, const BoundaryField& d) const {
  const Mesh& mesh = model_->mesh();
  if (d.segment != Segment::Inaccessible) {
    throw std::invalid_argument("solve_derivative: direction must live on the inaccessible segment");
  }
  const BoundaryField ui = trace(mesh, u, Segment::Inaccessible);
  const SparseMatrix weighted = segment_mass(mesh, ui);
  BoundaryField load(Segment::Inaccessible, weighted * std::span<const double>(d.values));
  NodalField rhs = embed(mesh, load);
  for (double& v : rhs.values) v = -v;
  return solve(rhs);
}

NodalField EllipticOperator::solve_adjoint_flux(const BoundaryField& q) const {
  const Mesh& mesh = model_->mesh();
  if (q.segment != Segment::Accessible) {
    throw std::invalid_argument("solve_adjoint: flux must live on the accessible segment");
  }
  NodalField rhs = assemble_boundary_load(mesh, q);
  for (double& v : rhs.values) v = -v;
  return solve(rhs);
}

NodalField EllipticOperator::solve_adjoint(const NodalField& u, const BoundaryField& p) const {
  return solve_adjoint_flux(hadamard(p, trace(model_->mesh(), u, Segment::Accessible)));
}

NodalField solve_forward(const EllipticModel& model, const BoundaryField& gamma) {
  return model.at(gamma).solve_forward();
}

NodalField solve_derivative(const EllipticModel& model, const BoundaryField& gamma,
                            const NodalField& u, const BoundaryField& d) {
  return model.at(gamma).solve_derivative(u, d);
}

NodalField solve_adjoint(const EllipticModel& model, const BoundaryField& gamma,
                         const NodalField& u, const BoundaryField& p) {
  return model.at(gamma).solve_adjoint(u, p);
}

double estimate_derivative_norm_squared(const EllipticModel& model, const BoundaryField& gamma,
                                        std::size_t iterations) {
  const Mesh& mesh = model.mesh();
  const EllipticOperator op = model.at(gamma);
  const NodalField u = op.solve_forward();
  const BoundaryField ui = trace(mesh, u, Segment::Inaccessible);

  BoundaryField d(Segment::Inaccessible, ui.size(), 1.0);
  double estimate = 0.0;
  for (std::size_t it = 0; it < iterations; ++it) {
    d = (1.0 / boundary_norm(mesh, d)) * d;
    const NodalField w = op.solve_derivative(u, d);
    const BoundaryField wa = trace(mesh, w, Segment::Accessible);
    estimate = boundary_inner(mesh, wa, wa);
    // Riesz representative of d -> <u'(gamma) d, wa>_{Ga}
    const NodalField adj = op.solve_adjoint_flux(wa);
    d = project_product(mesh, ui, trace(mesh, adj, Segment::Inaccessible));
    if (boundary_norm(mesh, d) == 0.0) return 0.0;
  }
  return estimate;
}

}  // namespace robin
