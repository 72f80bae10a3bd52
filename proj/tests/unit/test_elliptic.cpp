#include <cmath>
#include <numbers>
#include <stdexcept>

#include "doctest.h"
#include "robin/elliptic.hpp"
#include "robin/experiments.hpp"
#include "robin/verification.hpp"

using namespace robin;

namespace {

struct Fixture {
  ExampleSetup setup = make_example("5.1");
  EllipticModel model{std::move(*setup.elliptic)};
  BoundaryField gamma = interpolate(model.mesh(), Segment::Inaccessible, setup.exact_gamma);
};

double max_abs_diff(const NodalField& a, const NodalField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("manufactured solution is reproduced at 16 x 32") {
  Fixture f;
  const NodalField u = solve_forward(f.model, f.gamma);
  const NodalField exact =
      interpolate(f.model.mesh(), [&](double x, double y) { return f.setup.exact_u(x, y, 0.0); });
  // Recorded 0.005186 for this mesh.
  CHECK(max_abs_diff(u, exact) < 0.0052);
}

TEST_CASE("CG on the assembled system converges well inside the cap") {
  Fixture f;
  const EllipticOperator op = f.model.at(f.gamma);
  CHECK(op.matrix().max_asymmetry() < 1e-14);
  const NodalField u = op.solve_forward();
  const std::vector<double> b = op.matrix() * std::span<const double>(u.values);
  SolveStats stats;
  solve_spd(op.matrix(), b, SolverOptions{1e-10, 0}, &stats);
  // Recorded 129 iterations for 561 unknowns.
  CHECK(stats.iterations <= 140);
  CHECK(stats.relative_residual <= 1e-10);
}

TEST_CASE("sensitivity is linear in the direction") {
  Fixture f;
  const EllipticOperator op = f.model.at(f.gamma);
  const NodalField u = op.solve_forward();
  const Mesh& mesh = f.model.mesh();
  const BoundaryField d1 = interpolate(mesh, Segment::Inaccessible, [](double, double y) { return y; });
  const BoundaryField d2 = interpolate(mesh, Segment::Inaccessible, [](double, double y) { return std::cos(y); });
  const NodalField w1 = op.solve_derivative(u, d1);
  const NodalField w2 = op.solve_derivative(u, d2);
  const NodalField w12 = op.solve_derivative(u, d1 + 3.0 * d2);
  double m = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) m = std::max(m, std::abs(w12[i] - w1[i] - 3.0 * w2[i]));
  CHECK(m < 1e-8);
  const NodalField zero = op.solve_derivative(u, BoundaryField(Segment::Inaccessible, d1.size()));
  CHECK(norm2(zero.values) == 0.0);
}

TEST_CASE("raising gamma lowers the solution when data are positive") {
  Fixture f;
  const NodalField u = solve_forward(f.model, f.gamma);
  const BoundaryField d(Segment::Inaccessible, f.gamma.size(), 1.0);
  const NodalField w = solve_derivative(f.model, f.gamma, u, d);
  // u > 0 on most of the inaccessible edge, so u'(gamma) 1 pulls the trace down there.
  const BoundaryField wi = trace(f.model.mesh(), w, Segment::Inaccessible);
  CHECK(wi[f.gamma.size() / 4] < 0.0);
}

TEST_CASE("finite differences agree with the sensitivity") {
  const CheckResult r = check_derivative_elliptic(8, 16);
  INFO(r.detail);
  CHECK(r.passed);
}

TEST_CASE("adjoint identity holds") {
  const CheckResult r = check_adjoint_elliptic(4, 8, 5, 3);
  INFO(r.detail);
  CHECK(r.value <= 1e-8);
}

TEST_CASE("zero adjoint flux gives a zero adjoint state") {
  Fixture f;
  const EllipticOperator op = f.model.at(f.gamma);
  const NodalField z = op.solve_adjoint_flux(BoundaryField(Segment::Accessible, 65));
  CHECK(norm2(z.values) == 0.0);
}

TEST_CASE("admissibility checks") {
  Fixture f;
  CHECK_THROWS_AS(f.model.at(BoundaryField(Segment::Inaccessible, 33, 0.05)), std::invalid_argument);
  CHECK_THROWS_AS(f.model.at(BoundaryField(Segment::Inaccessible, 33, 11.0)), std::invalid_argument);
  CHECK_THROWS_AS(f.model.at(BoundaryField(Segment::Accessible, 33, 2.0)), std::invalid_argument);
  CHECK_THROWS_AS(f.model.at(BoundaryField(Segment::Inaccessible, 32, 2.0)), std::invalid_argument);
}

TEST_CASE("derivative norm estimate") {
  Fixture f;
  const BoundaryField two(Segment::Inaccessible, 33, 2.0);
  const double n2 = estimate_derivative_norm_squared(f.model, two, 40);
  // A = 1 majorizes the linearization at the usual initial guess.
  CHECK(n2 > 0.0);
  CHECK(n2 < 1.0);

  // Rayleigh quotient of any direction stays below the estimate.
  const NodalField u = solve_forward(f.model, two);
  const BoundaryField d = interpolate(f.model.mesh(), Segment::Inaccessible,
                                      [](double, double y) { return 1.0 + y; });
  const BoundaryField wa =
      trace(f.model.mesh(), solve_derivative(f.model, two, u, d), Segment::Accessible);
  const double q = boundary_inner(f.model.mesh(), wa, wa) / boundary_inner(f.model.mesh(), d, d);
  CHECK(q <= n2 * (1.0 + 1e-6));
}
