#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "robin/elliptic.hpp"
#include "robin/parabolic.hpp"
#include "robin/verification.hpp"

using namespace robin;

TEST_CASE("time grid") {
  const TimeGrid g{2.0, 64};
  CHECK(g.dt() == 2.0 / 64.0);
  CHECK(g.levels() == 65);
  CHECK(g.time(0) == 0.0);
  CHECK(g.time(64) == 2.0);
  const TimeGrid odd{1.0, 3};
  CHECK(odd.time(3) == 1.0);
}

TEST_CASE("zero data stay zero") {
  ParabolicProblem p{.mesh = build_rect_mesh(4, 8, 1.0, 2.0), .steps = 8};
  const ParabolicModel model(std::move(p));
  const TimeSeriesField u =
      solve_forward_parabolic(model, BoundaryField(Segment::Inaccessible, 9, 2.0));
  REQUIRE(u.size() == 9);
  for (const auto& level : u) CHECK(norm2(level.values) == 0.0);
}

TEST_CASE("time-independent data approach the steady state") {
  const auto f = [](double x, double y) { return 1.0 + x * y; };
  const auto g = [](double, double y) { return 2.0 + y; };
  const Mesh mesh = build_rect_mesh(8, 16, 1.0, 2.0);
  const BoundaryField gamma = interpolate(mesh, Segment::Inaccessible, [](double, double y) { return 1.0 + y; });

  EllipticProblem e{.mesh = mesh, .c = Coefficient(0.0), .f = f, .g = g};
  const EllipticModel steady(std::move(e));
  const NodalField target = solve_forward(steady, gamma);

  ParabolicProblem p{.mesh = mesh,
                     .f = [f](double x, double y, double) { return f(x, y); },
                     .g = [g](double x, double y, double) { return g(x, y); },
                     .final_time = 40.0,
                     .steps = 80};
  const ParabolicModel model(std::move(p));
  const TimeSeriesField u = solve_forward_parabolic(model, gamma);
  double err = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) err = std::max(err, std::abs(u.back()[i] - target[i]));
  CHECK(err < 1e-6);
}

TEST_CASE("right-endpoint time integration") {
  const TimeGrid grid{2.0, 4};
  BoundarySeries s(grid.levels(), BoundaryField(Segment::Inaccessible, 2, 1.0));
  s[0] = BoundaryField(Segment::Inaccessible, 2, 100.0);  // level 0 carries no weight
  s[4] = BoundaryField(Segment::Inaccessible, 2, 3.0);
  const BoundaryField total = time_integral_boundary(s, grid);
  CHECK(total[0] == doctest::Approx(0.5 * (1 + 1 + 1 + 3)));
  s.pop_back();
  CHECK_THROWS_AS(time_integral_boundary(s, grid), std::invalid_argument);
}

TEST_CASE("implicit Euler is exact for solutions linear in time") {
  const CheckResult r = check_fem_parabolic(4, 8, 4);
  INFO(r.detail);
  // Only spatial error remains, so halving h alone gives the ~4x ratio.
  CHECK(r.value > 3.5);
}

TEST_CASE("adjoint identity and finite differences") {
  const CheckResult adj = check_adjoint_parabolic(4, 8, 6, 5, 5);
  INFO(adj.detail);
  CHECK(adj.value <= 1e-8);
  const CheckResult fd = check_derivative_parabolic(4, 8, 8);
  INFO(fd.detail);
  CHECK(fd.passed);
}

TEST_CASE("series length mismatches are rejected") {
  ParabolicProblem p{.mesh = build_rect_mesh(2, 4, 1.0, 2.0), .steps = 3};
  const ParabolicModel model(std::move(p));
  const BoundaryField gamma(Segment::Inaccessible, 5, 1.0);
  const ParabolicOperator op = model.at(gamma);
  const TimeSeriesField u = op.solve_forward();
  TimeSeriesField shorter(u.begin(), u.end() - 1);
  CHECK_THROWS_AS(op.solve_derivative(shorter, gamma), std::invalid_argument);
  CHECK_THROWS_AS(op.solve_adjoint_flux(BoundarySeries(2)), std::invalid_argument);
  ParabolicProblem bad{.mesh = build_rect_mesh(2, 4, 1.0, 2.0), .steps = 0};
  CHECK_THROWS_AS(ParabolicModel(std::move(bad)), std::invalid_argument);
}
