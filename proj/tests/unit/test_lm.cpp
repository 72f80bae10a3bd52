#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "robin/experiments.hpp"
#include "robin/lm.hpp"

using namespace robin;

namespace {

struct Elliptic {
  ExampleSetup setup = make_example("5.1", {8, 16, 64, 2.0});
  EllipticModel model{std::move(*setup.elliptic)};
  const Mesh& mesh() const { return model.mesh(); }
  BoundaryField z = add_noise(observe(model.mesh(), setup.exact_u), 0.02, 4);
  BoundaryField exact = interpolate(model.mesh(), Segment::Inaccessible, setup.exact_gamma);
  BoundaryField two = BoundaryField(Segment::Inaccessible, 17, 2.0);
};

}  // namespace

TEST_CASE("config validation") {
  LmConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.majorant = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.tolerance = -1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.max_iterations = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.gamma_min = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("one step follows the closed-form update") {
  Elliptic e;
  LmConfig cfg;
  const LmState s0(e.two);
  StepDetail detail;
  const LmState s1 = lm_step_elliptic(e.model, s0, e.z, cfg, &e.exact, &detail);
  const Linearization lin = linearize(e.model, e.two, e.z, cfg);

  CHECK(s1.k == 1);
  REQUIRE(s1.history.size() == 1);
  CHECK(detail.beta == lin.residual_norm * lin.residual_norm);
  for (std::size_t k = 0; k < e.two.size(); ++k) {
    CHECK(detail.step[k] == doctest::Approx(lin.direction[k] / (1.0 + detail.beta)).epsilon(1e-15));
    CHECK(s1.gamma[k] == detail.unclamped[k]);
  }
  const IterationRecord& row = s1.history.front();
  CHECK(row.iteration == 1);
  CHECK(row.residual == lin.residual_norm);
  CHECK(row.rel_change == doctest::Approx(boundary_norm(e.mesh(), s1.gamma - e.two) /
                                          boundary_norm(e.mesh(), e.two)));
  REQUIRE(row.rel_error);
  CHECK(*row.rel_error == doctest::Approx(relative_error(e.mesh(), s1.gamma, e.exact)));
}

TEST_CASE("pre-clamp update minimizes the surrogate functional") {
  Elliptic e;
  LmConfig cfg;
  StepDetail detail;
  lm_step_elliptic(e.model, LmState(e.two), e.z, cfg, nullptr, &detail);
  const auto js = make_surrogate_objective(e.mesh(), e.two, detail.step, detail.beta, cfg.majorant);
  const double best = js(detail.unclamped);
  UniformNoise rng(21);
  for (int probe = 0; probe < 20; ++probe) {
    BoundaryField g = detail.unclamped;
    const double scale = std::pow(10.0, -1 - probe % 5);
    for (double& v : g.values) v += scale * rng.next();
    CHECK(best <= js(g) * (1.0 + 1e-12));
  }
}

TEST_CASE("beta equals the squared residual in every history row") {
  Elliptic e;
  const LmResult r = run(e.model, e.two, e.z, LmConfig{});
  REQUIRE(r.reason == StopReason::RelativeChange);
  for (const auto& row : r.state.history) CHECK(row.beta == row.residual * row.residual);
  CHECK(r.state.beta == r.state.residual_norm * r.state.residual_norm);
}

TEST_CASE("iteration cap") {
  Elliptic e;
  LmConfig cfg;
  cfg.max_iterations = 5;
  cfg.tolerance = 1e-12;
  const LmResult r = run(e.model, e.two, e.z, cfg);
  CHECK(r.reason == StopReason::IterationCap);
  CHECK(r.state.k == 5);
  CHECK(r.state.history.size() == 5);
}

TEST_CASE("huge tolerance stops after one step") {
  Elliptic e;
  LmConfig cfg;
  cfg.tolerance = 1e6;
  const LmResult r = run(e.model, e.two, e.z, cfg);
  CHECK(r.reason == StopReason::RelativeChange);
  CHECK(r.state.history.size() == 1);
  CHECK(std::isfinite(r.state.residual_norm));
}

TEST_CASE("residual floor stops before stepping") {
  Elliptic e;
  LmConfig cfg;
  cfg.residual_floor = 10.0;
  const LmResult r = run(e.model, e.two, e.z, cfg);
  CHECK(r.reason == StopReason::ResidualFloor);
  CHECK(r.state.history.empty());
  CHECK(r.state.gamma.values == e.two.values);
}

TEST_CASE("data generated by the discrete model give a zero step") {
  Elliptic e;
  const BoundaryField z = trace(e.mesh(), solve_forward(e.model, e.two), Segment::Accessible);
  StepDetail detail;
  const LmState s1 = lm_step_elliptic(e.model, LmState(e.two), z, LmConfig{}, nullptr, &detail);
  CHECK(detail.beta == 0.0);
  for (double v : detail.step.values) CHECK(v == 0.0);
  CHECK(s1.history.front().rel_change == 0.0);
}

TEST_CASE("iterates are clamped to the admissible box") {
  Elliptic e;
  LmConfig cfg;
  cfg.gamma_max = 2.05;
  cfg.max_iterations = 3;
  cfg.tolerance = 1e-12;
  const LmResult r = run(e.model, e.two, e.z, cfg);
  REQUIRE(r.reason == StopReason::IterationCap);
  std::size_t clamped = 0;
  for (const auto& row : r.state.history) clamped += row.clamped_nodes;
  CHECK(clamped > 0);
  for (double v : r.state.gamma.values) CHECK(v <= 2.05);
}

TEST_CASE("trace guard failure ends the run with context") {
  Elliptic e;
  LmConfig cfg;
  cfg.trace_guard = 1e3;
  CHECK_THROWS_AS(linearize(e.model, e.two, e.z, cfg), TraceGuardError);
  const LmResult r = run(e.model, e.two, e.z, cfg);
  CHECK(r.reason == StopReason::Failed);
  CHECK(r.error.find("iteration 0") != std::string::npos);
  CHECK(r.error.find("trace guard") != std::string::npos);
}

TEST_CASE("parabolic step and beta rule") {
  ExampleSetup setup = make_example("5.3", {4, 8, 8, 2.0});
  const ParabolicModel model(std::move(*setup.parabolic));
  const BoundarySeries z = add_noise(observe(model.mesh(), model.grid(), setup.exact_u), 0.02, 2);
  LmConfig cfg;
  cfg.tolerance = 5e-3;
  const LmResult r = run(model, BoundaryField(Segment::Inaccessible, 9, 2.0), z, cfg);
  CHECK(r.reason == StopReason::RelativeChange);
  REQUIRE(!r.state.history.empty());
  for (const auto& row : r.state.history) CHECK(row.beta == row.residual * row.residual);
  CHECK(r.state.history.front().residual > r.state.residual_norm);
}

TEST_CASE("relative error") {
  const Mesh mesh = build_rect_mesh(2, 4, 1.0, 2.0);
  const BoundaryField a(Segment::Inaccessible, 5, 2.0);
  CHECK(relative_error(mesh, a, a) == 0.0);
  CHECK(relative_error(mesh, 1.5 * a, a) == doctest::Approx(0.5));
  CHECK_THROWS_AS(relative_error(mesh, a, BoundaryField(Segment::Inaccessible, 5)), std::invalid_argument);
}
