#include "robin/experiments.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Dense>

namespace robin {

namespace {

using std::numbers::pi;

double base_profile(double x, double y) { return x * x + std::cos(pi * y); }

std::vector<ExampleDefinition> build_registry() {
  std::vector<ExampleDefinition> r;
  r.push_back({"5.1", ProblemKind::Elliptic, "elliptic, smooth gamma = 3 - sin(pi y / 2)",
               [](double y) { return 3.0 - std::sin(pi * y / 2.0); }, 2e-3});
  r.push_back({"5.2", ProblemKind::Elliptic,
               "elliptic, piecewise quadratic gamma with a curvature jump at y = 1",
               [](double y) {
                 const double s = (y - 1.0) * (y - 1.0);
                 return y <= 1.0 ? s + 2.0 : -s + 2.0;
               },
               2e-3});
  r.push_back({"5.3", ProblemKind::Parabolic, "parabolic, gamma = 2 - (y - 1)^2",
               [](double y) { return -(y - 1.0) * (y - 1.0) + 2.0; }, 5e-3});
  r.push_back({"5.4", ProblemKind::Parabolic,
               "parabolic, gamma = (sin(pi y / 2) + y^(1/4)) / 2 + 1",
               [](double y) { return 0.5 * (std::sin(pi * y / 2.0) + std::pow(y, 0.25)) + 1.0; },
               5e-3});
  return r;
}

}  // namespace

const char* to_string(ProblemKind k) {
  return k == ProblemKind::Elliptic ? "elliptic" : "parabolic";
}

const std::vector<ExampleDefinition>& example_registry() {
  static const std::vector<ExampleDefinition> registry = build_registry();
  return registry;
}

const ExampleDefinition& find_example(std::string_view id) {
  for (const auto& e : example_registry()) {
    if (e.id == id) return e;
  }
  std::string known;
  for (const auto& e : example_registry()) known += (known.empty() ? "" : ", ") + e.id;
  throw std::invalid_argument("unknown example '" + std::string(id) + "' (known: " + known + ")");
}

ExampleSetup make_example(std::string_view id, const Discretization& disc,
                          const SolverOptions& solver) {
  const ExampleDefinition& def = find_example(id);
  if (def.id == "5.2" && disc.ny % 2 != 0) {
    throw std::invalid_argument("example 5.2 needs an even ny so that y = 1 is a mesh node");
  }
  Mesh mesh = build_rect_mesh(disc.nx, disc.ny, 1.0, 2.0);

  ExampleSetup setup;
  setup.definition = &def;
  auto gamma_star = def.exact_gamma;
  setup.exact_gamma = [gamma_star](double, double y) { return gamma_star(y); };

  if (def.kind == ProblemKind::Elliptic) {
    setup.elliptic = EllipticProblem{
        .mesh = std::move(mesh),
        .a = Coefficient(1.0),
        .c = Coefficient(1.0),
        .f = [](double x, double y) { return (pi * pi + 1.0) * std::cos(pi * y) + x * x - 2.0; },
        .g = [gamma_star](double, double y) { return 2.0 + (std::cos(pi * y) + 1.0) * gamma_star(y); },
        .h = {},
        .solver = solver};
    setup.exact_u = [](double x, double y, double) { return base_profile(x, y); };
  } else {
    setup.parabolic = ParabolicProblem{
        .mesh = std::move(mesh),
        .a = Coefficient(1.0),
        .f = [](double x, double y, double t) {
          return std::cos(pi * y) + x * x + (pi * pi * std::cos(pi * y) - 2.0) * t;
        },
        .g = [gamma_star](double, double y, double t) {
          return (2.0 + (std::cos(pi * y) + 1.0) * gamma_star(y)) * t;
        },
        .h = {},
        .u0 = {},
        .final_time = disc.final_time,
        .steps = disc.steps,
        .solver = solver};
    setup.exact_u = [](double x, double y, double t) { return base_profile(x, y) * t; };
  }
  return setup;
}

BoundaryField observe(const Mesh& mesh, const SpaceTimeFunction& exact_u) {
  return interpolate(mesh, Segment::Accessible,
                     [&](double x, double y) { return exact_u(x, y, 0.0); });
}

BoundarySeries observe(const Mesh& mesh, const TimeGrid& grid, const SpaceTimeFunction& exact_u) {
  BoundarySeries z(grid.levels());
  for (std::size_t n = 0; n < grid.levels(); ++n) {
    const double t = grid.time(n);
    z[n] = interpolate(mesh, Segment::Accessible,
                       [&](double x, double y) { return exact_u(x, y, t); });
  }
  return z;
}

namespace {

void perturb(BoundaryField& z, double delta, UniformNoise& noise) {
  for (double& v : z.values) v *= 1.0 + delta * noise.next();
}

void check_delta(double delta) {
  if (!(delta >= 0.0)) throw std::invalid_argument("noise level delta must be >= 0");
}

}  // namespace

BoundaryField add_noise(const BoundaryField& z, double delta, std::uint64_t seed) {
  check_delta(delta);
  UniformNoise noise(seed);
  BoundaryField out = z;
  perturb(out, delta, noise);
  return out;
}

BoundarySeries add_noise(const BoundarySeries& z, double delta, std::uint64_t seed) {
  check_delta(delta);
  UniformNoise noise(seed);
  BoundarySeries out = z;
  for (auto& level : out) perturb(level, delta, noise);
  return out;
}

ExperimentSpec default_spec(std::string_view id) {
  const ExampleDefinition& def = find_example(id);
  ExperimentSpec spec;
  spec.example = def.id;
  spec.lm.tolerance = def.tolerance;
  return spec;
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  const auto start = std::chrono::steady_clock::now();
  spec.lm.validate();
  check_delta(spec.delta);

  ExampleSetup setup = make_example(spec.example, spec.disc, spec.solver);
  ExperimentResult result;
  result.spec = spec;
  result.kind = setup.definition->kind;

  {
    const Mesh& mesh = setup.mesh();
    result.exact_gamma = interpolate(mesh, Segment::Inaccessible, setup.exact_gamma);
    for (NodeId id : mesh.segment(Segment::Inaccessible).nodes) {
      result.profile_y.push_back(mesh.nodes()[id].y);
    }
  }
  const BoundaryField gamma0 =
      spec.gamma0 ? BoundaryField(Segment::Inaccessible, result.exact_gamma.size(), *spec.gamma0)
                  : result.exact_gamma;

  if (setup.elliptic) {
    setup.elliptic->gamma_min = spec.lm.gamma_min;
    setup.elliptic->gamma_max = spec.lm.gamma_max;
    const EllipticModel model(std::move(*setup.elliptic));
    const BoundaryField z = add_noise(observe(model.mesh(), setup.exact_u), spec.delta, spec.seed);
    result.lm = run(model, gamma0, z, spec.lm, &result.exact_gamma);
    result.final_error = relative_error(model.mesh(), result.lm.state.gamma, result.exact_gamma);
  } else {
    setup.parabolic->gamma_min = spec.lm.gamma_min;
    setup.parabolic->gamma_max = spec.lm.gamma_max;
    const ParabolicModel model(std::move(*setup.parabolic));
    const BoundarySeries z =
        add_noise(observe(model.mesh(), model.grid(), setup.exact_u), spec.delta, spec.seed);
    result.lm = run(model, gamma0, z, spec.lm, &result.exact_gamma);
    result.final_error = relative_error(model.mesh(), result.lm.state.gamma, result.exact_gamma);
  }
  result.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

OracleReport oracle_optimality_check(const EllipticModel& model, const BoundaryField& gamma_k,
                                     const BoundaryField& observed, const LmConfig& cfg,
                                     std::optional<double> beta_override) {
  const Mesh& mesh = model.mesh();
  const EllipticOperator op = model.at(gamma_k);
  const NodalField u = op.solve_forward();
  const BoundaryField ua = trace(mesh, u, Segment::Accessible);
  const BoundaryField ui = trace(mesh, u, Segment::Inaccessible);
  const std::size_t ni = ui.size();
  const std::size_t na = ua.size();

  const Linearization lin = linearize(model, gamma_k, observed, cfg);
  OracleReport rep;
  rep.unknowns = ni;
  rep.residual_norm = lin.residual_norm;
  rep.beta = beta_override ? *beta_override : lin.beta;
  rep.surrogate_step = (1.0 / (cfg.majorant + rep.beta)) * lin.direction;

  auto dense = [](const SparseMatrix& m) {
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m.dim()),
                                              static_cast<Eigen::Index>(m.dim()));
    for (std::size_t i = 0; i < m.dim(); ++i) {
      for (std::size_t k = m.row_ptr()[i]; k < m.row_ptr()[i + 1]; ++k) {
        d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(m.col_idx()[k])) = m.values()[k];
      }
    }
    return d;
  };
  const Eigen::MatrixXd Ma = dense(segment_mass(mesh, Segment::Accessible));
  const Eigen::MatrixXd Mi = dense(segment_mass(mesh, Segment::Inaccessible));

  // Columns from derivative solves.
  Eigen::MatrixXd L(static_cast<Eigen::Index>(na), static_cast<Eigen::Index>(ni));
  for (std::size_t j = 0; j < ni; ++j) {
    BoundaryField e(Segment::Inaccessible, ni);
    e[j] = 1.0;
    const BoundaryField col = trace(mesh, op.solve_derivative(u, e), Segment::Accessible);
    for (std::size_t m = 0; m < na; ++m) L(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(j)) = col[m];
  }
  // Rows of M_a L from adjoint solves: e_m^T M_a L d = d^T B_u w*(e_m).
  const SparseMatrix Bu = segment_mass(mesh, ui);
  const Eigen::MatrixXd MaL = Ma * L;
  double mismatch = 0.0;
  for (std::size_t m = 0; m < na; ++m) {
    BoundaryField e(Segment::Accessible, na);
    e[m] = 1.0;
    const BoundaryField wi = trace(mesh, op.solve_adjoint_flux(e), Segment::Inaccessible);
    const std::vector<double> row = Bu * std::span<const double>(wi.values);
    for (std::size_t j = 0; j < ni; ++j) {
      mismatch = std::max(mismatch, std::abs(MaL(static_cast<Eigen::Index>(m),
                                                 static_cast<Eigen::Index>(j)) - row[j]));
    }
  }
  const double scale = MaL.cwiseAbs().maxCoeff();
  rep.operator_mismatch = scale > 0.0 ? mismatch / scale : mismatch;

  const Eigen::VectorXd r = Eigen::Map<const Eigen::VectorXd>(
      (observed - ua).values.data(), static_cast<Eigen::Index>(na));
  const Eigen::MatrixXd H = L.transpose() * Ma * L + rep.beta * Mi;
  const Eigen::VectorXd rhs = L.transpose() * (Ma * r);
  const Eigen::VectorXd s = H.ldlt().solve(rhs);
  rep.dense_step = BoundaryField(Segment::Inaccessible, std::vector<double>(s.data(), s.data() + s.size()));

  auto objective = [&](const Eigen::VectorXd& step) {
    const Eigen::VectorXd res = L * step - r;
    return res.dot(Ma * res) + rep.beta * step.dot(Mi * step);
  };
  rep.objective_current = objective(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ni)));
  rep.objective_surrogate = objective(Eigen::Map<const Eigen::VectorXd>(
      rep.surrogate_step.values.data(), static_cast<Eigen::Index>(ni)));
  rep.objective_dense = objective(s);
  return rep;
}

}  // namespace robin
