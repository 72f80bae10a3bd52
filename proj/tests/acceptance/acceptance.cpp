// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "robin/experiments.hpp"
#include "robin/verification.hpp"

using namespace robin;
namespace fs = std::filesystem;

namespace {

constexpr int kSeeds = 10;
constexpr int kRequiredSeeds = 8;
constexpr int kProbes = 20;
constexpr double kSurrogateSlack = 1e-12;
constexpr double kParabolicBetaTol = 1e-14;

int failures = 0;

void report(int id, bool ok, const std::string& title, const std::string& detail) {
  std::printf("%s [%2d] %s: %s\n", ok ? "PASS" : "FAIL", id, title.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(double v, int digits = 4) {
  std::ostringstream s;
  s.precision(digits);
  s << v;
  return s.str();
}

struct Band {
  int id;
  const char* example;
  std::size_t max_iterations;
  double max_error;
};

std::vector<ExperimentResult> reproduce(const Band& band) {
  std::vector<ExperimentResult> runs;
  int good = 0;
  std::size_t worst_k = 0;
  double worst_err = 0.0;
  std::vector<std::size_t> ks;
  for (int seed = 1; seed <= kSeeds; ++seed) {
    ExperimentSpec spec = default_spec(band.example);
    spec.seed = static_cast<std::uint64_t>(seed);
    runs.push_back(run_experiment(spec));
    const ExperimentResult& r = runs.back();
    const bool ok = r.lm.reason == StopReason::RelativeChange &&
                    r.lm.state.k <= band.max_iterations && r.final_error <= band.max_error;
    good += ok;
    worst_k = std::max(worst_k, r.lm.state.k);
    worst_err = std::max(worst_err, r.final_error);
    ks.push_back(r.lm.state.k);
  }
  std::string klist;
  for (std::size_t k : ks) klist += (klist.empty() ? "" : ",") + std::to_string(k);
  report(band.id, good >= kRequiredSeeds,
         std::string("Example ") + band.example + " reproduction",
         std::to_string(good) + "/" + std::to_string(kSeeds) + " seeds with k <= " +
             std::to_string(band.max_iterations) + " and error <= " + fmt(band.max_error) +
             " (k = " + klist + "; max error " + fmt(worst_err) + ")");
  return runs;
}

// Replays the seed-1 fixture step by step and probes the surrogate functional
// around each pre-clamp update.
template <typename Model, typename Observation, typename Step>
void probe_surrogate(const Model& model, const Observation& z, const BoundaryField& gamma0,
                     const LmConfig& cfg, std::size_t steps, Step step, std::size_t& probes,
                     double& worst) {
  LmState state(gamma0);
  UniformNoise rng(99);
  for (std::size_t k = 0; k < steps; ++k) {
    StepDetail detail;
    LmState next = step(model, state, z, cfg, nullptr, &detail);
    const auto js = make_surrogate_objective(model.mesh(), state.gamma, detail.step, detail.beta,
                                             cfg.majorant);
    const double best = js(detail.unclamped);
    for (int p = 0; p < kProbes; ++p) {
      BoundaryField g = detail.unclamped;
      const double scale = std::pow(10.0, -1 - p % 6);
      for (double& v : g.values) v += scale * rng.next();
      const double value = js(g);
      worst = std::max(worst, (best - value) / std::max(std::abs(value), 1e-300));
      ++probes;
    }
    state = std::move(next);
  }
}

void surrogate_criterion(const std::vector<std::vector<ExperimentResult>>& fixtures) {
  std::size_t probes = 0;
  double worst = -1.0;
  for (const auto& runs : fixtures) {
    const ExperimentResult& r = runs.front();
    const ExperimentSpec& spec = r.spec;
    ExampleSetup setup = make_example(spec.example, spec.disc, spec.solver);
    const BoundaryField gamma0(Segment::Inaccessible, r.exact_gamma.size(), *spec.gamma0);
    if (setup.elliptic) {
      const EllipticModel model(std::move(*setup.elliptic));
      const BoundaryField z = add_noise(observe(model.mesh(), setup.exact_u), spec.delta, spec.seed);
      probe_surrogate(model, z, gamma0, spec.lm, r.lm.state.k, lm_step_elliptic, probes, worst);
    } else {
      const ParabolicModel model(std::move(*setup.parabolic));
      const BoundarySeries z =
          add_noise(observe(model.mesh(), model.grid(), setup.exact_u), spec.delta, spec.seed);
      probe_surrogate(model, z, gamma0, spec.lm, r.lm.state.k, lm_step_parabolic, probes, worst);
    }
  }
  report(8, worst <= kSurrogateSlack, "Surrogate minimizer property",
         std::to_string(probes) + " probes; max relative excess of J(update) over J(probe) " +
             fmt(worst) + " (tolerance " + fmt(kSurrogateSlack) + ")");
}

void beta_criterion(const std::vector<std::vector<ExperimentResult>>& fixtures) {
  std::size_t rows = 0, bad = 0;
  double worst_parabolic = 0.0;
  for (const auto& runs : fixtures) {
    for (const ExperimentResult& r : runs) {
      for (const IterationRecord& row : r.lm.state.history) {
        ++rows;
        const double sq = row.residual * row.residual;
        if (r.kind == ProblemKind::Elliptic) {
          bad += row.beta != sq;
        } else {
          const double rel = std::abs(row.beta - sq) / sq;
          worst_parabolic = std::max(worst_parabolic, rel);
          bad += rel > kParabolicBetaTol;
        }
      }
    }
  }
  report(7, bad == 0 && rows > 0, "beta_k equals the squared residual",
         std::to_string(rows) + " history rows, " + std::to_string(bad) +
             " mismatches (elliptic bit-for-bit, parabolic max relative gap " + fmt(worst_parabolic) + ")");
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

void determinism_criterion() {
  const fs::path root = fs::temp_directory_path() / "robin_acceptance_determinism";
  fs::remove_all(root);
  bool ok = true;
  std::string detail;
  for (const char* example : {"5.1", "5.4"}) {
    std::string files[2][2];
    for (int rep = 0; rep < 2; ++rep) {
      const fs::path dir = root / (std::string(example) + "_" + std::to_string(rep));
      const std::vector<std::string> args{"robin", "run", "--example", example, "--seed", "7",
                                          "--out", dir.string()};
      std::vector<const char*> argv;
      for (const auto& a : args) argv.push_back(a.c_str());
      std::ostringstream out, err;
      if (cli::main(static_cast<int>(argv.size()), argv.data(), out, err) != 0) ok = false;
      files[rep][0] = slurp(dir / "history.csv");
      files[rep][1] = slurp(dir / "profile.csv");
    }
    const bool same = !files[0][0].empty() && files[0][0] == files[1][0] && files[0][1] == files[1][1];
    ok = ok && same;
    detail += std::string(detail.empty() ? "" : ", ") + example + (same ? " identical" : " differs");
  }
  fs::remove_all(root);
  report(11, ok, "Determinism", "history.csv and profile.csv from two runs with seed 7: " + detail);
}

}  // namespace

int main() {
  const std::vector<Band> bands{
      {1, "5.1", 30, 0.05}, {2, "5.2", 35, 0.06}, {3, "5.3", 30, 0.06}, {4, "5.4", 30, 0.06}};
  std::vector<std::vector<ExperimentResult>> fixtures;
  for (const Band& b : bands) fixtures.push_back(reproduce(b));

  {
    const CheckResult e = check_adjoint_elliptic(8, 16, 20);
    const CheckResult p = check_adjoint_parabolic(8, 16, 16, 20);
    report(5, e.passed && p.passed, "Adjoint identities",
           "max relative gap elliptic " + fmt(e.value) + ", parabolic " + fmt(p.value) +
               " over 20 pairs each (tolerance 1e-8)");
  }
  {
    const CheckResult e = check_derivative_elliptic(16, 32);
    const CheckResult p = check_derivative_parabolic(16, 32, 64);
    report(6, e.passed && p.passed, "Derivative consistency",
           "elliptic " + e.detail + "; parabolic " + p.detail + " (orders must lie in [0.7, 1.3])");
  }
  beta_criterion(fixtures);
  surrogate_criterion(fixtures);
  {
    const CheckResult o = check_oracle();
    report(9, o.passed, "Tiny-scale oracle", o.detail);
  }
  {
    const CheckResult e = check_fem_elliptic(8, 16);
    const CheckResult p = check_fem_parabolic(8, 16, 16);
    report(10, e.passed && p.passed, "FEM verification",
           "elliptic L2 ratio " + fmt(e.value) + " (>= 3.5), parabolic space-time ratio " +
               fmt(p.value) + " (>= 1.8)");
  }
  determinism_criterion();

  std::printf("%d of 11 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
