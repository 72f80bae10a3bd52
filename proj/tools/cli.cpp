#include "cli.hpp"

#include <atomic>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "robin/verification.hpp"

namespace robin::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kDigits = 17;

std::ofstream open_output(const fs::path& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << std::setprecision(kDigits);
  return f;
}

json nullable(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

void write_history_csv(std::ostream& out, const ExperimentResult& result) {
  const auto old = out.precision(kDigits);
  out << "iter,residual,beta,rel_change,rel_error\n";
  for (const IterationRecord& row : result.lm.state.history) {
    out << row.iteration << ',' << row.residual << ',' << row.beta << ',' << row.rel_change << ',';
    if (row.rel_error) out << *row.rel_error;
    out << '\n';
  }
  out.precision(old);
}

void write_profile_csv(std::ostream& out, const ExperimentResult& result) {
  const auto old = out.precision(kDigits);
  out << "y,gamma_exact,gamma_reconstructed\n";
  const BoundaryField& gamma = result.lm.state.gamma;
  for (std::size_t k = 0; k < result.profile_y.size(); ++k) {
    out << result.profile_y[k] << ',' << result.exact_gamma[k] << ',';
    if (k < gamma.size()) out << gamma[k];
    out << '\n';
  }
  out.precision(old);
}

json spec_json(const ExperimentSpec& spec) {
  json j;
  j["example"] = spec.example;
  j["nx"] = spec.disc.nx;
  j["ny"] = spec.disc.ny;
  j["nt"] = spec.disc.steps;
  j["final_time"] = spec.disc.final_time;
  j["delta"] = spec.delta;
  j["seed"] = spec.seed;
  j["gamma0"] = spec.gamma0 ? json(*spec.gamma0) : json("exact");
  j["eps"] = spec.lm.tolerance;
  j["A"] = spec.lm.majorant;
  j["max_iters"] = spec.lm.max_iterations;
  j["gamma_min"] = spec.lm.gamma_min;
  j["gamma_max"] = spec.lm.gamma_max;
  j["residual_floor"] = spec.lm.residual_floor ? json(*spec.lm.residual_floor) : json(nullptr);
  return j;
}

json summary_json(const ExperimentResult& result) {
  json j;
  j["config"] = spec_json(result.spec);
  j["problem"] = to_string(result.kind);
  j["stop_reason"] = to_string(result.lm.reason);
  j["iterations"] = result.lm.state.k;
  j["final_error"] = nullable(result.final_error);
  j["final_residual"] = nullable(result.lm.state.residual_norm);
  j["wall_seconds"] = result.seconds;
  j["error"] = result.lm.error.empty() ? json(nullptr) : json(result.lm.error);
  return j;
}

bool run_and_write(const ExperimentSpec& spec, const fs::path& dir, ExperimentResult* out,
                   std::string* error) {
  fs::create_directories(dir);
  std::optional<ExperimentResult> result;
  std::string message;
  try {
    result = run_experiment(spec);
    message = result->lm.error;
  } catch (const std::exception& e) {
    message = e.what();
  }

  json summary;
  if (result) {
    summary = summary_json(*result);
    auto history = open_output(dir / "history.csv");
    write_history_csv(history, *result);
    auto profile = open_output(dir / "profile.csv");
    write_profile_csv(profile, *result);
  } else {
    summary["config"] = spec_json(spec);
    summary["stop_reason"] = to_string(StopReason::Failed);
    summary["iterations"] = 0;
    summary["final_error"] = nullptr;
    summary["final_residual"] = nullptr;
    summary["wall_seconds"] = 0.0;
    summary["error"] = message;
  }
  open_output(dir / "summary.json") << summary.dump(2) << '\n';

  const bool ok = result && result->lm.reason != StopReason::Failed;
  if (out && result) *out = std::move(*result);
  if (error) *error = message;
  return ok;
}

namespace {

struct Options {
  std::string example = "5.1";
  std::size_t nx = 16, ny = 32, nt = 64;
  double final_time = 2.0;
  double delta = 0.02;
  std::uint64_t seed = 1;
  std::optional<double> eps;
  std::string gamma0 = "2";
  double majorant = 1.0;
  std::size_t max_iters = 100;
  std::optional<double> residual_floor;
  std::string out = "results";
};

ExperimentSpec to_spec(const Options& o) {
  ExperimentSpec spec = default_spec(o.example);
  spec.disc = {o.nx, o.ny, o.nt, o.final_time};
  spec.delta = o.delta;
  spec.seed = o.seed;
  if (o.eps) spec.lm.tolerance = *o.eps;
  if (o.gamma0 == "exact") {
    spec.gamma0.reset();
  } else {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(o.gamma0, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != o.gamma0.size()) {
      throw CLI::ValidationError("--gamma0", "expected a number or 'exact', got '" + o.gamma0 + "'");
    }
    spec.gamma0 = v;
  }
  spec.lm.majorant = o.majorant;
  spec.lm.max_iterations = o.max_iters;
  spec.lm.residual_floor = o.residual_floor;
  spec.lm.validate();
  if (spec.delta < 0.0) throw CLI::ValidationError("--delta", "must be >= 0");
  return spec;
}

std::string job_name(double delta, std::uint64_t seed) {
  std::ostringstream s;
  s << "delta_" << delta << "_seed_" << seed;
  return s.str();
}

int cmd_run(const Options& o, std::ostream& out, std::ostream& err) {
  const ExperimentSpec spec = to_spec(o);
  ExperimentResult result;
  std::string error;
  const bool ok = run_and_write(spec, o.out, &result, &error);
  if (!ok) {
    err << "run failed: " << error << '\n';
    return 1;
  }
  out << "example " << spec.example << ": " << to_string(result.lm.reason) << " after "
      << result.lm.state.k << " iterations, relative error " << std::setprecision(6)
      << result.final_error << " (" << o.out << ")\n";
  return 0;
}

int cmd_sweep(const Options& o, const std::vector<double>& deltas,
              std::vector<std::uint64_t> seeds, unsigned jobs, std::ostream& out,
              std::ostream& err) {
  if (seeds.empty()) seeds.push_back(o.seed);
  struct Job {
    ExperimentSpec spec;
    fs::path dir;
    bool ok = false;
    std::size_t iterations = 0;
    std::string reason;
    double error = 0.0;
    double residual = 0.0;
    std::string message;
  };
  std::vector<Job> work;
  for (double d : deltas) {
    for (std::uint64_t s : seeds) {
      Options one = o;
      one.delta = d;
      one.seed = s;
      Job job;
      job.spec = to_spec(one);
      job.dir = fs::path(o.out) / job_name(d, s);
      work.push_back(std::move(job));
    }
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < work.size(); i = next++) {
      Job& job = work[i];
      ExperimentResult r;
      job.ok = run_and_write(job.spec, job.dir, &r, &job.message);
      job.reason = to_string(job.ok ? r.lm.reason : StopReason::Failed);
      job.iterations = r.lm.state.k;
      job.error = r.final_error;
      job.residual = r.lm.state.residual_norm;
    }
  };
  std::vector<std::thread> pool;
  const unsigned n = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(work.size())));
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  fs::create_directories(o.out);
  auto csv = open_output(fs::path(o.out) / "sweep.csv");
  csv << "delta,seed,stop_reason,iterations,final_error,final_residual,error\n";
  int failures = 0;
  for (const Job& job : work) {
    csv << job.spec.delta << ',' << job.spec.seed << ',' << job.reason << ',' << job.iterations
        << ',';
    if (job.ok) csv << job.error << ',' << job.residual;
    else csv << ',';
    csv << ',' << std::quoted(job.message, '"', '"') << '\n';
    if (!job.ok) {
      ++failures;
      err << job.dir.string() << ": " << job.message << '\n';
    }
  }
  out << work.size() << " runs, " << failures << " failed (" << (fs::path(o.out) / "sweep.csv").string()
      << ")\n";
  return failures ? 1 : 0;
}

int cmd_verify(const std::string& only, std::ostream& out) {
  const auto results = run_verification(only);
  if (results.empty()) {
    out << "no verification check matches '" << only << "'\n";
    return 2;
  }
  bool all = true;
  for (const CheckResult& c : results) {
    out << (c.passed ? "PASS " : "FAIL ") << std::left << std::setw(22) << c.name << ' '
        << std::setprecision(6) << c.value << "  " << c.detail << '\n';
    all = all && c.passed;
  }
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Robin coefficient reconstruction from boundary data"};
  app.require_subcommand(1);
  app.set_config("--config", "", "flat key=value file; flags on the command line take precedence");

  std::vector<std::string> ids;
  for (const auto& e : example_registry()) ids.push_back(e.id);

  Options o;
  app.add_option("--example", o.example, "registered example id")->check(CLI::IsMember(ids));
  app.add_option("--nx", o.nx, "cells in x")->check(CLI::PositiveNumber);
  app.add_option("--ny", o.ny, "cells in y")->check(CLI::PositiveNumber);
  app.add_option("--nt", o.nt, "time steps (parabolic)")->check(CLI::PositiveNumber);
  app.add_option("--T", o.final_time, "final time (parabolic)")->check(CLI::PositiveNumber);
  app.add_option("--delta", o.delta, "relative noise level")->check(CLI::NonNegativeNumber);
  app.add_option("--seed", o.seed, "noise seed");
  app.add_option("--eps", o.eps, "relative-change tolerance (default per example)");
  app.add_option("--gamma0", o.gamma0, "constant initial guess, or 'exact'");
  app.add_option("--A", o.majorant, "surrogate majorant");
  app.add_option("--max-iters", o.max_iters, "iteration cap")->check(CLI::PositiveNumber);
  app.add_option("--residual-floor", o.residual_floor, "stop once the residual norm drops below");
  app.add_option("--out", o.out, "output directory");

  auto* run = app.add_subcommand("run", "reconstruct gamma for one configuration");
  run->fallthrough();

  std::vector<double> deltas;
  std::vector<std::uint64_t> seeds;
  unsigned jobs = 1;
  auto* sweep = app.add_subcommand("sweep", "one run per (delta, seed) pair");
  sweep->fallthrough();
  sweep->add_option("--deltas", deltas, "noise levels")->required()->delimiter(',')
      ->check(CLI::NonNegativeNumber);
  sweep->add_option("--seeds", seeds, "seeds (default: --seed)")->delimiter(',');
  sweep->add_option("--jobs", jobs, "concurrent runs")->check(CLI::PositiveNumber);

  std::string only;
  auto* verify = app.add_subcommand("verify", "adjoint, derivative, oracle and FEM checks");
  verify->add_option("--only", only, "run checks whose name contains this text");

  try {
    app.parse(argc, argv);
    if (*run) return cmd_run(o, out, err);
    if (*sweep) {
      if (deltas.empty()) throw CLI::ValidationError("--deltas", "needs at least one value");
      return cmd_sweep(o, deltas, seeds, jobs, out, err);
    }
    return cmd_verify(only, out);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  } catch (const std::invalid_argument& e) {
    err << "invalid configuration: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace robin::cli
