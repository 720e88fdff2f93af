// polyobs: synthesize transforms and run polytopic/interval observers on
// scenario files.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "polyobs/scenario.hpp"
#include "polyobs/simulation.hpp"

using namespace polyobs;

namespace {

void print_plan(const TransformPair& tp) {
  std::printf("domain %s, n = %ld, m = %ld, residual %.3e\n", std::string(to_string(tp.domain)).c_str(),
              long(tp.n()), long(tp.m()), tp.residual);
  for (const auto& r : tp.plan.real) {
    std::printf("  real block: lambda = %.6g, size %d\n", r.lambda, r.size);
  }
  for (const auto& c : tp.plan.complex) {
    std::printf("  complex block: %.6g +/- %.6gi, size %d, m = %d\n", c.sigma, c.omega, c.size, c.m);
  }
  if (tp.domain == TimeDomain::CT) {
    std::printf("  mu_inf(Q) = %.6g\n", mu_inf(tp.Q));
  } else {
    std::printf("  ||Q||_inf = %.6g\n", norm_inf(tp.Q));
  }
}

int cmd_synth(const std::string& path, const std::string& out) {
  const Scenario sc = load_scenario(path);
  const ClosedLoop cl = validate_gain(sc.model, sc.L);
  const TransformPair tp = synthesize_transform(cl.A_cl, sc.model.domain, sc.synthesis_options());
  if (out.empty()) {
    write_transform(std::cout, tp);
    return 0;
  }
  std::ofstream f(out);
  if (!f) throw Error(ErrorCode::Io, "cannot write \"" + out + "\"");
  write_transform(f, tp);
  print_plan(tp);
  std::printf("wrote %s\n", out.c_str());
  return 0;
}

int cmd_run(const std::string& path, std::string dir, std::optional<int> m_override,
            std::optional<double> dt) {
  Scenario sc = load_scenario(path);
  if (m_override) sc.transform.m_override_all = *m_override;
  if (dt) sc.dt = *dt;
  sc.validate();
  if (dir.empty()) dir = "out/" + (sc.name.empty() ? std::string("run") : sc.name);
  const RunArtifacts a = run_scenario(sc);
  print_plan(a.transform);
  const auto files = write_outputs(a, dir);
  std::printf("%zu samples, min membership slack %.3e\n", a.samples.size(),
              a.samples.empty() ? 0.0 : a.min_membership_slack);
  for (const auto& f : files) std::printf("  %s/%s\n", dir.c_str(), f.c_str());
  return 0;
}

int cmd_check(const std::string& path) {
  const Scenario sc = load_scenario(path);
  RunOptions opt;
  opt.enforce_iss = true;
  opt.volumes = false;
  const RunArtifacts a = run_scenario(sc, opt);
  print_plan(a.transform);
  std::printf("ok: %zu samples enclosed, min membership slack %.3e, max eps - iss %.3e, "
              "%ld containment checks\n",
              a.samples.size(), a.samples.empty() ? 0.0 : a.min_membership_slack,
              a.samples.empty() ? 0.0 : a.max_iss_excess, a.containment_checks);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Polytopic and interval observers via polyhedral Lyapunov transforms"};
  app.require_subcommand(1);

  std::string scenario, out;
  std::optional<int> m_override;
  std::optional<double> dt;

  auto* synth = app.add_subcommand("synth", "synthesize (P, Q) for a scenario");
  synth->add_option("scenario", scenario, "scenario file")->required();
  synth->add_option("-o,--output", out, "transform file (default: stdout)");

  auto* run = app.add_subcommand("run", "simulate a scenario and write CSV outputs");
  run->add_option("scenario", scenario, "scenario file")->required();
  run->add_option("-o,--output", out, "output directory (default: out/<name>)");
  run->add_option("--m-override", m_override, "block size for every complex pair")
      ->check(CLI::PositiveNumber);
  run->add_option("--dt", dt, "CT integration step")->check(CLI::PositiveNumber);

  auto* check = app.add_subcommand("check", "run and fail on any enclosure, order or ISS violation");
  check->add_option("scenario", scenario, "scenario file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*synth) return cmd_synth(scenario, out);
    if (*run) return cmd_run(scenario, out, m_override, dt);
    return cmd_check(scenario);
  } catch (const Error& e) {
    std::fprintf(stderr, "polyobs: %s\n", e.what());
    return exit_status(e.code());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "polyobs: %s\n", e.what());
    return 4;
  }
}
