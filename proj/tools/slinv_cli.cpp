// slinv: command-line driver for forward spectra, synthetic targets,
// reconstructions, and verification reports.
//
// Exit codes: 0 success, 2 config/usage error, 3 solver failure,
// 4 verification failure.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "slinv/slinv.hpp"

namespace fs = std::filesystem;
using slinv::io::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitVerify = 4;

struct Options {
  std::string config;
  std::string out = ".";
  std::optional<std::uint64_t> seed;
  std::size_t grid = 0;
  bool quiet = false;
};

struct Manifest {
  std::string command;
  Options opts;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::optional<std::uint64_t> seed;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  void write() const {
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    json j = {{"command", command},
              {"config", opts.config},
              {"inputs", inputs},
              {"outputs", outputs},
              {"version", slinv::kVersion},
              {"wall_time_s", wall}};
    j["seed"] = seed ? json(*seed) : json(nullptr);
    slinv::io::write_json(fs::path(opts.out) / "manifest.json", j);
  }
};

fs::path resolve(const fs::path& config, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : config.parent_path() / path;
}

void print_lambda_table(const slinv::SpectralTarget& t) {
  std::printf("%3s %4s %24s\n", "i", "n", "lambda");
  for (const auto& e : t.entries()) std::printf("%3d %4d %24.15g\n", e.i, e.n, e.lambda);
}

std::vector<int> spectra_list(const json& cfg) {
  auto s = slinv::io::get_or<std::vector<int>>(cfg, "spectra", {1, 2});
  for (int i : s)
    if (i != 1 && i != 2) throw slinv::ValidationError("\"spectra\" entries must be 1 or 2");
  return s;
}

int cmd_forward(const Options& o) {
  using namespace slinv;
  Manifest man{"forward", o, {o.config}, {}, {}};
  const json cfg = io::read_json(o.config);
  const json& pj = io::require(cfg, "problem");
  const auto spectra = spectra_list(cfg);
  const double h0 = io::get_as<double>(pj, "h0");
  const double h1 = io::get_as<double>(pj, "h1");
  bool need_h2 = false;
  for (int i : spectra) need_h2 |= (i == 2);
  const double h2 = need_h2 ? io::get_as<double>(pj, "h2") : io::get_or<double>(pj, "h2", 0.0);
  const Potential q = io::potential_from_json(pj, o.grid);
  const int n_min = io::get_or(cfg, "n_min", 0);
  const int n_max = io::get_as<int>(cfg, "n_max");
  if (n_min < 0 || n_max < n_min) throw ValidationError("invalid index range n_min..n_max");

  std::vector<SpectralEntry> entries;
  for (int i : spectra) {
    const RobinPair bc{h0, i == 1 ? h1 : h2};
    for (int n = n_min; n <= n_max; ++n) entries.push_back({i, n, solve_eigenvalue(q, bc, n), 1.0});
  }
  const SpectralTarget spectrum(std::move(entries));
  json doc = io::to_json(spectrum);
  doc["grid"] = q.grid_size();
  if (spectra.size() == 2) {
    const auto rep = check_interlacing(spectrum);
    doc["interlacing"] = io::to_json(rep);
    if (!o.quiet) std::printf("interlacing: %s\n", rep.passed ? "pass" : rep.message.c_str());
  }
  const fs::path out = fs::path(o.out) / "spectrum.json";
  io::write_json(out, doc);
  man.outputs.push_back(out.string());
  if (!o.quiet) print_lambda_table(spectrum);
  man.write();
  return kExitOk;
}

int cmd_make_spectra(const Options& o) {
  using namespace slinv;
  Manifest man{"make-spectra", o, {o.config}, {}, {}};
  const json cfg = io::read_json(o.config);
  const ProblemVector pv = io::problem_from_json(io::require(cfg, "problem"), o.grid);
  const int n_min = io::get_or(cfg, "n_min", 0);
  const int n_max = io::get_as<int>(cfg, "n_max");
  if (n_min < 0 || n_max < n_min) throw ValidationError("invalid index range n_min..n_max");
  const auto indices = two_spectra_indices(n_min, n_max);

  std::vector<double> weights;
  if (cfg.contains("weights")) {
    weights = io::get_as<std::vector<double>>(cfg, "weights");
  } else if (cfg.contains("weight")) {
    weights.assign(indices.size(), io::get_as<double>(cfg, "weight"));
  }
  NoiseSpec noise = cfg.contains("noise") ? io::noise_from_json(cfg.at("noise")) : NoiseSpec{};
  if (o.seed) noise.seed = *o.seed;
  man.seed = noise.seed;

  const SpectralTarget target = generate_target(pv, indices, weights, noise);
  json doc = io::to_json(target);
  doc["noise"] = io::to_json(noise);
  doc["grid"] = pv.grid_size();
  const fs::path out = fs::path(o.out) / "target.json";
  io::write_json(out, doc);
  man.outputs.push_back(out.string());
  if (!o.quiet) {
    print_lambda_table(target);
    const auto rep = check_interlacing(target);
    std::printf("interlacing: %s\n", rep.passed ? "pass" : rep.message.c_str());
  }
  man.write();
  return kExitOk;
}

int cmd_reconstruct(const Options& o) {
  using namespace slinv;
  Manifest man{"reconstruct", o, {o.config}, {}, {}};
  const json cfg = io::read_json(o.config);

  SpectralTarget target;
  const json& tj = io::require(cfg, "target");
  if (tj.is_string()) {
    const fs::path tp = resolve(o.config, tj.get<std::string>());
    man.inputs.push_back(tp.string());
    target = io::target_from_json(io::read_json(tp));
  } else {
    target = io::target_from_json(tj);
  }
  const ProblemVector pv0 = io::problem_from_json(io::require(cfg, "initial"), o.grid);
  const DescentConfig dc = io::descent_from_json(io::get_or<json>(cfg, "descent", json::object()));
  std::optional<Potential> reference;
  if (cfg.contains("reference"))
    reference = io::potential_from_json(cfg.at("reference"), pv0.grid_size());

  const fs::path out_dir(o.out);
  const fs::path history_path = out_dir / "history.csv";
  const fs::path final_path = out_dir / "final.json";
  const fs::path snap_path = out_dir / "snapshots.csv";

  DescentResult res{{}, pv0, StopReason::SolverFailure, {}, 0};
  int code = kExitOk;
  try {
    res = pr_cg_minimize(pv0, target, dc, reference, [&](const IterateRecord& r, const ProblemVector&) {
      if (!o.quiet && (r.iter % 10 == 0 || r.event == IterateEvent::Reset)) {
        std::printf("iter %5d  G=%.6e  bc=(%.6f; %.6f; %.6f)", r.iter, r.G, r.h0, r.h1, r.h2);
        if (r.delta2) std::printf("  delta2=%.6f", *r.delta2);
        if (r.event == IterateEvent::Reset) std::printf("  [reset]");
        std::printf("  dbc=%.3e\n", r.bc_change);
      }
      return true;
    });
  } catch (const SolverError& e) {
    std::fprintf(stderr, "solver failure: %s\n", e.what());
    code = kExitSolver;
  }
  if (res.reason == StopReason::SolverFailure) {
    if (code == kExitOk) std::fprintf(stderr, "solver failure: %s\n", res.message.c_str());
    code = kExitSolver;
  }

  io::write_atomic(history_path, io::history_csv(res.history));
  man.outputs.push_back(history_path.string());
  if (dc.snapshot_every > 0) {
    io::write_atomic(snap_path, io::snapshots_csv(res.history));
    man.outputs.push_back(snap_path.string());
  }
  json fin = io::to_json(res.final_state);
  fin["stop_reason"] = to_string(res.reason);
  if (!res.message.empty()) fin["message"] = res.message;
  if (!res.history.empty()) {
    fin["iterations"] = res.history.back().iter;
    fin["G"] = res.history.back().G;
  }
  if (const auto best = best_delta2(res.history)) {
    const auto& b = res.history[*best];
    fin["best_delta2"] = {{"iter", b.iter}, {"delta2", *b.delta2}};
    if (!o.quiet) std::printf("best delta2 = %.6f at iteration %d\n", *b.delta2, b.iter);
  }
  io::write_json(final_path, fin);
  man.outputs.push_back(final_path.string());
  if (!o.quiet && !res.history.empty()) {
    const auto& last = res.history.back();
    std::printf("stop: %s after %d iterations, G=%.6e, bc=(%.6f; %.6f; %.6f)\n",
                to_string(res.reason).c_str(), last.iter, last.G, last.h0, last.h1, last.h2);
  }
  man.write();
  return code;
}

int cmd_verify(const Options& o) {
  using namespace slinv;
  Manifest man{"verify", o, {o.config}, {}, {}};
  const json cfg = io::read_json(o.config);
  const std::size_t grid = o.grid > 0 ? o.grid : io::get_or<std::size_t>(cfg, "grid", 0);
  const ProblemVector pv = io::problem_from_json(io::require(cfg, "problem"), grid);
  const int N = io::get_or(cfg, "n_max", 6);
  const double tol = io::get_or(cfg, "tol", 1e-3);
  const double bridge_tol = io::get_or(cfg, "bridge_tol", 1e-5);
  const int indep_n = io::get_or(cfg, "independence_n", std::min(N, 8));
  const std::string sign_name = io::get_or<std::string>(cfg, "sign", "wronskian");
  if (sign_name != "wronskian" && sign_name != "alternate")
    throw ValidationError("\"sign\" must be \"wronskian\" or \"alternate\"");
  if (N < 0 || N > 10) throw ValidationError("\"n_max\" must lie in 0..10");

  const auto lemma = lemma_biorthogonality(
      pv, N, sign_name == "wronskian" ? LemmaSign::Wronskian : LemmaSign::Alternate);
  const auto bridges = bridge_all(pv, N);
  const BridgeReport* worst_bridge = &bridges.front();
  for (const auto& b : bridges)
    if (b.difference() > worst_bridge->difference()) worst_bridge = &b;
  const auto indep = independence_smoke(pv, indep_n);

  const bool lemma_ok = lemma.passed(tol);
  const bool bridge_ok = worst_bridge->difference() <= bridge_tol;
  const bool indep_ok = indep.min_eigenvalue > 0.0;

  json bj = json::array();
  for (const auto& b : bridges) bj.push_back(io::to_json(b));
  json doc = {{"grid", pv.grid_size()},
              {"tol", tol},
              {"bridge_tol", bridge_tol},
              {"lemma", io::to_json(lemma)},
              {"lemma_passed", lemma_ok},
              {"bridge", bj},
              {"bridge_max_difference", worst_bridge->difference()},
              {"bridge_passed", bridge_ok},
              {"independence", io::to_json(indep)},
              {"independence_passed", indep_ok}};
  const fs::path out = fs::path(o.out) / "report.json";
  io::write_json(out, doc);
  man.outputs.push_back(out.string());
  man.write();

  auto label = [N](int idx) {
    return "(" + std::to_string(idx / (N + 1) + 1) + "," + std::to_string(idx % (N + 1)) + ")";
  };
  if (!o.quiet) {
    std::printf("lemma:        max deviation %.3e (tol %.1e) %s\n", lemma.max_deviation, tol,
                lemma_ok ? "pass" : "FAIL");
    std::printf("bridge:       max |Gamma~ - Gamma| %.3e (tol %.1e) %s\n",
                worst_bridge->difference(), bridge_tol, bridge_ok ? "pass" : "FAIL");
    std::printf("independence: min Gram eigenvalue %.3e %s\n", indep.min_eigenvalue,
                indep_ok ? "pass" : "FAIL");
  }
  if (lemma_ok && bridge_ok && indep_ok) return kExitOk;
  if (!lemma_ok)
    std::fprintf(stderr, "worst lemma entry: row %s col %s value %.6e expected %.6e\n",
                 label(lemma.worst_row).c_str(), label(lemma.worst_col).c_str(),
                 lemma.matrix[lemma.worst_row][lemma.worst_col],
                 lemma.expected[lemma.worst_row][lemma.worst_col]);
  if (!bridge_ok)
    std::fprintf(stderr, "worst bridge entry: (%d,%d)x(%d,%d) Gamma=%.6e Gamma~=%.6e\n",
                 worst_bridge->i, worst_bridge->n, worst_bridge->j, worst_bridge->m,
                 worst_bridge->gamma, worst_bridge->gamma_tilde);
  if (!indep_ok) std::fprintf(stderr, "Gram matrix not positive definite\n");
  return kExitVerify;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-spectra inverse Sturm-Liouville reconstruction"};
  app.require_subcommand(1);
  Options opts;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opts.config, "JSON config document")->required();
    sub->add_option("--out", opts.out, "output directory");
    sub->add_option("--seed", opts.seed, "noise seed (overrides the config)");
    sub->add_option("--grid", opts.grid, "grid size M (overrides the config)");
    sub->add_flag("--quiet", opts.quiet, "suppress tables and progress");
  };
  auto* forward = app.add_subcommand("forward", "compute eigenvalues of a problem");
  auto* make = app.add_subcommand("make-spectra", "generate a (noisy) two-spectra target");
  auto* recon = app.add_subcommand("reconstruct", "minimize the eigenvalue functional");
  auto* verify = app.add_subcommand("verify", "run the biorthogonality/independence checks");
  for (auto* s : {forward, make, recon, verify}) add_common(s);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (opts.grid == 1) throw slinv::ValidationError("--grid must be at least 2");
    fs::create_directories(opts.out);
    if (*forward) return cmd_forward(opts);
    if (*make) return cmd_make_spectra(opts);
    if (*recon) return cmd_reconstruct(opts);
    if (*verify) return cmd_verify(opts);
  } catch (const slinv::ValidationError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const slinv::SolverError& e) {
    std::fprintf(stderr, "solver failure: %s\n", e.what());
    return kExitSolver;
  } catch (const slinv::io::json::exception& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  }
  return kExitConfig;
}
