// Copyright 2026-present the scq-recur project
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line harness: gen, run, compare, verify.
//
// Exit codes: 0 success, 1 contract or margin failure, 2 usage or parse error.

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "scq/baseline.hpp"
#include "scq/csv.hpp"
#include "scq/errors.hpp"
#include "scq/instances.hpp"
#include "scq/recur.hpp"

namespace {

constexpr int kExitContract = 1;
constexpr int kExitUsage = 2;

struct RunOptions {
  std::string algo = "recur";
  std::string instance;
  double gamma_fed = std::numeric_limits<double>::quiet_NaN();
  double epsilon = 0;
  std::string mode = "quota";
  std::size_t batch_m = 0;
  double b_const = 1.0;
  bool hull_expansion = false;
  std::string expansion_factor = "tessellation";
  std::uint64_t seed = 0;
  std::size_t phase1 = 0;
  std::string csv;
  std::string transcript;
  std::string trace;
};

void add_recur_flags(CLI::App* app, RunOptions& o) {
  app->add_option("--gamma-fed", o.gamma_fed, "Margin given to the algorithm (default: the instance's)");
  app->add_option("--epsilon", o.epsilon, "Stop once at most epsilon n points are unlabeled")
      ->check(CLI::Range(0.0, 1.0));
  app->add_option("--mode", o.mode, "Sampling mode")->check(CLI::IsMember({"quota", "batch"}));
  app->add_option("--batch-m", o.batch_m, "Draws per round in batch mode (0: 10 k)");
  app->add_option("--b-const", o.b_const, "Quota constant b in ceil(b d^2 ln k)");
  app->add_option("--hull-expansion", o.hull_expansion, "Greedy hull expansion (true/false)");
  app->add_option("--expansion-factor", o.expansion_factor, "Hull expansion step")
      ->check(CLI::IsMember({"tessellation", "margin-safe"}));
  app->add_option("--phase1", o.phase1, "scq-kmeans phase-1 sample size (0: default)");
}

scq::RecurConfig recur_config(const RunOptions& o, std::uint64_t seed) {
  scq::RecurConfig cfg;
  cfg.epsilon = o.epsilon;
  cfg.sampling = o.mode == "batch" ? scq::SamplingMode::batch(o.batch_m)
                                   : scq::SamplingMode::quota(o.b_const);
  cfg.use_hull_expansion = o.hull_expansion;
  cfg.expansion_factor = o.expansion_factor == "margin-safe"
                             ? scq::HullExpansionOptions::Factor::kMarginSafe
                             : scq::HullExpansionOptions::Factor::kTessellation;
  cfg.rng_seed = seed;
  return cfg;
}

double fed_gamma(const RunOptions& o, const scq::LatentInstance& inst) {
  return std::isnan(o.gamma_fed) ? inst.gamma : o.gamma_fed;
}

void print_margins(const scq::LatentInstance& inst) {
  if (!inst.metrics) return;
  std::cout << "margins:";
  for (double m : inst.margins()) std::cout << ' ' << m;
  std::cout << '\n';
}

int cmd_gen(const std::string& generator, const std::size_t n, const int k, const std::size_t d,
            const double gamma, const double kappa, const double p, const double perturb,
            const std::uint64_t seed, const std::string& out) {
  scq::LatentInstance inst;
  long long hidden = -1;
  if (generator == "ellipsoidal") {
    inst = scq::gen_ellipsoidal(n, k, d, gamma, kappa, seed);
  } else if (generator == "adversarial") {
    inst = scq::gen_adversarial_kmeans(n, p, gamma, seed, perturb);
  } else if (generator == "lb-sphere") {
    auto h = scq::gen_lb_sphere(d, gamma, seed);
    inst = std::move(h.instance);
    hidden = h.hidden;
  } else {
    auto h = scq::gen_lb_hypercube(d, gamma, n, seed);
    inst = std::move(h.instance);
    hidden = h.hidden;
  }
  scq::save_instance(inst, out);
  std::cout << "wrote " << out << " (n=" << inst.size() << ", d=" << inst.points.dim()
            << ", k=" << inst.k << ", gamma=" << inst.gamma << ")\n";
  if (hidden >= 0) std::cout << "hidden: " << hidden << '\n';
  print_margins(inst);
  return 0;
}

int cmd_run(const RunOptions& o) {
  const scq::LatentInstance inst = scq::load_instance(o.instance);
  const scq::Oracle oracle(inst);
  scq::QueryLedger ledger(!o.transcript.empty());
  const double gamma = fed_gamma(o, inst);
  scq::RecoveredClustering result;
  std::vector<scq::TessellationTrace> traces;
  if (o.algo == "recur") {
    scq::RecurHooks hooks;
    hooks.latent = inst.labels;
    if (!o.trace.empty()) {
      hooks.on_round = [&](const scq::RoundStats&, const scq::TessellationTrace& t,
                           std::span<const scq::PointId>, std::span<const int>) { traces.push_back(t); };
    }
    result = scq::recur(inst.points, inst.k, gamma, recur_config(o, o.seed), oracle, ledger, hooks);
  } else {
    result = scq::scq_kmeans(inst.points, inst.k, gamma, {o.phase1, o.seed}, oracle, ledger, inst.labels);
  }
  const double delta = scq::clustering_error(result.assignment, inst.labels, inst.k);
  const double wall = result.rounds.empty() ? 0.0 : result.rounds.back().wall_time_s;
  if (!o.csv.empty()) {
    std::ofstream out(o.csv);
    scq::write_round_csv(out, result.rounds);
  }
  if (!o.transcript.empty()) {
    std::ofstream out(o.transcript);
    ledger.write_csv(out);
  }
  if (!o.trace.empty()) {
    std::ofstream out(o.trace);
    scq::write_tessellation_json(out, traces, inst.labels);
  }
  std::cout << "algo=" << o.algo << " delta=" << delta << " queries=" << ledger.count()
            << " rounds=" << result.rounds.size() << " unlabeled=" << result.unlabeled()
            << " wall_time_s=" << wall << '\n';
  return 0;
}

int cmd_compare(const RunOptions& o, const std::vector<std::string>& seed_text) {
  std::vector<std::uint64_t> seeds;
  for (const auto& t : seed_text) {
    std::uint64_t v = 0;
    const auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc{} || end != t.data() + t.size()) {
      std::cerr << "compare: bad seed '" << t << "'\n";
      return kExitUsage;
    }
    seeds.push_back(v);
  }
  if (seeds.empty()) {
    std::cerr << "compare: --seeds must list at least one seed\n";
    return kExitUsage;
  }
  const scq::LatentInstance inst = scq::load_instance(o.instance);
  const double gamma = fed_gamma(o, inst);
  const auto jobs = static_cast<std::int64_t>(2 * seeds.size());
  std::vector<std::vector<scq::CompareRow>> rows(static_cast<std::size_t>(jobs));
  std::vector<std::string> errors(static_cast<std::size_t>(jobs));

  // Each job owns its oracle ledger and generator; rows are sorted after the join.
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t j = 0; j < jobs; ++j) {
    const auto idx = static_cast<std::size_t>(j);
    const bool is_recur = idx % 2 == 0;
    const std::uint64_t seed = seeds[idx / 2];
    try {
      const scq::Oracle oracle(inst);
      scq::QueryLedger ledger;
      scq::RecoveredClustering res;
      if (is_recur) {
        scq::RecurHooks hooks;
        hooks.latent = inst.labels;
        res = scq::recur(inst.points, inst.k, gamma, recur_config(o, seed), oracle, ledger, hooks);
      } else {
        res = scq::scq_kmeans(inst.points, inst.k, gamma, {o.phase1, seed}, oracle, ledger, inst.labels);
      }
      const std::string algo = is_recur ? "recur" : "scq-kmeans";
      for (const auto& r : res.rounds) {
        rows[idx].push_back({algo, seed, r.round, r.queries_cumulative, r.error_so_far});
      }
    } catch (const std::exception& e) {
      errors[idx] = e.what();
    }
  }
  for (const auto& e : errors) {
    if (!e.empty()) {
      std::cerr << "compare: " << e << '\n';
      return kExitContract;
    }
  }
  std::vector<scq::CompareRow> all;
  for (auto& r : rows) all.insert(all.end(), r.begin(), r.end());
  if (!o.csv.empty()) {
    std::ofstream out(o.csv);
    scq::write_compare_csv(out, all);
  } else {
    scq::write_compare_csv(std::cout, all);
  }
  return 0;
}

int cmd_verify(const std::string& path) {
  const scq::LatentInstance inst = scq::load_instance(path);
  if (!inst.metrics) {
    std::cout << "unverifiable\n";
    std::cerr << "warning: instance has no metrics; margins cannot be checked\n";
    return 0;
  }
  const auto margins = inst.margins();
  bool ok = true;
  for (std::size_t c = 0; c < margins.size(); ++c) {
    const bool pass = scq::has_margin(std::span<const double>(&margins[c], 1), inst.gamma);
    ok = ok && pass;
    std::cout << "cluster " << c << ": margin=" << margins[c] << (pass ? " ok" : " VIOLATION") << '\n';
  }
  std::cout << (ok ? "verified" : "margin violation") << " (gamma=" << inst.gamma << ")\n";
  return ok ? 0 : kExitContract;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact cluster recovery with same-cluster queries"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a margin-verified instance");
  gen->require_subcommand(1);
  std::size_t n = 0, d = 0;
  int k = 0;
  double gamma = 0, kappa = 0, p = 0, perturb = 0;
  std::uint64_t gen_seed = 0;
  std::string out;
  std::string generator;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--gamma", gamma, "Margin")->required();
    sub->add_option("--seed", gen_seed, "Seed")->required();
    sub->add_option("--out", out, "Output JSON path")->required();
    sub->callback([&, sub] { generator = sub->get_name(); });
  };
  auto* g_ell = gen->add_subcommand("ellipsoidal", "k ellipsoidal clusters with condition number kappa");
  g_ell->add_option("--n", n)->required();
  g_ell->add_option("--k", k)->required();
  g_ell->add_option("--d", d)->required();
  g_ell->add_option("--kappa", kappa)->required();
  add_common(g_ell);
  auto* g_adv = gen->add_subcommand("adversarial", "Two-cluster instance that defeats scq-kmeans");
  g_adv->add_option("--n", n)->required();
  g_adv->add_option("--p", p)->required();
  g_adv->add_option("--perturb", perturb, "Jitter radius (0: coincident points)");
  add_common(g_adv);
  auto* g_sph = gen->add_subcommand("lb-sphere", "Sphere-packing lower-bound instance");
  g_sph->add_option("--d", d)->required();
  add_common(g_sph);
  auto* g_cube = gen->add_subcommand("lb-hypercube", "Random-hypercube lower-bound instance");
  g_cube->add_option("--d", d)->required();
  g_cube->add_option("--n", n)->required();
  add_common(g_cube);

  // run
  RunOptions run_opts;
  auto* run = app.add_subcommand("run", "Run one algorithm on an instance");
  run->add_option("--algo", run_opts.algo, "Algorithm")->check(CLI::IsMember({"recur", "scq-kmeans"}));
  run->add_option("--instance", run_opts.instance, "Instance JSON")->required();
  run->add_option("--seed", run_opts.seed, "Seed");
  run->add_option("--csv", run_opts.csv, "Per-round CSV output");
  run->add_option("--transcript", run_opts.transcript, "Query transcript CSV output");
  run->add_option("--trace", run_opts.trace, "Tessellation JSON dump (recur only)");
  add_recur_flags(run, run_opts);

  // compare
  RunOptions cmp_opts;
  std::vector<std::string> seeds;
  auto* compare = app.add_subcommand("compare", "Run recur and scq-kmeans over several seeds");
  compare->add_option("--instance", cmp_opts.instance, "Instance JSON")->required();
  compare->add_option("--seeds", seeds, "Comma-separated seeds")->delimiter(',')->required();
  compare->add_option("--csv", cmp_opts.csv, "Long-format CSV output (default: stdout)");
  add_recur_flags(compare, cmp_opts);

  // verify
  std::string verify_path;
  auto* verify = app.add_subcommand("verify", "Recompute and check an instance's margins");
  verify->add_option("--instance", verify_path, "Instance JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (gen->parsed()) return cmd_gen(generator, n, k, d, gamma, kappa, p, perturb, gen_seed, out);
    if (run->parsed()) return cmd_run(run_opts);
    if (compare->parsed()) return cmd_compare(cmp_opts, seeds);
    if (verify->parsed()) return cmd_verify(verify_path);
  } catch (const scq::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const scq::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitContract;
  }
  return kExitUsage;
}
