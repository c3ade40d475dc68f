#include <cstdlib>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "scenver/io.hpp"

using namespace scenver;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNegative = 1;  // the analysis said no
constexpr int kExitUsage = 2;     // bad invocation or IO failure

std::string default_out_dir() {
  const char* env = std::getenv("SCENVER_OUT");
  return env ? env : ".";
}

std::vector<double> parse_eps_grid(const std::string& grid_spec) {
  // "a:b:step" inclusive sweep.
  double a, b, step;
  if (std::sscanf(grid_spec.c_str(), "%lf:%lf:%lf", &a, &b, &step) != 3 || step <= 0.0)
    throw IoError("--eps-grid must be 'a:b:step' with step > 0");
  std::vector<double> grid;
  for (double e = a; e <= b + 1e-12; e += step) grid.push_back(std::min(e, 1.0));
  return grid;
}

std::vector<Summary> load_summaries(const std::vector<std::string>& paths) {
  std::vector<Summary> out;
  for (const auto& p : paths) out.push_back(load_summary_json(p).first);
  return out;
}

void print_witness(const Vec& w) {
  std::cout << "witness: [";
  for (int i = 0; i < w.size(); ++i) std::cout << (i ? ", " : "") << w[i];
  std::cout << "]\n";
}

SyntheticNoiseModel parse_noise(const std::string& spec) {
  // "perfect" | "uniform:p" | "neighbor:p"
  auto colon = spec.find(':');
  std::string kind = spec.substr(0, colon);
  double p = colon == std::string::npos ? 0.0 : std::stod(spec.substr(colon + 1));
  if (kind == "perfect") return SyntheticNoiseModel::perfect();
  if (kind == "uniform") return SyntheticNoiseModel::uniform(p);
  if (kind == "neighbor") return SyntheticNoiseModel::neighbor(p);
  throw IoError("unknown noise '" + spec + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"scenver: scenario-based error-probability analysis for closed-loop systems "
               "with abstracted perception"};
  app.require_subcommand(0, 1);

  std::string out_dir = default_out_dir();
  app.add_option("--out", out_dir, "Output directory for generated files");
  std::string spec_file;
  app.add_option("--spec", spec_file, "Run every query in a scenario spec file");

  // summarize
  auto* cmd_summarize = app.add_subcommand("summarize", "Summarize H steps of a chain as (A, b)");
  std::string chain_path, summary_out = "summary.json";
  int horizon = 1;
  cmd_summarize->add_option("--chain", chain_path, "Explicit-state chain file")->required();
  cmd_summarize->add_option("--horizon", horizon, "Number of steps H")->required();
  cmd_summarize->add_option("--summary-out", summary_out, "Summary JSON output file");

  // forward
  auto* cmd_forward = app.add_subcommand("forward", "Worst-case error probability under a precondition");
  std::string summary_path, pre_path;
  cmd_forward->add_option("--summary", summary_path, "Summary JSON")->required();
  cmd_forward->add_option("--pre", pre_path, "Precondition JSON (omit for top)");

  // backward
  auto* cmd_backward = app.add_subcommand("backward", "Weakest precondition for an error bound");
  double eps = 0.0;
  std::string pred_out = "wp.json";
  cmd_backward->add_option("--summary", summary_path, "Summary JSON")->required();
  cmd_backward->add_option("--eps", eps, "Error bound epsilon")->required();
  cmd_backward->add_option("--pred-out", pred_out, "Predicate JSON output file");

  // check
  auto* cmd_check = app.add_subcommand("check", "Check a Hoare-style assertion {pre}C{post}{eps}");
  std::string post_path;
  cmd_check->add_option("--summary", summary_path, "Summary JSON")->required();
  cmd_check->add_option("--pre", pre_path, "Precondition JSON (omit for top)");
  cmd_check->add_option("--post", post_path, "Postcondition JSON (omit for top)");
  cmd_check->add_option("--eps", eps, "Error bound epsilon")->required();

  // accelerate
  auto* cmd_accel = app.add_subcommand("accelerate", "Certify 1-(1-eps)^k bounds for interleavings");
  std::vector<std::string> summary_paths;
  std::string invariant = "auto";
  long k_max = 16;
  bool have_eps = false;
  cmd_accel->add_option("--summaries", summary_paths, "Summary JSON files")->required();
  cmd_accel->add_option("--invariant", invariant, "Invariant predicate JSON, or 'auto'");
  cmd_accel->add_option("--eps", eps, "Local error bound (required unless --invariant auto)")
      ->each([&](const std::string&) { have_eps = true; });
  cmd_accel->add_option("--k", k_max, "Emit bounds for k = 1..K");

  // invariant
  auto* cmd_inv = app.add_subcommand("invariant", "Grid search for an invariant precondition");
  std::string eps_grid = "0.0:0.99:0.01";
  cmd_inv->add_option("--summaries", summary_paths, "Summary JSON files")->required();
  cmd_inv->add_option("--eps-grid", eps_grid, "Grid as a:b:step");
  cmd_inv->add_option("--pred-out", pred_out, "Predicate JSON output file");

  // interleave
  auto* cmd_inter = app.add_subcommand("interleave", "Brute-force worst case over all interleavings");
  int inter_k = 1;
  cmd_inter->add_option("--summaries", summary_paths, "Summary JSON files")->required();
  cmd_inter->add_option("--pre", pre_path, "Precondition JSON (omit for top)");
  cmd_inter->add_option("--k", inter_k, "Interleaving length")->required();

  // simulate
  auto* cmd_sim = app.add_subcommand("simulate", "Monte Carlo estimate for a scenario sequence");
  std::vector<std::string> chain_paths;
  std::vector<std::string> seq_spec;
  std::vector<double> init_weights;
  long runs = 100000;
  std::uint64_t seed = 0;
  cmd_sim->add_option("--chains", chain_paths, "Explicit chain files, named by stem")->required();
  cmd_sim->add_option("--seq", seq_spec, "Sequence items env:horizon")->required();
  cmd_sim->add_option("--init", init_weights, "Initial distribution over non-error states")
      ->required();
  cmd_sim->add_option("--n", runs, "Number of trajectories");
  cmd_sim->add_option("--seed", seed, "RNG seed");

  // export
  auto* cmd_export = app.add_subcommand("export", "Compose a chain from a contingency CSV and tables");
  std::string contingency, controller_json, dynamics_json, env_id, chain_out = "chain.txt";
  cmd_export->add_option("--contingency", contingency, "Contingency CSV")->required();
  cmd_export->add_option("--controller", controller_json, "Controller table JSON")->required();
  cmd_export->add_option("--dynamics", dynamics_json, "Dynamics table JSON")->required();
  cmd_export->add_option("--env", env_id, "Environment id in the tables")->required();
  cmd_export->add_option("--chain-out", chain_out, "Explicit chain output file");

  // case-gen
  auto* cmd_case = app.add_subcommand("case-gen", "Generate a built-in case-study chain");
  std::string case_name = "f1tenth", segment = "straight", noise_spec = "perfect";
  bool reduced = false;
  cmd_case->add_option("--case", case_name, "f1tenth or taxinet");
  cmd_case->add_option("--segment", segment, "F1Tenth segment: left, right, straight");
  cmd_case->add_option("--noise", noise_spec, "perfect | uniform:p | neighbor:p");
  cmd_case->add_flag("--reduced", reduced, "Use the reduced F1Tenth grid");
  cmd_case->add_option("--chain-out", chain_out, "Explicit chain output file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    fs::create_directories(out_dir);
    auto outfile = [&](const std::string& name) { return (fs::path(out_dir) / name).string(); };
    auto load_pred = [&](const std::string& path) {
      return path.empty() ? AffinePredicate{} : load_predicate_json(path);
    };

    if (!spec_file.empty()) {
      RunOutcome rc = run_spec(spec_file, out_dir);
      std::cout << "report: " << rc.report_path << "\n";
      if (rc.any_query_error) return kExitUsage;
      return rc.any_negative_result ? kExitNegative : kExitOk;
    }

    if (*cmd_summarize) {
      ClosedLoopDtmc m = load_explicit_chain(chain_path);
      Summary c = summarize(m, horizon);
      std::vector<std::string> labels(m.space.labels.begin(), m.space.labels.end() - 1);
      save_summary_json(c, labels, outfile(summary_out));
      std::cout << "summary: " << outfile(summary_out) << "\nmax_b: "
                << (c.size() ? c.b().maxCoeff() : 0.0) << "\n";
      return kExitOk;
    }
    if (*cmd_forward) {
      auto [c, labels] = load_summary_json(summary_path);
      ForwardResult fr = forward_worst_case(c, load_pred(pre_path));
      std::cout << "worst_case_error: " << fr.value << "\n";
      print_witness(fr.witness);
      return kExitOk;
    }
    if (*cmd_backward) {
      auto [c, labels] = load_summary_json(summary_path);
      AffinePredicate wp = backward_weakest_precondition(c, eps);
      save_predicate_json(wp, outfile(pred_out));
      std::cout << "weakest_precondition: " << outfile(pred_out) << "\n";
      return kExitOk;
    }
    if (*cmd_check) {
      auto [c, labels] = load_summary_json(summary_path);
      HoareAssertion a{load_pred(pre_path), c, load_pred(post_path), eps};
      AssertionVerdict v = check_assertion(a);
      if (v.holds) {
        std::cout << "holds" << (v.vacuous ? " (vacuous: precondition infeasible)" : "") << "\n";
        return kExitOk;
      }
      std::cout << "fails: "
                << (v.violated_obligation == Obligation::ErrorBound ? "error bound"
                                                                    : "postcondition")
                << " (LP max " << v.violation_value << ")\n";
      if (v.counterexample) print_witness(*v.counterexample);
      return kExitNegative;
    }
    if (*cmd_accel) {
      std::vector<Summary> cs = load_summaries(summary_paths);
      AffinePredicate phi;
      if (invariant == "auto") {
        auto found = find_invariant(cs, default_eps_grid());
        if (found) {
          phi = found->first;
          eps = found->second;
        } else {
          phi = {};
          eps = trivial_epsilon(cs);
        }
      } else {
        phi = load_predicate_json(invariant);
        if (!have_eps) {
          std::cerr << "--eps is required with an explicit --invariant\n";
          return kExitUsage;
        }
      }
      try {
        AccelerationCertificate cert = accelerate(cs, phi, eps);
        std::cout << "epsilon: " << eps << "\nk,bound\n";
        for (long k = 1; k <= k_max; ++k) std::cout << k << "," << cert.bound(k) << "\n";
        return kExitOk;
      } catch (const PremiseFailed& e) {
        std::cout << "premise failed for summary " << e.index << "\n";
        if (e.verdict.counterexample) print_witness(*e.verdict.counterexample);
        return kExitNegative;
      }
    }
    if (*cmd_inv) {
      std::vector<Summary> cs = load_summaries(summary_paths);
      auto found = find_invariant(cs, parse_eps_grid(eps_grid));
      if (!found) {
        std::cout << "no invariant found on the grid\n";
        return kExitNegative;
      }
      save_predicate_json(found->first, outfile(pred_out));
      std::cout << "epsilon: " << found->second << "\ninvariant: " << outfile(pred_out) << "\n";
      return kExitOk;
    }
    if (*cmd_inter) {
      std::vector<Summary> cs = load_summaries(summary_paths);
      InterleavingResult ir = worst_case_interleaving(cs, load_pred(pre_path), inter_k);
      std::cout << "worst_case_error: " << ir.value << "\nsequence:";
      for (int i : ir.sequence) std::cout << " " << i;
      std::cout << "\n";
      print_witness(ir.witness);
      return kExitOk;
    }
    if (*cmd_sim) {
      ChainMap chains;
      for (const auto& p : chain_paths) chains.emplace(fs::path(p).stem().string(),
                                                      load_explicit_chain(p));
      ScenarioSequence seq;
      for (const auto& item : seq_spec) {
        auto colon = item.rfind(':');
        if (colon == std::string::npos) throw IoError("--seq items must be env:horizon");
        seq.items.push_back({item.substr(0, colon), std::stoi(item.substr(colon + 1))});
      }
      Vec iv = Eigen::Map<Vec>(init_weights.data(), static_cast<int>(init_weights.size()));
      SimReport r = estimate_error_probability(seq, chains, Distribution::checked(std::move(iv)),
                                               runs, seed);
      std::cout << "estimate: " << r.estimate << " +/- " << r.std_error << " (n=" << r.runs
                << ", seed=" << r.seed << ")\n";
      return kExitOk;
    }
    if (*cmd_export) {
      ContingencyMatrix cm = load_contingency_csv(contingency);
      PerceptionAbstraction alpha = normalize_counts(cm);
      ControllerTable g = load_controller_json(controller_json);
      DynamicsTable f = load_dynamics_json(dynamics_json);
      StateSpace space = StateSpace::with_error(cm.states);
      ClosedLoopDtmc m = compose_closed_loop(space, cm.estimates, alpha, g, f, env_id);
      export_explicit_chain(m, outfile(chain_out));
      std::cout << "chain: " << outfile(chain_out) << "\n";
      return kExitOk;
    }
    if (*cmd_case) {
      ClosedLoopDtmc m = [&]() {
        SyntheticNoiseModel noise = parse_noise(noise_spec);
        if (case_name == "f1tenth") {
          auto seg = segment_from_name(segment);
          if (!seg) throw IoError("unknown segment '" + segment + "'");
          F1TenthConfig cfg = reduced ? F1TenthConfig::reduced() : F1TenthConfig::defaults();
          return build_f1tenth_chain(F1TenthModel(cfg), *seg, noise);
        }
        if (case_name == "taxinet") {
          PerceptionAbstraction alpha = synthetic_abstraction(15, noise, taxinet_neighbors);
          return build_taxinet_chains({{std::string("env"), alpha}}).at("env");
        }
        throw IoError("unknown case '" + case_name + "'");
      }();
      export_explicit_chain(m, outfile(chain_out));
      std::cout << "chain: " << outfile(chain_out) << " (" << m.num_states() << " states)\n";
      return kExitOk;
    }

    std::cerr << app.help();
    return kExitUsage;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}
