#include "scenver/io.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace scenver {

namespace {

std::string shortest_decimal(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, ',')) fields.push_back(cur);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  return out;
}

json read_json_file(const std::string& path) {
  auto in = open_input(path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw IoError("invalid JSON in '" + path + "': " + e.what());
  }
  return j;
}

void write_json_file(const json& j, const std::string& path) {
  auto out = open_output(path);
  out << j.dump(2) << "\n";
}

}  // namespace

// --- contingency matrices ---------------------------------------------------

ContingencyMatrix parse_contingency_csv(std::istream& in, const std::string& origin) {
  std::string line;
  int lineno = 0;
  if (!std::getline(in, line)) throw ParseError(origin, 1, "empty file");
  ++lineno;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header = split_csv_line(line);
  if (header.size() < 2 || header[0] != "state")
    throw ParseError(origin, lineno, "header must be 'state,<y_0>,...'");
  ContingencyMatrix cm;
  cm.estimates.assign(header.begin() + 1, header.end());
  for (size_t i = 0; i < cm.estimates.size(); ++i) {
    if (cm.estimates[i].empty()) throw ParseError(origin, lineno, "empty estimate label");
    for (size_t j = i + 1; j < cm.estimates.size(); ++j)
      if (cm.estimates[i] == cm.estimates[j])
        throw DuplicateLabel(origin + ": duplicate estimate label '" + cm.estimates[i] + "'");
  }
  std::vector<std::vector<long>> rows;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw ParseError(origin, lineno, "expected " + std::to_string(header.size()) + " fields");
    if (fields[0].empty()) throw ParseError(origin, lineno, "empty state label");
    for (const auto& seen : cm.states)
      if (seen == fields[0])
        throw DuplicateLabel(origin + ": duplicate state label '" + fields[0] + "'");
    cm.states.push_back(fields[0]);
    std::vector<long> counts;
    for (size_t i = 1; i < fields.size(); ++i) {
      long value = 0;
      auto res = std::from_chars(fields[i].data(), fields[i].data() + fields[i].size(), value);
      if (res.ec != std::errc() || res.ptr != fields[i].data() + fields[i].size())
        throw ParseError(origin, lineno, "invalid count '" + fields[i] + "'");
      if (value < 0)
        throw NegativeCount(origin + ":" + std::to_string(lineno) + ": negative count " +
                            fields[i]);
      counts.push_back(value);
    }
    rows.push_back(std::move(counts));
  }
  if (rows.empty()) throw ParseError(origin, lineno, "no data rows");
  cm.counts.resize(rows.size(), cm.estimates.size());
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < cm.estimates.size(); ++j) cm.counts(i, j) = rows[i][j];
  cm.validate();
  return cm;
}

ContingencyMatrix load_contingency_csv(const std::string& path) {
  auto in = open_input(path);
  return parse_contingency_csv(in, path);
}

// --- explicit-state chains --------------------------------------------------

void export_explicit_chain(const ClosedLoopDtmc& m, const std::string& path) {
  auto out = open_output(path);
  out << "STATES " << m.num_states() << "\n";
  for (int i = 0; i < m.num_states(); ++i)
    for (SpMat::InnerIterator it(m.transitions, i); it; ++it)
      if (it.value() != 0.0)
        out << i << " " << it.col() << " " << shortest_decimal(it.value()) << "\n";
  auto labels = open_output(path + ".labels");
  for (const auto& l : m.space.labels) labels << l << "\n";
}

ClosedLoopDtmc load_explicit_chain(const std::string& path) {
  auto in = open_input(path);
  std::string word;
  int n = 0;
  if (!(in >> word >> n) || word != "STATES" || n < 2)
    throw ParseError(path, 1, "expected 'STATES n' header");
  std::vector<Eigen::Triplet<double>> triplets;
  int src, dst;
  std::string prob;
  while (in >> src >> dst >> prob) {
    if (src < 0 || src >= n || dst < 0 || dst >= n)
      throw IoError(path + ": transition endpoint out of range");
    double value = 0.0;
    auto res = std::from_chars(prob.data(), prob.data() + prob.size(), value);
    if (res.ec != std::errc() || res.ptr != prob.data() + prob.size())
      throw IoError(path + ": invalid probability '" + prob + "'");
    triplets.emplace_back(src, dst, value);
  }
  auto labels_in = open_input(path + ".labels");
  std::vector<std::string> labels;
  std::string line;
  while (std::getline(labels_in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) labels.push_back(line);
  }
  if (static_cast<int>(labels.size()) != n)
    throw IoError(path + ".labels: expected " + std::to_string(n) + " labels");
  SpMat transitions(n, n);
  transitions.setFromTriplets(triplets.begin(), triplets.end());
  StateSpace space{std::move(labels)};
  space.validate();
  return ClosedLoopDtmc{std::move(space), std::move(transitions)};
}

// --- JSON artifacts ---------------------------------------------------------

json summary_to_json(const Summary& c, const std::vector<std::string>& labels) {
  const int n = c.size();
  if (static_cast<int>(labels.size()) != n)
    throw DimensionMismatch("summary labels do not match dimension");
  std::vector<double> a_flat;
  a_flat.reserve(static_cast<size_t>(n) * n);
  Mat dense = c.a_dense();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a_flat.push_back(dense(i, j));
  std::vector<double> b(c.b().data(), c.b().data() + n);
  return json{{"format_version", 1}, {"states", labels}, {"a", a_flat}, {"b", b}};
}

std::pair<Summary, std::vector<std::string>> summary_from_json(const json& j) {
  std::vector<std::string> labels = j.at("states").get<std::vector<std::string>>();
  const int n = static_cast<int>(labels.size());
  std::vector<double> a_flat = j.at("a").get<std::vector<double>>();
  std::vector<double> b_vals = j.at("b").get<std::vector<double>>();
  if (static_cast<int>(a_flat.size()) != n * n || static_cast<int>(b_vals.size()) != n)
    throw IoError("summary JSON has inconsistent dimensions");
  std::vector<Eigen::Triplet<double>> triplets;
  for (int i = 0; i < n; ++i)
    for (int jx = 0; jx < n; ++jx)
      if (a_flat[static_cast<size_t>(i) * n + jx] != 0.0)
        triplets.emplace_back(i, jx, a_flat[static_cast<size_t>(i) * n + jx]);
  SpMat a(n, n);
  a.setFromTriplets(triplets.begin(), triplets.end());
  Vec b = Eigen::Map<Vec>(b_vals.data(), n);
  return {Summary(std::move(a), std::move(b)), std::move(labels)};
}

void save_summary_json(const Summary& c, const std::vector<std::string>& labels,
                       const std::string& path) {
  write_json_file(summary_to_json(c, labels), path);
}

std::pair<Summary, std::vector<std::string>> load_summary_json(const std::string& path) {
  return summary_from_json(read_json_file(path));
}

json predicate_to_json(const AffinePredicate& pred) {
  json constraints = json::array();
  for (const auto& c : pred.constraints) {
    std::vector<double> a(c.a.data(), c.a.data() + c.a.size());
    constraints.push_back(json{{"a", a}, {"theta", c.theta}});
  }
  return json{{"format_version", 1}, {"constraints", constraints}};
}

AffinePredicate predicate_from_json(const json& j) {
  AffinePredicate pred;
  for (const auto& c : j.at("constraints")) {
    std::vector<double> a = c.at("a").get<std::vector<double>>();
    Vec av = Eigen::Map<Vec>(a.data(), static_cast<int>(a.size()));
    pred.constraints.push_back({std::move(av), c.at("theta").get<double>()});
  }
  return pred;
}

void save_predicate_json(const AffinePredicate& pred, const std::string& path) {
  write_json_file(predicate_to_json(pred), path);
}

AffinePredicate load_predicate_json(const std::string& path) {
  return predicate_from_json(read_json_file(path));
}

ControllerTable load_controller_json(const std::string& path) {
  json j = read_json_file(path);
  ControllerTable table;
  for (const auto& [env, mapping] : j.at("envs").items())
    for (const auto& [estimate, control] : mapping.items())
      table.entries[env][estimate] = control.get<std::string>();
  return table;
}

DynamicsTable load_dynamics_json(const std::string& path) {
  json j = read_json_file(path);
  DynamicsTable table;
  for (const auto& [env, mapping] : j.at("envs").items()) {
    for (const auto& [key, succ] : mapping.items()) {
      auto sep = key.rfind('|');
      if (sep == std::string::npos)
        throw IoError(path + ": dynamics key '" + key + "' is not 'state|control'");
      table.entries[env][{key.substr(0, sep), key.substr(sep + 1)}] = succ.get<std::string>();
    }
  }
  return table;
}

json certificate_to_json(const AccelerationCertificate& cert, long k_max) {
  json bounds = json::array();
  for (long k = 1; k <= k_max; ++k) bounds.push_back(json{{"k", k}, {"bound", cert.bound(k)}});
  return json{{"format_version", 1},
              {"invariant", predicate_to_json(cert.invariant)},
              {"epsilon", cert.epsilon},
              {"m", cert.summaries.size()},
              {"premise_checked", cert.premise_checked},
              {"bound_formula", "1-(1-epsilon)^k"},
              {"bounds", bounds}};
}

json sim_report_to_json(const SimReport& report) {
  return json{{"format_version", 1}, {"runs", report.runs},
              {"error_hits", report.error_hits}, {"estimate", report.estimate},
              {"std_error", report.std_error},   {"seed", report.seed}};
}

// --- spec runner ------------------------------------------------------------

namespace {

std::string resolve(const fs::path& base, const std::string& path) {
  fs::path p(path);
  return p.is_absolute() ? p.string() : (base / p).string();
}

SyntheticNoiseModel noise_from_json(const json& j) {
  std::string kind = j.at("kind").get<std::string>();
  double p = j.value("p", 0.0);
  if (kind == "perfect") return SyntheticNoiseModel::perfect();
  if (kind == "uniform") return SyntheticNoiseModel::uniform(p);
  if (kind == "neighbor") return SyntheticNoiseModel::neighbor(p);
  throw IoError("unknown noise kind '" + kind + "'");
}

F1TenthConfig f1tenth_config_from_json(const json& j) {
  F1TenthConfig cfg = j.value("reduced", false) ? F1TenthConfig::reduced()
                                                : F1TenthConfig::defaults();
  if (j.contains("side_range")) cfg.side_range = j.at("side_range").get<int>();
  if (j.contains("front_range")) cfg.front_range = j.at("front_range").get<int>();
  if (j.contains("horizon")) cfg.horizon = j.at("horizon").get<int>();
  if (j.contains("start_front")) cfg.start_front = j.at("start_front").get<int>();
  if (j.contains("track_half_width")) cfg.track_half_width = j.at("track_half_width").get<int>();
  if (j.contains("exit_band")) cfg.exit_band = j.at("exit_band").get<int>();
  if (j.contains("regions"))
    for (const auto& [key, cells] : j.at("regions").items())
      for (const auto& cell : cells)
        cfg.region_overrides[key].push_back({cell.at(0).get<int>(), cell.at(1).get<int>()});
  return cfg;
}

ClosedLoopDtmc build_environment(const json& env, const fs::path& base) {
  if (env.contains("contingency")) {
    ContingencyMatrix cm = load_contingency_csv(resolve(base, env.at("contingency")));
    PerceptionAbstraction alpha = normalize_counts(cm);
    ControllerTable g = load_controller_json(resolve(base, env.at("controller")));
    DynamicsTable f = load_dynamics_json(resolve(base, env.at("dynamics")));
    StateSpace space = StateSpace::with_error(cm.states);
    return compose_closed_loop(space, cm.estimates, alpha, g, f, env.at("id"));
  }
  if (env.contains("case")) {
    std::string which = env.at("case").get<std::string>();
    SyntheticNoiseModel noise =
        env.contains("noise") ? noise_from_json(env.at("noise")) : SyntheticNoiseModel::perfect();
    if (which == "f1tenth") {
      F1TenthConfig cfg = env.contains("config") ? f1tenth_config_from_json(env.at("config"))
                                                 : F1TenthConfig::defaults();
      auto segment = segment_from_name(env.at("segment").get<std::string>());
      if (!segment) throw IoError("unknown F1Tenth segment");
      return build_f1tenth_chain(F1TenthModel(cfg), *segment, noise);
    }
    if (which == "taxinet") {
      PerceptionAbstraction alpha = synthetic_abstraction(15, noise, taxinet_neighbors);
      std::string id = env.at("id").get<std::string>();
      return build_taxinet_chains({{id, alpha}}).at(id);
    }
    throw IoError("unknown case '" + which + "'");
  }
  throw IoError("environment needs either 'contingency' or 'case'");
}

void write_csv(const std::string& path, const std::string& header,
               const std::vector<std::vector<double>>& rows) {
  auto out = open_output(path);
  out << header << "\n";
  for (const auto& row : rows) {
    for (size_t i = 0; i < row.size(); ++i)
      out << (i ? "," : "") << shortest_decimal(row[i]);
    out << "\n";
  }
}

std::vector<double> to_std(const Vec& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

}  // namespace

RunOutcome run_spec(const std::string& spec_path, const std::string& out_dir) {
  json spec = read_json_file(spec_path);
  fs::path base = fs::path(spec_path).parent_path();
  fs::create_directories(out_dir);
  fs::path out(out_dir);

  RunOutcome outcome;
  json report;
  report["format_version"] = 1;
  report["spec"] = spec_path;

  ChainMap chains;
  std::vector<std::string> env_errors;
  for (const auto& env : spec.at("environments")) {
    std::string id = env.at("id").get<std::string>();
    try {
      chains.emplace(id, build_environment(env, base));
    } catch (const std::exception& e) {
      env_errors.push_back(id + ": " + e.what());
    }
  }
  report["environment_errors"] = env_errors;
  if (!env_errors.empty()) outcome.any_query_error = true;

  ScenarioSequence seq;
  for (const auto& item : spec.value("sequence", json::array()))
    seq.items.push_back({item.at("env").get<std::string>(), item.at("horizon").get<int>()});

  std::map<std::string, AffinePredicate> preconditions;
  for (const auto& [name, p] : spec.value("preconditions", json::object()).items())
    preconditions[name] = predicate_from_json(p);

  auto pred_by_name = [&](const json& q, const char* key) -> AffinePredicate {
    if (!q.contains(key)) return {};
    return preconditions.at(q.at(key).get<std::string>());
  };
  auto labels_of_sequence = [&]() -> std::vector<std::string> {
    const StateSpace& space = chains.at(seq.items.front().env).space;
    return {space.labels.begin(), space.labels.end() - 1};
  };
  auto scenario_summaries = [&]() {
    std::vector<Summary> out_summaries;
    for (const auto& item : seq.items)
      out_summaries.push_back(summarize(chains.at(item.env), item.horizon));
    return out_summaries;
  };

  json results = json::array();
  int qi = 0;
  for (const auto& q : spec.value("queries", json::array())) {
    std::string type = q.at("type").get<std::string>();
    std::string tag = "q" + std::to_string(qi) + "_" + type;
    json r{{"query", qi}, {"type", type}};
    try {
      if (type == "summarize") {
        Summary c = summarize_sequence(seq, chains);
        std::string file = q.value("out", tag + ".json");
        save_summary_json(c, labels_of_sequence(), (out / file).string());
        r["out"] = file;
        r["max_b"] = c.size() ? c.b().maxCoeff() : 0.0;
      } else if (type == "forward") {
        Summary c = summarize_sequence(seq, chains);
        ForwardResult fr = forward_worst_case(c, pred_by_name(q, "pre"));
        r["value"] = fr.value;
        r["witness"] = to_std(fr.witness);
        write_csv((out / (tag + ".csv")).string(), "worst_case_error", {{fr.value}});
      } else if (type == "backward") {
        Summary c = summarize_sequence(seq, chains);
        AffinePredicate wp = backward_weakest_precondition(c, q.at("eps").get<double>());
        std::string file = q.value("out", tag + ".json");
        save_predicate_json(wp, (out / file).string());
        r["out"] = file;
      } else if (type == "check") {
        Summary c = summarize_sequence(seq, chains);
        HoareAssertion a{pred_by_name(q, "pre"), c, pred_by_name(q, "post"),
                         q.at("eps").get<double>()};
        AssertionVerdict v = check_assertion(a);
        r["holds"] = v.holds;
        r["vacuous"] = v.vacuous;
        if (!v.holds) {
          outcome.any_negative_result = true;
          r["violated_obligation"] =
              v.violated_obligation == Obligation::ErrorBound ? "error_bound" : "postcondition";
          r["violation_value"] = v.violation_value;
          if (v.counterexample) r["counterexample"] = to_std(*v.counterexample);
        }
      } else if (type == "accelerate") {
        std::vector<Summary> cs = scenario_summaries();
        long k_max = q.value("k_max", 16L);
        AffinePredicate phi;
        double eps;
        if (q.value("invariant", json("auto")) == json("auto")) {
          std::vector<double> grid = default_eps_grid();
          if (q.contains("eps_grid")) grid = q.at("eps_grid").get<std::vector<double>>();
          auto found = find_invariant(cs, grid);
          if (!found) {
            phi = {};
            eps = trivial_epsilon(cs);
          } else {
            phi = found->first;
            eps = found->second;
          }
        } else {
          phi = preconditions.at(q.at("invariant").get<std::string>());
          eps = q.at("eps").get<double>();
        }
        AccelerationCertificate cert = accelerate(cs, phi, eps);
        json cj = certificate_to_json(cert, k_max);
        write_json_file(cj, (out / (tag + ".json")).string());
        std::vector<std::vector<double>> rows;
        for (long k = 1; k <= k_max; ++k)
          rows.push_back({static_cast<double>(k), cert.bound(k)});
        write_csv((out / (tag + ".csv")).string(), "k,bound", rows);
        r["epsilon"] = eps;
        r["out"] = tag + ".json";
      } else if (type == "invariant") {
        std::vector<Summary> cs = scenario_summaries();
        std::vector<double> grid = q.contains("eps_grid")
                                       ? q.at("eps_grid").get<std::vector<double>>()
                                       : default_eps_grid();
        auto found = find_invariant(cs, grid);
        if (found) {
          r["epsilon"] = found->second;
          std::string file = q.value("out", tag + ".json");
          save_predicate_json(found->first, (out / file).string());
          r["out"] = file;
        } else {
          r["epsilon"] = nullptr;
          outcome.any_negative_result = true;
        }
      } else if (type == "interleave") {
        std::vector<Summary> cs = scenario_summaries();
        InterleavingResult ir =
            worst_case_interleaving(cs, pred_by_name(q, "pre"), q.at("k").get<int>());
        r["value"] = ir.value;
        r["sequence"] = ir.sequence;
        write_csv((out / (tag + ".csv")).string(), "worst_case_error", {{ir.value}});
      } else if (type == "simulate") {
        std::vector<double> init = q.at("init").get<std::vector<double>>();
        Vec iv = Eigen::Map<Vec>(init.data(), static_cast<int>(init.size()));
        SimReport sr = estimate_error_probability(
            seq, chains, Distribution::checked(std::move(iv)), q.value("n", 100000L),
            q.value("seed", 0ULL));
        r["report"] = sim_report_to_json(sr);
        write_csv((out / (tag + ".csv")).string(), "estimate,std_error",
                  {{sr.estimate, sr.std_error}});
      } else if (type == "export") {
        const ClosedLoopDtmc& m = chains.at(q.at("env").get<std::string>());
        std::string file = q.value("out", tag + ".txt");
        export_explicit_chain(m, (out / file).string());
        r["out"] = file;
      } else {
        throw IoError("unknown query type '" + type + "'");
      }
    } catch (const PremiseFailed& e) {
      outcome.any_negative_result = true;
      r["error"] = e.what();
      if (e.verdict.counterexample) r["counterexample"] = to_std(*e.verdict.counterexample);
    } catch (const std::exception& e) {
      outcome.any_query_error = true;
      r["error"] = e.what();
    }
    results.push_back(std::move(r));
    ++qi;
  }
  report["results"] = std::move(results);
  outcome.report_path = (out / "report.json").string();
  write_json_file(report, outcome.report_path);
  return outcome;
}

}  // namespace scenver
