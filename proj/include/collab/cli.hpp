#pragma once

// Command-line front end. Exit codes: 0 ok, 1 domain verdict (infeasible
// contract, oracle mismatch), 2 config / input error, 3 numerical failure.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "collab/acquisition_game.hpp"
#include "collab/contract_design.hpp"
#include "collab/errors.hpp"
#include "collab/sim_harness.hpp"
#include "collab/verify.hpp"

namespace collab::cli {

using json = nlohmann::ordered_json;

enum ExitCode { kOk = 0, kVerdict = 1, kConfig = 2, kNumerical = 3 };

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

struct SolverSettings {
  std::size_t grid = 1001;
  std::uint64_t seed = 1;
  int slots = 20;
  std::optional<double> reward;
  double kkt_tolerance = 1e-8;
};

struct RunConfig {
  std::optional<AcquisitionScenario> acquisition;
  std::optional<UserTypeProfile> contract;
  SolverSettings solver;
};

inline json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

template <typename T>
T field(const json& j, const char* key, const char* where) {
  if (!j.contains(key)) throw ConfigError(std::string(where) + ": missing \"" + key + "\"");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string(where) + "." + key + ": " + e.what());
  }
}

// Scalar broadcast to `n` entries, an array of length n, or (when allowed) absent.
inline std::vector<double> vector_field(const json& j, const char* key, std::size_t n, const char* where,
                                        std::optional<double> absent = std::nullopt) {
  if (!j.contains(key) || j.at(key).is_null()) {
    if (absent) return std::vector<double>(n, *absent);
    throw ConfigError(std::string(where) + ": missing \"" + key + "\"");
  }
  const auto& v = j.at(key);
  if (v.is_number()) return std::vector<double>(n, v.get<double>());
  if (!v.is_array()) throw ConfigError(std::string(where) + "." + key + ": expected a number or an array");
  std::vector<double> out;
  for (const auto& x : v) {
    if (x.is_null()) {
      if (!absent) throw ConfigError(std::string(where) + "." + key + ": null entry");
      out.push_back(*absent);
    } else if (x.is_number()) {
      out.push_back(x.get<double>());
    } else {
      throw ConfigError(std::string(where) + "." + key + ": entries must be numbers");
    }
  }
  if (out.size() != n) {
    throw ConfigError(std::string(where) + "." + key + ": expected " + std::to_string(n) + " entries, got " +
                      std::to_string(out.size()));
  }
  return out;
}

inline std::vector<double> read_cost_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open cost file " + path);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) {
    for (char& c : tok) {
      if (c == ',' || c == '[' || c == ']') c = ' ';
    }
    std::istringstream ss(tok);
    double v;
    while (ss >> v) out.push_back(v);
  }
  return out;
}

inline CostModel parse_cost_model(const json& cm) {
  const auto kind = field<std::string>(cm, "kind", "cost_model");
  const json params = cm.value("params", json::object());
  if (kind == "uniform") return CostModel::uniform(field<double>(params, "b", "cost_model.params"));
  if (kind == "gaussian") {
    return CostModel::gaussian(field<double>(params, "mean", "cost_model.params"),
                               field<double>(params, "stddev", "cost_model.params"));
  }
  if (kind == "empirical") return CostModel::empirical(field<std::vector<double>>(params, "samples", "cost_model.params"));
  throw ConfigError("cost_model.kind: unknown kind \"" + kind + "\" (uniform | gaussian | empirical | known)");
}

inline AcquisitionScenario parse_acquisition(const json& a, const std::string& base_dir) {
  AcquisitionScenario s;
  s.users = field<int>(a, "N", "acquisition");
  s.required = field<int>(a, "n0", "acquisition");
  s.revenue = field<double>(a, "V", "acquisition");
  const auto model = a.value("model", std::string("A"));
  if (model == "A") s.model = PayoffModel::A;
  else if (model == "B") s.model = PayoffModel::B;
  else throw ConfigError("acquisition.model: expected \"A\" or \"B\"");
  const auto info = field<std::string>(a, "info", "acquisition");
  const json cm = field<json>(a, "cost_model", "acquisition");
  if (info == "complete") {
    if (cm.value("kind", std::string()) != "known") {
      throw ConfigError("acquisition: complete information needs cost_model.kind = \"known\"");
    }
    const json params = cm.value("params", json::object());
    std::vector<double> costs;
    if (params.contains("costs")) {
      costs = field<std::vector<double>>(params, "costs", "cost_model.params");
    } else {
      auto path = field<std::string>(params, "file", "cost_model.params");
      if (!path.empty() && path.front() != '/') path = base_dir + path;
      costs = read_cost_file(path);
    }
    s.info = CompleteInfo{KnownCosts(std::move(costs))};
  } else if (info == "symmetric") {
    s.info = SymmetricInfo{parse_cost_model(cm)};
  } else if (info == "asymmetric") {
    s.info = AsymmetricInfo{parse_cost_model(cm)};
  } else {
    throw ConfigError("acquisition.info: expected complete | symmetric | asymmetric");
  }
  s.validate();
  return s;
}

inline UserTypeProfile parse_contract(const json& c) {
  const auto k = field<std::vector<double>>(c, "K", "contract");
  const std::size_t n = k.size();
  if (c.contains("I") && c.at("I").get<std::size_t>() != n) throw ConfigError("contract.I disagrees with the length of K");
  const auto theta = vector_field(c, "theta", n, "contract");
  const auto cap = vector_field(c, "t_bar", n, "contract", std::numeric_limits<double>::infinity());
  const json pop = field<json>(c, "population", "contract");
  if (pop.contains("counts")) {
    return UserTypeProfile(k, cap, theta, KnownTypeCounts{field<std::vector<int>>(pop, "counts", "contract.population")});
  }
  const int users = field<int>(pop, "N", "contract.population");
  const auto q = vector_field(pop, "q", n, "contract.population");
  return UserTypeProfile(k, cap, theta, TypeDistribution{users, q});
}

inline RunConfig parse_config(const json& j, const std::string& base_dir = "") {
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  RunConfig cfg;
  const bool has_acq = j.contains("acquisition");
  const bool has_con = j.contains("contract");
  if (has_acq == has_con) throw ConfigError("config: exactly one of \"acquisition\" or \"contract\" is required");
  if (has_acq) cfg.acquisition = parse_acquisition(j.at("acquisition"), base_dir);
  if (has_con) cfg.contract = parse_contract(j.at("contract"));
  if (j.contains("solver")) {
    const auto& s = j.at("solver");
    cfg.solver.grid = s.value("grid", cfg.solver.grid);
    cfg.solver.seed = s.value("seed", cfg.solver.seed);
    cfg.solver.slots = s.value("slots", cfg.solver.slots);
    if (s.contains("reward")) cfg.solver.reward = s.at("reward").get<double>();
    cfg.solver.kkt_tolerance = s.value("kkt_tolerance", cfg.solver.kkt_tolerance);
  }
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  const auto slash = path.find_last_of('/');
  return parse_config(load_json(path), slash == std::string::npos ? "" : path.substr(0, slash + 1));
}

// ---------------------------------------------------------------------------
// Output
// ---------------------------------------------------------------------------

inline std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

// JSON numbers keep 12 significant digits too; non-finite values become null.
inline json jnum(double v) {
  if (!std::isfinite(v)) return nullptr;
  return json::parse(num(v));
}

inline json jvec(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(jnum(x));
  return a;
}

struct Range {
  double start = 0.0;
  double stop = 0.0;
  int count = 0;

  double at(int k) const {
    if (count == 1) return start;
    if (k + 1 == count) return stop;
    return start + (stop - start) * k / (count - 1);
  }
};

inline Range parse_range(const std::string& text) {
  Range r;
  char tail = 0;
  if (std::sscanf(text.c_str(), "%lf:%lf:%d%c", &r.start, &r.stop, &r.count, &tail) != 3) {
    throw ConfigError("--range: expected start:stop:count, got \"" + text + "\"");
  }
  if (r.count < 1) throw ConfigError("--range: count must be >= 1");
  return r;
}

// ---------------------------------------------------------------------------
// Acquisition commands
// ---------------------------------------------------------------------------

inline json stage2_json(const StageTwoOutcome& s) {
  return std::visit(
      [](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, PureProfile>) {
          json ids = json::array();
          for (auto i : v.collaborators) ids.push_back(i);
          return {{"type", "pure"}, {"collaborators", ids}, {"count", v.collaborators.size()}};
        } else if constexpr (std::is_same_v<T, MixedProfile>) {
          return {{"type", "mixed"}, {"probability", jnum(v.probability)}};
        } else {
          return {{"type", "threshold"}, {"gamma", jnum(v.gamma)}};
        }
      },
      s);
}

inline AcquisitionEquilibrium solve_acquisition(const AcquisitionScenario& s, std::size_t grid) {
  if (s.is_complete()) return solve_complete(s);
  if (s.is_symmetric()) return solve_symmetric_pure(s);
  return optimize_reward_asymmetric(s, RewardGrid(grid));
}

inline json equilibrium_json(const AcquisitionScenario& s, const AcquisitionEquilibrium& eq) {
  json out;
  out["R_star"] = jnum(eq.reward);
  out["stage2"] = stage2_json(eq.stage2);
  out["success_prob"] = jnum(eq.success_prob);
  out["expected_profit"] = jnum(eq.master_profit);
  out["expected_collaborators"] = jnum(eq.expected_collaborators);
  if (s.is_complete()) out["user_payoffs"] = jvec(eq.user_payoffs);
  out["model"] = to_string(s.model);
  json d = json::array();
  for (const auto& x : eq.diagnostics) d.push_back(x);
  out["diagnostics"] = d;
  return out;
}

inline std::string acq_sweep_csv(AcquisitionScenario base, const std::string& param, const Range& range, std::size_t grid) {
  std::ostringstream out;
  out << "param,R_star,gamma_star,success_prob,expected_profit\n";
  for (int k = 0; k < range.count; ++k) {
    const double x = range.at(k);
    AcquisitionScenario s = base;
    if (param == "R") {
      if (!s.is_asymmetric()) throw ConfigError("--param R needs an asymmetric scenario");
      s.validate();
      const auto g = solve_asymmetric_threshold(s, x);
      const double f = asymmetric_expected_profit(s, x);
      out << num(x) << ',' << num(x) << ',' << (g ? num(*g) : "") << ','
          << num(asymmetric_success_probability(s, x)) << ',' << num(f) << '\n';
      continue;
    }
    if (param == "delta") {
      const auto* gcm = std::get_if<GaussianCost>(&s.cost_model().kind());
      if (gcm == nullptr) throw ConfigError("--param delta needs a gaussian cost model");
      const auto cm = CostModel::gaussian(gcm->mean, x);
      if (s.is_symmetric()) s.info = SymmetricInfo{cm};
      else s.info = AsymmetricInfo{cm};
    } else if (param == "N") {
      s.users = static_cast<int>(std::lround(x));
    } else if (param == "n0") {
      s.required = static_cast<int>(std::lround(x));
    } else if (param == "V") {
      s.revenue = x;
    } else {
      throw ConfigError("--param: unknown acquisition parameter \"" + param + "\" (R | delta | N | n0 | V)");
    }
    const auto eq = solve_acquisition(s, grid);
    std::string gamma;
    if (const auto* t = std::get_if<ThresholdProfile>(&eq.stage2)) gamma = num(t->gamma);
    out << num(x) << ',' << num(eq.reward) << ',' << gamma << ',' << num(eq.success_prob) << ','
        << num(eq.master_profit) << '\n';
  }
  return out.str();
}

inline std::string acq_simulate_csv(const AcquisitionScenario& s, double reward, int slots, std::uint64_t seed) {
  const auto run = simulate_acquisition(s, reward, slots, seed);
  std::ostringstream out;
  out << "slot,n_collaborators,success,realized_profit\n";
  for (const auto& r : run.records) {
    out << r.slot << ',' << r.collaborators << ',' << (r.success ? 1 : 0) << ',' << num(r.realized_profit) << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Contract commands
// ---------------------------------------------------------------------------

inline ContractSolution solve_contract(const UserTypeProfile& p, double kkt_tolerance) {
  if (!p.is_probabilistic()) return solve_complete(p);
  IncompleteSolverOptions opt;
  opt.kkt_tolerance = kkt_tolerance;
  return solve_incomplete(p, opt);
}

inline json contract_json(const UserTypeProfile& p, const ContractSolution& sol) {
  json out;
  json items = json::array();
  for (const auto& it : sol.contract.items) items.push_back({{"reward", jnum(it.reward)}, {"task", jnum(it.task)}});
  out["information"] = p.is_probabilistic() ? "incomplete" : "complete";
  out["items"] = items;
  json inv = json::array();
  for (auto i : sol.involved) inv.push_back(i + 1);
  out["involved"] = inv;
  out["payoffs"] = jvec(sol.payoffs);
  out["expected_profit"] = jnum(sol.expected_profit);
  if (p.is_probabilistic()) {
    json k;
    json th = json::array();
    for (auto i : sol.kkt.threshold_involved) th.push_back(i + 1);
    k["threshold_involved"] = th;
    k["order_multipliers"] = jvec(sol.kkt.order_multipliers);
    k["capacity_multipliers"] = jvec(sol.kkt.capacity_multipliers);
    k["gradient"] = jvec(sol.kkt.gradient);
    json pools = json::array();
    for (const auto& pool : sol.kkt.pools) {
      json m = json::array();
      for (auto i : pool) m.push_back(i + 1);
      pools.push_back(m);
    }
    k["pools"] = pools;
    k["max_residual"] = jnum(sol.kkt.max_residual);
    k["tolerance"] = jnum(sol.kkt.tolerance);
    k["used_fallback"] = sol.kkt.used_fallback;
    out["kkt"] = k;
  }
  return out;
}

inline std::string contract_counts_csv(const UserTypeProfile& p, const ContractSolution& sol, int step) {
  const int users = p.distribution().users;
  const int types = static_cast<int>(p.types());
  std::ostringstream out;
  for (int i = 0; i < types; ++i) out << 'n' << i + 1 << ',';
  out << "incomplete_profit,complete_profit,ratio,user_payoff\n";
  for (const auto& c : multinomial_compositions(users, types)) {
    bool on_grid = true;
    for (int i = 0; i + 1 < types; ++i) on_grid = on_grid && c[i] % step == 0;
    if (!on_grid) continue;
    const auto r = compare_realized(p, sol, c);
    for (int v : c) out << v << ',';
    out << num(r.incomplete_profit) << ',' << num(r.complete_profit) << ',' << num(r.ratio) << ','
        << num(r.user_payoff) << '\n';
  }
  return out.str();
}

inline std::string contract_param_csv(const UserTypeProfile& base, const std::string& param, std::size_t type,
                                      const Range& range, double kkt_tolerance) {
  const std::size_t n = base.types();
  std::ostringstream out;
  out << "param,expected_profit";
  for (std::size_t i = 0; i < n; ++i) out << ",t" << i + 1;
  for (std::size_t i = 0; i < n; ++i) out << ",r" << i + 1;
  out << '\n';
  for (int k = 0; k < range.count; ++k) {
    const double x = range.at(k);
    auto kk = base.unit_cost();
    auto theta = base.preference();
    auto pop = base.population();
    if (param == "theta") {
      theta.at(type) = x;
    } else if (param == "K") {
      kk.at(type) = x;
    } else if (param == "N") {
      auto* d = std::get_if<TypeDistribution>(&pop);
      if (d == nullptr) throw ConfigError("--param N needs a probabilistic population");
      d->users = static_cast<int>(std::lround(x));
    } else {
      throw ConfigError("--param: unknown contract parameter \"" + param + "\" (counts | theta | K | N)");
    }
    const UserTypeProfile p(kk, base.capacity(), theta, pop);
    const auto sol = solve_contract(p, kkt_tolerance);
    out << num(x) << ',' << num(sol.expected_profit);
    for (const auto& it : sol.contract.items) out << ',' << num(it.task);
    for (const auto& it : sol.contract.items) out << ',' << num(it.reward);
    out << '\n';
  }
  return out.str();
}

inline std::string contract_simulate_csv(const UserTypeProfile& p, const ContractSolution& sol, int slots,
                                         std::uint64_t seed) {
  const auto run = simulate_contract(p, sol, slots, seed);
  std::ostringstream out;
  out << "slot";
  for (std::size_t i = 0; i < p.types(); ++i) out << ",n" << i + 1;
  out << ",incomplete_profit,complete_profit,ratio\n";
  for (const auto& r : run.records) {
    out << r.slot;
    for (int v : r.counts) out << ',' << v;
    out << ',' << num(r.outcome.incomplete_profit) << ',' << num(r.outcome.complete_profit) << ','
        << num(r.outcome.ratio) << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Dispatch
// ---------------------------------------------------------------------------

inline void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + path);
  f << text;
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Equilibrium and contract solvers for smartphone collaboration games"};
  app.require_subcommand(1);
  std::string config_path, out_path, param, range_text, contract_path;
  std::optional<std::uint64_t> seed;
  std::size_t grid = 0, instances = 0;
  int slots = 0, step = 1;
  double reward = std::numeric_limits<double>::quiet_NaN();
  std::size_t type_index = 1;

  auto add_common = [&](CLI::App* c, bool needs_config) {
    auto* o = c->add_option("--config", config_path, "config file (JSON)");
    if (needs_config) o->required()->check(CLI::ExistingFile);
    c->add_option("--out", out_path, "write output here instead of stdout");
  };

  auto* acq = app.add_subcommand("acq", "data acquisition reward game");
  acq->require_subcommand(1);
  auto* acq_solve = acq->add_subcommand("solve", "solve for R* and the Stage II equilibrium");
  add_common(acq_solve, true);
  acq_solve->add_option("--grid", grid, "reward grid points over [0, V]");
  auto* acq_sweep = acq->add_subcommand("sweep", "sweep one parameter, CSV out");
  add_common(acq_sweep, true);
  acq_sweep->add_option("--param", param, "R | delta | N | n0 | V")->required();
  acq_sweep->add_option("--range", range_text, "start:stop:count")->required();
  acq_sweep->add_option("--grid", grid, "reward grid points over [0, V]");
  auto* acq_sim = acq->add_subcommand("simulate", "realized profit over time slots, CSV out");
  add_common(acq_sim, true);
  acq_sim->add_option("--slots", slots, "number of time slots");
  acq_sim->add_option("--seed", seed, "master seed");
  acq_sim->add_option("--reward", reward, "fixed reward (default: optimized R*)");
  acq_sim->add_option("--grid", grid, "reward grid points over [0, V]");

  auto* con = app.add_subcommand("contract", "distributed computing contracts");
  con->require_subcommand(1);
  auto* con_solve = con->add_subcommand("solve", "optimal contract");
  add_common(con_solve, true);
  auto* con_check = con->add_subcommand("check", "feasibility of a given contract");
  add_common(con_check, false);
  con_check->add_option("--contract", contract_path, "contract file (JSON)")->required()->check(CLI::ExistingFile);
  auto* con_sweep = con->add_subcommand("sweep", "realized-count grid or parameter sweep, CSV out");
  add_common(con_sweep, true);
  con_sweep->add_option("--param", param, "counts | theta | K | N")->required();
  con_sweep->add_option("--range", range_text, "start:stop:count (theta | K | N)");
  con_sweep->add_option("--type", type_index, "1-based type index (theta | K)");
  con_sweep->add_option("--step", step, "count grid step (counts)");
  auto* con_sim = con->add_subcommand("simulate", "realized profits over time slots, CSV out");
  add_common(con_sim, true);
  con_sim->add_option("--slots", slots, "number of time slots");
  con_sim->add_option("--seed", seed, "master seed");

  auto* ver = app.add_subcommand("verify", "randomized solver vs oracle agreement");
  std::string suite;
  ver->add_option("suite", suite, "acq-ne | contract-feas | contract-grid | prob")
      ->required()
      ->check(CLI::IsMember({"acq-ne", "contract-feas", "contract-grid", "prob"}));
  ver->add_option("--seed", seed, "master seed");
  ver->add_option("--instances", instances, "number of random instances");
  ver->add_option("--out", out_path, "write the report here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, m;
    const int code = app.exit(e, o, m);
    out << o.str();
    err << m.str();
    return code == 0 ? kOk : kConfig;
  }

  try {
    RunConfig cfg;
    if (!config_path.empty()) cfg = load_config(config_path);
    const std::size_t g = grid > 0 ? grid : cfg.solver.grid;
    const std::uint64_t sd = seed.value_or(cfg.solver.seed);
    const int sl = slots > 0 ? slots : cfg.solver.slots;

    auto need_acq = [&]() -> const AcquisitionScenario& {
      if (!cfg.acquisition) throw ConfigError("config has no \"acquisition\" section");
      return *cfg.acquisition;
    };
    auto need_con = [&]() -> const UserTypeProfile& {
      if (!cfg.contract) throw ConfigError("config has no \"contract\" section");
      return *cfg.contract;
    };

    if (*acq_solve) {
      const auto& s = need_acq();
      emit(equilibrium_json(s, solve_acquisition(s, g)).dump(2) + "\n", out_path, out);
    } else if (*acq_sweep) {
      emit(acq_sweep_csv(need_acq(), param, parse_range(range_text), g), out_path, out);
    } else if (*acq_sim) {
      const auto& s = need_acq();
      double r = reward;
      if (std::isnan(r)) r = cfg.solver.reward ? *cfg.solver.reward : optimize_reward_asymmetric(s, RewardGrid(g)).reward;
      emit(acq_simulate_csv(s, r, sl, sd), out_path, out);
    } else if (*con_solve) {
      const auto& p = need_con();
      emit(contract_json(p, solve_contract(p, cfg.solver.kkt_tolerance)).dump(2) + "\n", out_path, out);
    } else if (*con_check) {
      const json cj = load_json(contract_path);
      std::vector<double> k;
      if (cj.contains("K")) k = field<std::vector<double>>(cj, "K", "contract file");
      else k = need_con().unit_cost();
      Contract c;
      for (const auto& it : field<json>(cj, "items", "contract file")) {
        if (!it.is_array() || it.size() != 2) throw ConfigError("contract file: items must be [reward, task] pairs");
        c.items.push_back({it[0].get<double>(), it[1].get<double>()});
      }
      c.validate();
      const auto rep = check_feasibility(c, k);
      json o;
      o["feasible"] = rep.feasible;
      json v = json::array();
      for (const auto& x : rep.violations) {
        v.push_back({{"condition", to_string(x.condition)}, {"type", x.type_index + 1}, {"detail", x.detail}});
      }
      o["violations"] = v;
      emit(o.dump(2) + "\n", out_path, out);
      return rep.feasible ? kOk : kVerdict;
    } else if (*con_sweep) {
      const auto& p = need_con();
      if (param == "counts") {
        if (step < 1) throw ConfigError("--step must be >= 1");
        const auto sol = solve_contract(p, cfg.solver.kkt_tolerance);
        emit(contract_counts_csv(p, sol, step), out_path, out);
      } else {
        if (type_index < 1 || type_index > p.types()) throw ConfigError("--type out of range");
        emit(contract_param_csv(p, param, type_index - 1, parse_range(range_text), cfg.solver.kkt_tolerance), out_path,
             out);
      }
    } else if (*con_sim) {
      const auto& p = need_con();
      emit(contract_simulate_csv(p, solve_contract(p, cfg.solver.kkt_tolerance), sl, sd), out_path, out);
    } else if (*ver) {
      verify::Report rep("");
      if (suite == "acq-ne") rep = verify::acquisition_ne(sd, instances ? instances : 1000);
      else if (suite == "contract-feas") rep = verify::contract_feasibility(sd, instances ? instances : 10000);
      else if (suite == "contract-grid") rep = verify::contract_grid(sd, instances ? instances : 50);
      else rep = verify::probability(sd, instances ? instances : 100);
      std::ostringstream o;
      o << rep.suite << ": " << rep.instances << " instances, " << rep.checks << " checks, " << rep.mismatches.size()
        << " mismatches (seed " << sd << ")\n";
      for (const auto& m : rep.mismatches) {
        o << "  instance " << m.instance << " repro-seed " << m.seed << ": " << m.detail << '\n';
      }
      emit(o.str(), out_path, out);
      return rep.ok() ? kOk : kVerdict;
    }
    return kOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const DomainError& e) {
    err << "input error: " << e.what() << '\n';
    return kConfig;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const nlohmann::json::exception& e) {
    err << "config error: " << e.what() << '\n';
    return kConfig;
  }
}

}  // namespace collab::cli
