#pragma once

#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "covert/bench.hpp"
#include "covert/errors.hpp"
#include "covert/loader.hpp"
#include "covert/model_io.hpp"
#include "covert/oracle.hpp"
#include "covert/variants.hpp"

namespace covert::cli {

enum ExitCode : int {
  kOk = 0,
  kInputError = 1,
  kNoPlan = 2,
  kVerifyFailed = 3,
  kInconclusive = 4,
};

namespace detail {

struct ModelArgs {
  std::string problem;
  std::optional<std::string> domain;
  std::optional<std::string> obs;
};

struct ParamArgs {
  std::optional<std::string> variant;
  std::optional<int> k, j, l, m;
  std::optional<std::string> d, distance, cost_bound;
  bool noops = false;
  std::size_t delta_max = 1;
  std::optional<std::uint64_t> noise_seed;
  std::string subset_strategy = "lex";
  std::optional<std::string> subset;
  double timeout = 1800;

  VariantParameters overrides() const {
    VariantParameters p;
    if (variant) p.variant = parse_variant(*variant);
    p.k = k;
    p.j = j;
    p.l = l;
    p.m = m;
    if (d) p.d = parse_rational(*d);
    if (distance) p.distance = parse_distance_kind(*distance);
    if (cost_bound) p.cost_bound = parse_rational(*cost_bound);
    return p;
  }
};

inline void add_model_options(CLI::App& cmd, ModelArgs& m) {
  cmd.add_option("--problem", m.problem, "Problem file")->required();
  cmd.add_option("--domain", m.domain, "Grounded PDDL domain (overrides the problem file)");
  cmd.add_option("--obs", m.obs, "Observation model (overrides the problem file)");
}

inline void add_param_options(CLI::App& cmd, ParamArgs& p) {
  cmd.add_option("--variant", p.variant, "classical, kamb, jleg, ldiv or msim");
  cmd.add_option("--k", p.k, "Goals the final belief must cover (kamb)");
  cmd.add_option("--j", p.j, "Goals the final belief may cover (jleg)");
  cmd.add_option("--l", p.l, "Goal-reaching plans in the plan set (ldiv)");
  cmd.add_option("--m", p.m, "Goal-reaching plans in the plan set (msim)");
  cmd.add_option("--d", p.d, "Distance threshold, e.g. 0.25 or 1/3");
  cmd.add_option("--distance", p.distance, "action, causal or state");
  cmd.add_option("--cost-bound", p.cost_bound, "Cost bound for ldiv/msim");
  cmd.add_flag("--noops", p.noops, "Allow pretend actions that emit any token");
  cmd.add_option("--delta-max", p.delta_max, "Largest tracked-state set size")->check(CLI::PositiveNumber);
  cmd.add_option("--heuristic-noise", p.noise_seed, "Seed for uniform heuristic jitter in [0, 0.5)");
  cmd.add_option("--subset-strategy", p.subset_strategy, "lex or farthest-first");
  cmd.add_option("--subset", p.subset, "Comma-separated decoy indices to commit to");
  cmd.add_option("--timeout", p.timeout, "Seconds per plan call")->check(CLI::PositiveNumber);
}

inline std::vector<std::size_t> parse_indices(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      unsigned long v = std::stoul(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw BadParameter("bad goal index '" + item + "'");
    }
  }
  return out;
}

inline VariantParameters merged_parameters(const LoadedProblem& p, const ParamArgs& args,
                                           const std::optional<std::string>& record_variant = {}) {
  VariantParameters params = p.spec.parameters();
  if (record_variant) params.variant = parse_variant(*record_variant);
  params.merge(args.overrides());
  params.validate(p.spec.goals.size());
  if (!params.variant) throw BadParameter("no variant given: pass --variant or add 'variant:' to the problem file");
  return params;
}

inline void write_output(const std::optional<std::string>& path, const std::string& text, std::ostream& out) {
  if (!path) {
    out << text;
    return;
  }
  std::ofstream f(*path, std::ios::binary);
  if (!f) throw InputError("cannot write '" + *path + "'");
  f << text;
}

inline std::string failure_reason(const NoPlan& e) {
  if (dynamic_cast<const SearchTimeout*>(&e)) return "timeout";
  std::string what = e.what();
  if (what.find("cost-bound-exceeded") != std::string::npos || dynamic_cast<const CostBoundExceeded*>(&e))
    return "cost-bound-exceeded";
  return "exhausted";
}

inline int report_error(std::ostream& err, const std::string& code, const std::string& reason,
                        const std::string& message, int exit_code) {
  nlohmann::json doc{{"error", code}, {"reason", reason}, {"message", message}};
  err << emit_canonical(doc);
  return exit_code;
}

// Maps library exceptions to exit codes; `body` returns the success code.
template <typename Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const NoPlan& e) {
    return report_error(err, e.code(), failure_reason(e), e.what(), kNoPlan);
  } catch (const InputError& e) {
    return report_error(err, e.code(), "input", e.what(), kInputError);
  } catch (const NoMatchingRule& e) {
    return report_error(err, e.code(), "input", e.what(), kInputError);
  } catch (const BeliefOverflow& e) {
    return report_error(err, e.code(), "belief-cap", e.what(), kNoPlan);
  } catch (const Error& e) {
    return report_error(err, e.code(), "error", e.what(), kInputError);
  }
}

inline int cmd_plan(const ModelArgs& margs, const ParamArgs& pargs, const std::optional<std::string>& out_path,
                    std::ostream& out) {
  LoadedProblem p = load_problem(margs.problem, margs.domain, margs.obs);
  VariantConfig config = make_variant_config(merged_parameters(p, pargs));
  config.noops = pargs.noops;
  config.delta_max = pargs.delta_max;
  config.noise_seed = pargs.noise_seed;
  config.subset_strategy = parse_subset_strategy(pargs.subset_strategy);
  if (pargs.subset) config.subset = parse_indices(*pargs.subset);
  config.deadline = std::chrono::steady_clock::now() +
                    std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                        std::chrono::duration<double>(pargs.timeout));
  Solution sol = solve(p.domain, p.model, p.spec.initial, p.spec.goals, config);
  write_output(out_path, emit_plan_record(sol.record()), out);
  return kOk;
}

inline int cmd_verify(const ModelArgs& margs, const ParamArgs& pargs, const std::string& plan_path,
                      std::size_t budget, std::ostream& out) {
  LoadedProblem p = load_problem(margs.problem, margs.domain, margs.obs);
  PlanRecord record = parse_plan_record(read_file(plan_path));
  VariantParameters params =
      merged_parameters(p, pargs, record.variant.empty() ? std::nullopt : std::optional(record.variant));
  VariantConfig config = make_variant_config(params);

  std::optional<CompiledModel> compiled;
  if (pargs.noops) compiled.emplace(compile_noops(p.domain, p.model));
  const GroundedDomain& domain = compiled ? compiled->domain : p.domain;
  const ObservationModel& model = compiled ? compiled->model : p.model;
  const Plan plan = domain.make_plan(record.steps);
  const State& s0 = p.spec.initial;
  const CandidateGoalSet& goals = p.spec.goals;

  oracle::VerificationReport rep;
  try {
    switch (config.variant) {
      case Variant::classical: rep = oracle::verify_classical(domain, model, s0, goals.true_goal, plan); break;
      case Variant::k_ambiguous: rep = oracle::verify_k_ambiguous(domain, model, s0, goals, plan, config.k); break;
      case Variant::j_legible: rep = oracle::verify_j_legible(domain, model, s0, goals, plan, config.j); break;
      case Variant::l_diverse:
        rep = oracle::verify_l_diverse(domain, model, s0, goals.true_goal, plan, config.l, config.distance,
                                       config.threshold(), budget);
        break;
      case Variant::m_similar:
        rep = oracle::verify_m_similar(domain, model, s0, goals.true_goal, plan, config.m, config.distance,
                                       config.threshold(), budget);
        break;
    }
  } catch (const EnumerationBudgetExceeded& e) {
    rep.property = std::string(to_string(config.variant));
    rep.verdict = oracle::Verdict::inconclusive;
    rep.reason = e.what();
  } catch (const BeliefOverflow& e) {
    rep.property = std::string(to_string(config.variant));
    rep.verdict = oracle::Verdict::inconclusive;
    rep.reason = e.what();
  }
  if (rep.verdict == oracle::Verdict::pass && !record.trace.empty() && record.trace != rep.trace) {
    rep.verdict = oracle::Verdict::fail;
    rep.reason = "recorded trace differs from the trace the plan emits";
  }
  out << emit_canonical(oracle::to_json(rep));
  switch (rep.verdict) {
    case oracle::Verdict::pass: return kOk;
    case oracle::Verdict::fail: return kVerifyFailed;
    case oracle::Verdict::inconclusive: return kInconclusive;
  }
  return kVerifyFailed;
}

inline int cmd_trace(const ModelArgs& margs, bool noops, const std::string& plan_path, std::ostream& out) {
  LoadedProblem p = load_problem(margs.problem, margs.domain, margs.obs);
  PlanRecord record = parse_plan_record(read_file(plan_path));
  std::optional<CompiledModel> compiled;
  if (noops) compiled.emplace(compile_noops(p.domain, p.model));
  const GroundedDomain& domain = compiled ? compiled->domain : p.domain;
  const ObservationModel& model = compiled ? compiled->model : p.model;
  const Plan plan = domain.make_plan(record.steps);
  auto tokens = oracle::observe_plan(domain, model, p.spec.initial, plan);
  auto beliefs = oracle::replay_beliefs(domain, model, p.spec.initial, tokens);
  std::vector<std::size_t> sizes;
  for (const auto& b : beliefs) sizes.push_back(b.size());
  nlohmann::json doc{{"steps", record.steps}, {"trace", token_names(model, tokens)}, {"belief_sizes", sizes}};
  out << emit_canonical(doc);
  return kOk;
}

inline int cmd_bench(const std::string& suite, const ParamArgs& pargs, std::size_t threads, bool json,
                     std::ostream& out) {
  bench::Options opts;
  if (pargs.variant) opts.variant = parse_variant(*pargs.variant);
  opts.overrides = pargs.overrides();
  opts.overrides.variant.reset();
  opts.timeout_seconds = pargs.timeout;
  opts.threads = threads;
  bench::Report rep = bench::run_suite(suite, opts);
  out << (json ? emit_canonical(bench::to_json(rep)) : bench::format_table(rep));
  return kOk;
}

}  // namespace detail

// Entry point of the covert_planner executable. Exit codes: 0 success or
// verified, 1 bad input, 2 no plan, 3 verification failed, 4 inconclusive.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Plans whose observation traces obfuscate or reveal the agent's goal or plan"};
  app.require_subcommand(1);

  detail::ModelArgs plan_model, verify_model, trace_model;
  detail::ParamArgs plan_params, verify_params, bench_params;
  std::optional<std::string> out_path;
  std::string verify_plan, trace_plan, suite;
  std::size_t budget = oracle::kDefaultNodeBudget;
  std::size_t threads = 0;
  bool trace_noops = false, bench_json = false;

  CLI::App* plan = app.add_subcommand("plan", "Compute a plan for the chosen variant");
  detail::add_model_options(*plan, plan_model);
  detail::add_param_options(*plan, plan_params);
  plan->add_option("--out", out_path, "Write the plan record here instead of standard output");

  CLI::App* verify = app.add_subcommand("verify", "Check a plan record with the observer-side oracle");
  detail::add_model_options(*verify, verify_model);
  detail::add_param_options(*verify, verify_params);
  verify->add_option("--plan", verify_plan, "Plan record to check")->required();
  verify->add_option("--budget", budget, "Node budget for plan-set enumeration");

  CLI::App* tr = app.add_subcommand("trace", "Print the observations and belief sizes a plan induces");
  detail::add_model_options(*tr, trace_model);
  tr->add_option("--plan", trace_plan, "Plan record")->required();
  tr->add_flag("--noops", trace_noops, "Plan may use pretend actions");

  CLI::App* bench = app.add_subcommand("bench", "Run a directory of problem files and summarize");
  bench->add_option("--suite", suite, "Directory of .problem files")->required();
  detail::add_param_options(*bench, bench_params);
  bench->add_option("--threads", threads, "Worker threads (0: all cores)");
  bench->add_flag("--json", bench_json, "Emit JSON instead of a table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInputError;
  }

  return detail::guarded(err, [&] {
    if (*plan) return detail::cmd_plan(plan_model, plan_params, out_path, out);
    if (*verify) return detail::cmd_verify(verify_model, verify_params, verify_plan, budget, out);
    if (*tr) return detail::cmd_trace(trace_model, trace_noops, trace_plan, out);
    return detail::cmd_bench(suite, bench_params, threads, bench_json, out);
  });
}

}  // namespace covert::cli
