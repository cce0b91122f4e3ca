#include "aoi_cli/commands.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include "aoi/analysis.hpp"
#include "aoi/error.hpp"
#include "aoi/evaluation.hpp"
#include "aoi/json_io.hpp"
#include "aoi/mdp.hpp"
#include "aoi/policies.hpp"
#include "aoi/solvers.hpp"

namespace aoi::cli {
namespace {

constexpr double kMethodAgreement = 1e-4;
constexpr double kReproduceTolerance = 5e-3;
constexpr int kReproduceAgeCap = 200;
constexpr double kCapMassWarning = 1e-8;

struct RunConfig {
  std::vector<double> p;
  std::string dist_file;
  int K = 0;  // 0: default_age_cap(L)
  double tol = 1e-10;
  std::uint64_t seed = 0;
  std::string out;
  std::string format = "table";
};

struct PolicyOptions {
  bool always_preempt = false;
  std::vector<int> double_threshold;
  std::string policy_file;
};

struct SimulationFlags {
  std::int64_t slots = 1'000'000;
  std::size_t replications = 20;
  std::string trace_out;
};

// Thrown for argument combinations CLI11 cannot express.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Command-level failure with its own error code (exit 1).
struct Failure : std::runtime_error {
  Failure(std::string code_name, const std::string& message, std::string ctx)
      : std::runtime_error(message), code(std::move(code_name)), context(std::move(ctx)) {}
  std::string code;
  std::string context;
};

void add_common(CLI::App& cmd, RunConfig& cfg) {
  auto* p = cmd.add_option("--p", cfg.p, "service pmf, comma separated")->delimiter(',');
  auto* file = cmd.add_option("--dist-file", cfg.dist_file, "JSON file {\"p\": [...]}");
  p->excludes(file);
  cmd.add_option("--K", cfg.K, "age cap (default max(50, 20 L))")->check(CLI::PositiveNumber);
  cmd.add_option("--tol", cfg.tol, "solver tolerance")->check(CLI::PositiveNumber);
  cmd.add_option("--seed", cfg.seed, "simulation seed");
  cmd.add_option("--out", cfg.out, "write the report here instead of standard output");
  cmd.add_option("--format", cfg.format, "json, csv or table")
      ->check(CLI::IsMember({"json", "csv", "table"}));
}

void add_policy(CLI::App& cmd, PolicyOptions& opts) {
  auto* ap = cmd.add_flag("--always-preempt", opts.always_preempt, "always resample");
  auto* dt = cmd.add_option("--double-threshold", opts.double_threshold, "VTH1 VTH2")->expected(2);
  auto* file = cmd.add_option("--policy-file", opts.policy_file, "policy JSON");
  ap->excludes(dt)->excludes(file);
  dt->excludes(file);
}

void add_simulation(CLI::App& cmd, SimulationFlags& flags) {
  cmd.add_option("--slots", flags.slots, "slots per replication");
  cmd.add_option("--replications", flags.replications, "independent replications")
      ->check(CLI::PositiveNumber);
  cmd.add_option("--trace-out", flags.trace_out, "CSV of (i, S_i, D_i, M_i) for replication 0");
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidInput, "cannot open file", path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidInput, "malformed JSON", path + ": " + e.what());
  }
}

ServiceDistribution load_distribution(const RunConfig& cfg) {
  if (cfg.p.empty() == cfg.dist_file.empty()) {
    throw UsageError("exactly one of --p or --dist-file is required");
  }
  if (!cfg.p.empty()) return ServiceDistribution(cfg.p);
  try {
    return distribution_from_json(read_json_file(cfg.dist_file));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidInput, "bad distribution file", cfg.dist_file + ": " + e.what());
  }
}

int age_cap(const RunConfig& cfg, const ServiceDistribution& d) {
  const int L = d.support();
  const int K = cfg.K > 0 ? cfg.K : default_age_cap(L);
  if (K < L) {
    throw Error(ErrorCode::RejectsKSmallerThanL, "age cap below the service support",
                "K=" + std::to_string(K) + " L=" + std::to_string(L));
  }
  return K;
}

struct ChosenPolicy {
  Policy policy;
  std::optional<DoubleThresholdSpec> renewal;  // set when the renewal route applies
};

ChosenPolicy load_policy(const PolicyOptions& opts, const ServiceDistribution& d, int K) {
  const int L = d.support();
  if (opts.always_preempt) return {always_preempt(K, L), DoubleThresholdSpec{1, 1}};
  if (!opts.double_threshold.empty()) {
    const DoubleThresholdSpec spec{opts.double_threshold[0], opts.double_threshold[1]};
    return {double_threshold(spec, K, L), spec};
  }
  if (!opts.policy_file.empty()) {
    Policy policy = [&] {
      try {
        return policy_from_json(read_json_file(opts.policy_file), K, L);
      } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidPolicy, "bad policy file", opts.policy_file + ": " + e.what());
      }
    }();
    std::optional<DoubleThresholdSpec> spec = policy.thresholds();
    if (policy.kind() == PolicyKind::AlwaysPreempt) spec = DoubleThresholdSpec{1, 1};
    return {std::move(policy), spec};
  }
  throw UsageError("one of --always-preempt, --double-threshold or --policy-file is required");
}

// Report destination: the --out file when given, otherwise standard output.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw Error(ErrorCode::InvalidInput, "cannot write output file", path);
      stream_ = file_.get();
    }
  }
  std::ostream& os() { return *stream_; }
  bool redirected() const { return file_ != nullptr; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_;
};

void write_file(const std::string& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorCode::InvalidInput, "cannot write file", path);
  body(os);
}

void emit_json(std::ostream& os, const json& j) { os << j.dump(2) << "\n"; }

std::ostream& num(std::ostream& os) { return os << std::setprecision(10); }

std::string format_pmf(const ServiceDistribution& d) {
  std::ostringstream os;
  os << std::setprecision(10) << "[";
  for (int i = 1; i <= d.support(); ++i) os << (i > 1 ? ", " : "") << d.pmf(i);
  os << "]";
  return os.str();
}

// v1 ranges where the policy continues, per v2 row.
void print_continue_regions(std::ostream& os, const Policy& policy, int L) {
  const StateSpace& space = policy.space();
  for (int v2 = 1; v2 < L; ++v2) {
    os << "  v2=" << v2 << ": continue at v1 in";
    bool any = false;
    int start = 0;
    int last = 0;
    auto flush = [&] {
      if (start == 0) return;
      os << (any ? "," : "") << " [" << start << "," << last << "]";
      any = true;
      start = 0;
    };
    for (int v1 = v2; v1 <= space.age_cap(); ++v1) {
      if (policy.at(State{v1, v2}) == Action::Continue) {
        if (start == 0) start = v1;
        last = v1;
      } else {
        flush();
      }
    }
    flush();
    if (!any) os << " none";
    os << "\n";
  }
}

void print_condition(std::ostream& os, const ConditionReport& r) {
  os << r.name << ": " << (r.holds ? "holds" : "violated") << "\n";
  if (r.witness) {
    os << "  witness: ";
    std::visit([&os](const auto& w) { os << w; }, *r.witness);
    os << "\n";
  }
  for (const auto& [clause, value] : r.clauses) {
    os << "  " << clause << ": " << (value ? "holds" : "violated") << "\n";
  }
  if (!r.intermediate.empty()) {
    os << "  values:";
    for (double x : r.intermediate) num(os) << " " << x;
    os << "\n";
  }
  if (!r.note.empty()) os << "  " << r.note << "\n";
}

// ---- solve -----------------------------------------------------------------

struct SolveArgs {
  RunConfig cfg;
  std::string kernel_out;
};

int cmd_solve(const SolveArgs& args, std::ostream& out) {
  const ServiceDistribution d = load_distribution(args.cfg);
  const int K = age_cap(args.cfg, d);
  SolverConfig solver;
  solver.tol = args.cfg.tol;
  const RviResult result = relative_value_iteration(d, K, solver);
  const double mass =
      std::get<ChainDetail>(exact_average_age(result.policy, d, K).detail).mass_at_cap;
  if (!args.kernel_out.empty()) {
    write_file(args.kernel_out, [&](std::ostream& os) { write_kernel_csv(os, result.value.space, d); });
  }

  Sink sink(args.cfg.out, out);
  std::ostream& os = sink.os();
  if (args.cfg.format == "json") {
    json report = solver_report_json(result);
    report["distribution"] = to_json(d);
    report["mass_at_cap"] = mass;
    emit_json(os, report);
  } else if (args.cfg.format == "csv") {
    write_value_csv(os, result.value);
  } else {
    os << "distribution " << format_pmf(d) << "  K=" << K << "\n";
    num(os) << "gain " << *result.value.gain << "\n";
    os << "iterations " << result.value.iterations << "  span residual " << result.value.residual
       << "\n";
    os << "stationary mass at v1 = K: " << mass
       << (mass < kCapMassWarning ? "" : "  (raise --K: truncation may bias the gain)") << "\n";
    os << "policy (Sample elsewhere, never Idle at empty states):\n";
    print_continue_regions(os, result.policy, d.support());
  }
  if (sink.redirected()) num(out) << "gain " << *result.value.gain << "\n";
  return kOk;
}

// ---- solve-discounted --------------------------------------------------------

struct DiscountedArgs {
  RunConfig cfg;
  double alpha = 0.9;
};

int cmd_solve_discounted(const DiscountedArgs& args, std::ostream& out) {
  const ServiceDistribution d = load_distribution(args.cfg);
  const int K = age_cap(args.cfg, d);
  SolverConfig solver;
  solver.tol = args.cfg.tol;
  solver.discount = args.alpha;
  const ValueFunction V = discounted_value_iteration(d, K, solver);

  Sink sink(args.cfg.out, out);
  std::ostream& os = sink.os();
  if (args.cfg.format == "json") {
    json report = discounted_report_json(V);
    report["distribution"] = to_json(d);
    emit_json(os, report);
  } else if (args.cfg.format == "csv") {
    write_value_csv(os, V);
  } else {
    os << "distribution " << format_pmf(d) << "  K=" << K << "  alpha=" << args.alpha << "\n";
    num(os) << "V(1:E) " << V.at(empty_state(1)) << "\n";
    os << "iterations " << V.iterations << "  step " << V.residual << "\n";
  }
  if (sink.redirected()) num(out) << "V(1:E) " << V.at(empty_state(1)) << "\n";
  return kOk;
}

// ---- evaluate / simulate ---------------------------------------------------

struct EvaluateArgs {
  RunConfig cfg;
  PolicyOptions policy;
  SimulationFlags sim;
  bool simulate = false;
};

SimulationResult run_simulation(const Policy& policy, const ServiceDistribution& d,
                                const RunConfig& cfg, const SimulationFlags& flags) {
  SimulationOptions options;
  options.horizon = flags.slots;
  options.replications = flags.replications;
  options.seed = cfg.seed;
  options.record_trace = !flags.trace_out.empty();
  SimulationResult result = simulate(policy, d, options);
  if (!flags.trace_out.empty()) {
    write_file(flags.trace_out, [&](std::ostream& os) { write_trace_csv(os, result.trace); });
  }
  return result;
}

void print_report_row(std::ostream& os, const EvalReport& r) {
  os << std::left << std::setw(12) << to_string(r.method) << std::right;
  num(os) << r.average_age;
  std::visit(
      [&](const auto& detail) {
        using T = std::decay_t<decltype(detail)>;
        if constexpr (std::is_same_v<T, ChainDetail>) {
          os << "  (K=" << r.K << ", recurrent states " << detail.recurrent_states
             << ", mass at cap " << detail.mass_at_cap << ")";
        } else if constexpr (std::is_same_v<T, RenewalDetail>) {
          os << "  (mean cycle " << detail.expected_cycle_length << ")";
        } else {
          os << "  +/- " << detail.ci_halfwidth << "  (95% CI, " << detail.replications << " x "
             << detail.slots << " slots, seed " << detail.seed << ")";
        }
      },
      r.detail);
  os << "\n";
}

int cmd_evaluate(const EvaluateArgs& args, std::ostream& out) {
  const ServiceDistribution d = load_distribution(args.cfg);
  const int K = age_cap(args.cfg, d);
  const ChosenPolicy chosen = load_policy(args.policy, d, K);

  std::vector<EvalReport> reports;
  reports.push_back(exact_average_age(chosen.policy, d, K));
  const double chain = reports.back().average_age;
  std::optional<double> delta;
  if (chosen.renewal) {
    reports.push_back(renewal_reward_age(*chosen.renewal, d));
    delta = std::abs(reports.back().average_age - chain);
  }
  std::optional<bool> covered;
  if (args.simulate) {
    reports.push_back(run_simulation(chosen.policy, d, args.cfg, args.sim).report);
    const auto& mc = std::get<MonteCarloDetail>(reports.back().detail);
    covered = std::abs(reports.back().average_age - chain) <= mc.ci_halfwidth;
  }
  const bool agree = !delta || *delta <= kMethodAgreement;

  Sink sink(args.cfg.out, out);
  std::ostream& os = sink.os();
  if (args.cfg.format == "json") {
    json report{{"distribution", to_json(d)}, {"K", K}, {"policy", to_json(chosen.policy)}};
    json methods = json::array();
    for (const auto& r : reports) methods.push_back(to_json(r));
    report["reports"] = std::move(methods);
    report["chain_renewal_delta"] = delta ? json(*delta) : json(nullptr);
    report["agreement_tolerance"] = kMethodAgreement;
    report["methods_agree"] = agree;
    if (covered) report["ci_covers_chain"] = *covered;
    emit_json(os, report);
  } else if (args.cfg.format == "csv") {
    os << "method,average_age\n" << std::setprecision(17);
    for (const auto& r : reports) os << to_string(r.method) << "," << r.average_age << "\n";
  } else {
    os << "distribution " << format_pmf(d) << "  K=" << K << "\n";
    for (const auto& r : reports) print_report_row(os, r);
    if (delta) num(os) << "|chain - renewal| = " << *delta << (agree ? "" : "  MISMATCH") << "\n";
    if (covered) os << "simulation CI " << (*covered ? "covers" : "misses") << " the chain value\n";
  }
  if (!agree) {
    std::ostringstream ctx;
    ctx << std::setprecision(10) << "|chain - renewal| = " << *delta;
    throw Failure("MethodDisagreement", "evaluation methods disagree", ctx.str());
  }
  return kOk;
}

int cmd_simulate(const EvaluateArgs& args, std::ostream& out) {
  const ServiceDistribution d = load_distribution(args.cfg);
  const int K = age_cap(args.cfg, d);
  const ChosenPolicy chosen = load_policy(args.policy, d, K);
  const SimulationResult result = run_simulation(chosen.policy, d, args.cfg, args.sim);

  Sink sink(args.cfg.out, out);
  std::ostream& os = sink.os();
  if (args.cfg.format == "json") {
    emit_json(os, json{{"distribution", to_json(d)},
                       {"policy", to_json(chosen.policy)},
                       {"report", to_json(result.report)}});
  } else if (args.cfg.format == "csv") {
    const auto& mc = std::get<MonteCarloDetail>(result.report.detail);
    os << "replication,mean\n" << std::setprecision(17);
    for (std::size_t r = 0; r < mc.replication_means.size(); ++r) {
      os << r << "," << mc.replication_means[r] << "\n";
    }
  } else {
    print_report_row(os, result.report);
  }
  return kOk;
}

// ---- search --------------------------------------------------------------

struct SearchArgs {
  RunConfig cfg;
  int max_vth1 = 0;
};

PolicyEvaluator chain_evaluator(const ServiceDistribution& d, int K) {
  return [&d, K](const Policy& p) { return exact_average_age(p, d, K).average_age; };
}

int cmd_search(const SearchArgs& args, std::ostream& out) {
  const ServiceDistribution d = load_distribution(args.cfg);
  const int K = age_cap(args.cfg, d);
  const auto evaluator = chain_evaluator(d, K);
  const ThresholdSearchResult best = search_double_threshold(d, K, evaluator, args.max_vth1);
  const ThresholdSearchResult baseline = timeout_baseline(d, K, evaluator);

  Sink sink(args.cfg.out, out);
  std::ostream& os = sink.os();
  if (args.cfg.format == "json") {
    emit_json(os, json{{"distribution", to_json(d)},
                       {"K", K},
                       {"double_threshold", to_json(best)},
                       {"baseline_vth1_1", to_json(baseline)}});
  } else if (args.cfg.format == "csv") {
    write_surface_csv(os, best);
  } else {
    os << "distribution " << format_pmf(d) << "  K=" << K << "\n";
    num(os) << "double threshold  (" << best.best.vth1 << ", " << best.best.vth2 << ")  "
            << best.gain << "\n";
    num(os) << "vth1 = 1 baseline (1, " << baseline.best.vth2 << ")  " << baseline.gain << "\n";
  }
  return kOk;
}

// ---- check ---------------------------------------------------------------

struct CheckArgs {
  RunConfig cfg;
  std::string which;
  double alpha = 0.9;
};

ConditionReport run_check(const CheckArgs& args, const ServiceDistribution& d, int K) {
  const std::string& w = args.which;
  if (w == "sufficient") return sufficient_condition_always_preempt(d);
  if (w == "necessary") return necessary_condition_always_preempt(d);
  if (w == "nopreempt") return nopreempt_condition(d);
  SolverConfig solver;
  solver.tol = args.cfg.tol;
  if (w == "concavity") {
    solver.discount = args.alpha;
    return verify_concavity(discounted_value_iteration(d, K, solver), d.support(), K);
  }
  RviTraceRecorder trace;
  if (w == "assumption1" || w == "assumption2") solver.hooks.push_back(trace.hook());
  const RviResult result = relative_value_iteration(d, K, solver);
  if (w == "assumption1") return verify_assumption1(d, trace);
  if (w == "assumption2") return verify_assumption2(d, trace);
  if (w == "zero-wait") return verify_zero_wait(result.policy);
  return verify_threshold_in_v1(result.policy, d.support());
}

int cmd_check(const CheckArgs& args, std::ostream& out) {
  const ServiceDistribution d = load_distribution(args.cfg);
  const int K = age_cap(args.cfg, d);
  Sink sink(args.cfg.out, out);
  std::ostream& os = sink.os();

  if (args.which == "classify") {
    SolverConfig solver;
    solver.tol = args.cfg.tol;
    const Classification c = classify_distribution(d, K, solver);
    if (args.cfg.format == "table") {
      os << "distribution " << format_pmf(d) << "  K=" << K << "\n";
      num(os) << "optimal gain " << c.optimal_gain << "\n";
      num(os) << "always-preempt " << c.always_preempt_gain
              << (c.always_preempt_optimal ? "  (optimal)" : "") << "\n";
      num(os) << "double threshold (" << c.double_threshold.best.vth1 << ", "
              << c.double_threshold.best.vth2 << ") " << c.double_threshold.gain
              << (c.double_threshold_optimal ? "  (optimal)" : "") << "\n";
      num(os) << "vth1 = 1 baseline " << c.baseline.gain
              << (c.baseline_optimal ? "  (optimal)" : "") << "\n";
      for (const auto& r : c.conditions) print_condition(os, r);
      for (const auto& [name, ok] : c.consistency) {
        os << "consistency " << name << ": " << (ok ? "ok" : "FAILED") << "\n";
      }
    } else {
      emit_json(os, to_json(c));
    }
    return c.consistent ? kOk : kDomainFailure;
  }

  const ConditionReport report = run_check(args, d, K);
  if (args.cfg.format == "table") {
    print_condition(os, report);
  } else {
    emit_json(os, to_json(report));
  }
  return report.holds ? kOk : kDomainFailure;
}

// ---- reproduce -------------------------------------------------------------

struct ReproduceArgs {
  RunConfig cfg;
};

struct ReferenceRow {
  std::vector<double> p;
  double optimal;
  double double_threshold;
  double baseline;
};

struct ReferenceVerdict {
  std::vector<double> p;
  bool always_preempt_optimal;  // also the necessary-condition verdict
};

const std::vector<ReferenceRow>& reference_rows() {
  static const std::vector<ReferenceRow> rows = {
      {{0.4, 0.2, 0.2, 0.2}, 2.4952, 2.4952, 2.5},
      {{0.7, 0.1, 0.2}, 1.4286, 1.4286, 1.4286},
      {{0.05, 0.5, 0.1, 0.3, 0.05}, 3.8049, 3.9026, 3.9071},
      {{0.3, 0.25, 0.1, 0.3, 0.05}, 3.2170, 3.2170, 3.333},
  };
  return rows;
}

const std::vector<ReferenceVerdict>& reference_verdicts() {
  static const std::vector<ReferenceVerdict> rows = {
      {{0.5, 0.125, 0.125, 0.125, 0.125}, true},
      {{0.3, 0.175, 0.175, 0.175, 0.175}, false},
  };
  return rows;
}

int cmd_reproduce(const ReproduceArgs& args, std::ostream& out) {
  const int K = args.cfg.K > 0 ? args.cfg.K : kReproduceAgeCap;
  SolverConfig solver;
  solver.tol = args.cfg.tol;

  json rows = json::array();
  std::vector<std::string> mismatches;
  for (const auto& row : reference_rows()) {
    const ServiceDistribution d(row.p);
    const RviResult opt = relative_value_iteration(d, K, solver);
    const auto evaluator = chain_evaluator(d, K);
    const auto dt = search_double_threshold(d, K, evaluator);
    const auto base = timeout_baseline(d, K, evaluator);
    const double mass = std::get<ChainDetail>(exact_average_age(opt.policy, d, K).detail).mass_at_cap;

    json cells = json::array();
    auto cell = [&](const char* name, double expected, double computed) {
      const double delta = computed - expected;
      const bool ok = std::abs(delta) <= kReproduceTolerance;
      if (!ok) mismatches.push_back(format_pmf(d) + " " + name);
      cells.push_back(json{{"policy", name}, {"expected", expected}, {"computed", computed},
                           {"delta", delta}, {"ok", ok}});
    };
    cell("optimal", row.optimal, *opt.value.gain);
    cell("double_threshold", row.double_threshold, dt.gain);
    cell("baseline_vth1_1", row.baseline, base.gain);
    rows.push_back(json{{"p", row.p},
                        {"K", K},
                        {"mass_at_cap", mass},
                        {"double_threshold", {dt.best.vth1, dt.best.vth2}},
                        {"cells", std::move(cells)}});
  }

  json verdicts = json::array();
  for (const auto& v : reference_verdicts()) {
    const ServiceDistribution d(v.p);
    const double optimal = *relative_value_iteration(d, K, solver).value.gain;
    const double preempt = exact_average_age(always_preempt(K, d.support()), d, K).average_age;
    const bool solver_verdict = preempt - optimal <= kGainTolerance;
    const bool condition = necessary_condition_always_preempt(d).holds;
    const bool ok = solver_verdict == v.always_preempt_optimal && condition == v.always_preempt_optimal;
    if (!ok) mismatches.push_back(format_pmf(d) + " necessary-condition verdict");
    verdicts.push_back(json{{"p", v.p},
                            {"expected_always_preempt_optimal", v.always_preempt_optimal},
                            {"solver_always_preempt_optimal", solver_verdict},
                            {"necessary_condition_holds", condition},
                            {"optimal_gain", optimal},
                            {"always_preempt_gain", preempt},
                            {"ok", ok}});
  }

  Sink sink(args.cfg.out, out);
  std::ostream& os = sink.os();
  if (args.cfg.format == "json") {
    emit_json(os, json{{"rows", rows},
                       {"verdicts", verdicts},
                       {"tolerance", kReproduceTolerance},
                       {"all_match", mismatches.empty()}});
  } else if (args.cfg.format == "csv") {
    os << "p,policy,expected,computed,delta,ok\n" << std::setprecision(10);
    for (const auto& row : rows) {
      std::ostringstream p;
      for (std::size_t i = 0; i < row["p"].size(); ++i) p << (i ? " " : "") << row["p"][i].get<double>();
      for (const auto& c : row["cells"]) {
        os << p.str() << "," << c["policy"].get<std::string>() << "," << c["expected"].get<double>()
           << "," << c["computed"].get<double>() << "," << c["delta"].get<double>() << ","
           << (c["ok"].get<bool>() ? 1 : 0) << "\n";
      }
    }
  } else {
    os << std::left << std::setw(34) << "distribution" << std::setw(18) << "policy" << std::right
       << std::setw(10) << "expected" << std::setw(12) << "computed" << std::setw(12) << "delta"
       << "\n";
    for (const auto& row : rows) {
      const std::string p = format_pmf(ServiceDistribution(row["p"].get<std::vector<double>>()));
      for (const auto& c : row["cells"]) {
        os << std::left << std::setw(34) << p << std::setw(18) << c["policy"].get<std::string>()
           << std::right << std::fixed << std::setprecision(4) << std::setw(10)
           << c["expected"].get<double>() << std::setw(12) << c["computed"].get<double>()
           << std::setprecision(6) << std::setw(12) << c["delta"].get<double>()
           << (c["ok"].get<bool>() ? "" : "  MISMATCH") << "\n";
        os.unsetf(std::ios::fixed);
      }
    }
    os << "\n";
    for (const auto& v : verdicts) {
      os << format_pmf(ServiceDistribution(v["p"].get<std::vector<double>>()))
         << "  always-preempt optimal: expected " << (v["expected_always_preempt_optimal"].get<bool>() ? "yes" : "no")
         << ", solver " << (v["solver_always_preempt_optimal"].get<bool>() ? "yes" : "no")
         << ", necessary condition " << (v["necessary_condition_holds"].get<bool>() ? "holds" : "fails")
         << (v["ok"].get<bool>() ? "" : "  MISMATCH") << "\n";
    }
  }
  if (!mismatches.empty()) {
    std::string list;
    for (const auto& m : mismatches) list += (list.empty() ? "" : "; ") + m;
    throw Failure("ReproductionMismatch", "cells outside tolerance", list);
  }
  return kOk;
}

void print_error(std::ostream& err, std::string_view code, const std::string& message,
                 const std::string& context) {
  err << json{{"code", code}, {"message", message}, {"context", context}}.dump() << "\n";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Age-of-information sampling with preemption: solve, evaluate, check", "aoi"};
  app.require_subcommand(1);

  SolveArgs solve;
  auto* solve_cmd = app.add_subcommand("solve", "average-cost optimum by relative value iteration");
  add_common(*solve_cmd, solve.cfg);
  solve_cmd->add_option("--kernel-out", solve.kernel_out, "CSV dump of the transition kernel");

  DiscountedArgs discounted;
  auto* disc_cmd = app.add_subcommand("solve-discounted", "discounted value iteration");
  add_common(*disc_cmd, discounted.cfg);
  disc_cmd->add_option("--alpha", discounted.alpha, "discount factor in (0, 1)")
      ->check(CLI::Range(0.0, 1.0));

  EvaluateArgs evaluate;
  auto* eval_cmd = app.add_subcommand("evaluate", "average age of a fixed policy");
  add_common(*eval_cmd, evaluate.cfg);
  add_policy(*eval_cmd, evaluate.policy);
  add_simulation(*eval_cmd, evaluate.sim);
  eval_cmd->add_flag("--simulate", evaluate.simulate, "add a Monte Carlo estimate");

  EvaluateArgs simulation;
  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo run of a fixed policy");
  add_common(*sim_cmd, simulation.cfg);
  add_policy(*sim_cmd, simulation.policy);
  add_simulation(*sim_cmd, simulation.sim);

  SearchArgs search;
  auto* search_cmd = app.add_subcommand("search", "best double-threshold pair");
  add_common(*search_cmd, search.cfg);
  search_cmd->add_option("--max-vth1", search.max_vth1, "largest vth1 scanned (default K/2)")
      ->check(CLI::PositiveNumber);

  CheckArgs check;
  auto* check_cmd = app.add_subcommand("check", "run one structural checker");
  add_common(*check_cmd, check.cfg);
  check_cmd
      ->add_option("which", check.which, "condition name")
      ->required()
      ->check(CLI::IsMember({"sufficient", "necessary", "nopreempt", "assumption1", "assumption2",
                             "zero-wait", "threshold", "concavity", "classify"}));
  check_cmd->add_option("--alpha", check.alpha, "discount factor for concavity")
      ->check(CLI::Range(0.0, 1.0));

  ReproduceArgs reproduce;
  auto* repro_cmd = app.add_subcommand("reproduce", "reference comparison table");
  repro_cmd->add_option("--K", reproduce.cfg.K, "age cap (default 200)")->check(CLI::PositiveNumber);
  repro_cmd->add_option("--tol", reproduce.cfg.tol, "solver tolerance")->check(CLI::PositiveNumber);
  repro_cmd->add_option("--out", reproduce.cfg.out, "write the table here");
  repro_cmd->add_option("--format", reproduce.cfg.format, "json, csv or table")
      ->check(CLI::IsMember({"json", "csv", "table"}));

  std::vector<const char*> argv{"aoi"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    print_error(err, "UsageError", e.what(), "");
    return kUsageError;
  }

  try {
    if (solve_cmd->parsed()) return cmd_solve(solve, out);
    if (disc_cmd->parsed()) {
      if (discounted.alpha <= 0.0 || discounted.alpha >= 1.0) {
        throw UsageError("--alpha must lie strictly between 0 and 1");
      }
      return cmd_solve_discounted(discounted, out);
    }
    if (eval_cmd->parsed()) return cmd_evaluate(evaluate, out);
    if (sim_cmd->parsed()) return cmd_simulate(simulation, out);
    if (search_cmd->parsed()) return cmd_search(search, out);
    if (check_cmd->parsed()) {
      if (check.alpha <= 0.0 || check.alpha >= 1.0) {
        throw UsageError("--alpha must lie strictly between 0 and 1");
      }
      return cmd_check(check, out);
    }
    return cmd_reproduce(reproduce, out);
  } catch (const UsageError& e) {
    print_error(err, "UsageError", e.what(), "");
    return kUsageError;
  } catch (const Failure& e) {
    print_error(err, e.code, e.what(), e.context);
    return kDomainFailure;
  } catch (const Error& e) {
    print_error(err, to_string(e.code()), e.what(), e.context());
    return kDomainFailure;
  }
}

}  // namespace aoi::cli
