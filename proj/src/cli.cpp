#include "bcwe/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string_view>

#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"

#include "bcwe/auxiliary.hpp"
#include "bcwe/bcwe.hpp"
#include "bcwe/errors.hpp"
#include "bcwe/full_impl.hpp"
#include "bcwe/info_design.hpp"
#include "bcwe/io.hpp"
#include "bcwe/wardrop.hpp"

namespace bcwe::cli {

namespace {

using io::Json;

struct Options {
  std::string game;
  std::string bcwe;
  std::string outcome;
  std::string structure;
  std::string profile;
  std::string objective = "social_cost";
  int denominator = 6;
  double eta = 0.0;
  double gap = 1e-8;
  long max_iters = 100000;
  int runs = 8;
  std::uint64_t seed = 7;
  double tol = 1e-7;
  std::size_t samples = 256;
  std::string out;
};

// Input documents with their content digests for the report.
class Inputs {
 public:
  Json load(const std::string& role, const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::kSchema, "cannot open file", path);
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    digests_[role] = Json{{"path", path}, {"sha256", io::sha256_hex(bytes)}};
    try {
      return Json::parse(bytes);
    } catch (const Json::parse_error& e) {
      throw Error(ErrorCode::kSchema, std::string("invalid JSON: ") + e.what(), path);
    }
  }
  const Json& digests() const { return digests_; }

 private:
  Json digests_ = Json::object();
};

struct Outcome {
  bool certified = true;
  Json results = Json::object();
  Json tolerances = Json::object();
};

Json labeled_matrix(const Eigen::MatrixXd& m, const std::vector<std::string>& labels) {
  Json rows = Json::object();
  for (Eigen::Index a = 0; a < m.rows(); ++a) {
    Json row = Json::object();
    for (Eigen::Index b = 0; b < m.cols(); ++b) row[labels[static_cast<std::size_t>(b)]] = m(a, b);
    rows[labels[static_cast<std::size_t>(a)]] = std::move(row);
  }
  return rows;
}

Json vector_json(const Eigen::VectorXd& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

DescentConfig descent_config(const Options& o) {
  DescentConfig c;
  c.target_gap = o.gap;
  c.max_iters = o.max_iters;
  c.seed = o.seed;
  return c;
}

void maybe_write(const Options& o, const Json& doc) {
  if (!o.out.empty()) io::write_json_file(o.out, doc);
}

Json interim_report_json(const InterimCostReport& report, const InformationStructure& structure,
                         const std::vector<std::string>& actions) {
  Json types = Json::array();
  for (const auto& e : report.types) {
    Json costs = Json::object();
    for (std::size_t a = 0; a < actions.size(); ++a) costs[actions[a]] = e.conditional_costs(static_cast<Eigen::Index>(a));
    types.push_back({{"population", e.population},
                     {"type", structure.type_sets()[e.population][e.type]},
                     {"probability", e.probability},
                     {"excluded", e.excluded},
                     {"conditional_costs", std::move(costs)},
                     {"max_slack", e.max_slack}});
  }
  return Json{{"epsilon", report.epsilon},
              {"unnormalized_epsilon", report.unnormalized_epsilon},
              {"types", std::move(types)}};
}

Outcome run_wardrop(const Options& o, Inputs& inputs) {
  const CongestionGame game = io::parse_game(inputs.load("game", o.game));
  Outcome r;
  r.tolerances = {{"gap", o.gap}, {"tol", o.tol}};
  Json states = Json::object();
  std::vector<std::vector<OutcomeAtom>> per_state;
  for (std::size_t s = 0; s < game.num_states(); ++s) {
    const WardropSolution sol = solve_wardrop(game, s, descent_config(o));
    const EquilibriumGapReport check = verify_wardrop(game, sol.flow, s, o.tol);
    r.certified = r.certified && check.certified;
    states[game.states()[s]] = {{"flow", vector_json(sol.flow.entries())},
                                {"costs", vector_json(check.costs)},
                                {"gap", check.gap},
                                {"social_cost", social_cost(game, sol.flow, s)},
                                {"iterations", sol.iterations},
                                {"certified", check.certified}};
    per_state.push_back({OutcomeAtom{sol.flow, 1.0}});
    spdlog::info("state {}: gap {:.3e} after {} iterations", game.states()[s], check.gap, sol.iterations);
  }
  r.results["actions"] = game.action_labels();
  r.results["states"] = std::move(states);
  if (game.num_states() > 1) {
    const WardropSolution avg = solve_average_wardrop(game, descent_config(o));
    r.results["average_game"] = {{"flow", vector_json(avg.flow.entries())}, {"gap", avg.gaps.gap()}};
  }
  maybe_write(o, io::outcome_to_json(FiniteOutcome(std::move(per_state)), game));
  return r;
}

Outcome run_bcwe_opt(const Options& o, Inputs& inputs) {
  const CongestionGame game = io::parse_game(inputs.load("game", o.game));
  BcweObjective objective;
  if (o.objective == "social_cost") {
    objective = BcweObjective::social_cost();
  } else if (o.objective == "neg_social_cost") {
    objective = BcweObjective::neg_social_cost();
  } else {
    throw Error(ErrorCode::kSchema, "objective must be social_cost or neg_social_cost", "--objective");
  }
  const FlowGrid grid(o.denominator, game.num_actions());
  Outcome r;
  r.tolerances = {{"obedience", 1e-8}};
  r.results["objective"] = o.objective;
  r.results["denominator"] = o.denominator;
  r.results["grid_points"] = grid.size();
  try {
    const BcweOptimum opt = optimize_bcwe(game, objective, grid);
    const ObedienceReport check = verify_bcwe(game, opt.outcome, 1e-8);
    r.results["value"] = opt.value;
    r.results["expected_social_cost"] = expected_social_cost(game, opt.outcome);
    r.results["obedience_violation"] = check.violation;
    r.results["pivots"] = opt.pivots;
    r.results["outcome"] = io::outcome_to_json(opt.outcome, game);
    maybe_write(o, io::outcome_to_json(opt.outcome, game));
  } catch (const InfeasibleError& e) {
    r.certified = false;
    r.results["infeasible"] = {{"residual", e.residual()}, {"certificate", vector_json(e.certificate())}};
  }
  return r;
}

Outcome run_bcwe_verify(const Options& o, Inputs& inputs) {
  const CongestionGame game = io::parse_game(inputs.load("game", o.game));
  const std::string path = o.outcome.empty() ? o.bcwe : o.outcome;
  if (path.empty()) throw Error(ErrorCode::kSchema, "bcwe-verify needs --outcome (or --bcwe)", "--outcome");
  const FiniteOutcome outcome = io::parse_outcome(inputs.load("outcome", path), game);
  const ObedienceReport check = verify_bcwe(game, outcome, o.tol);
  Outcome r;
  r.certified = check.certified;
  r.tolerances = {{"tol", o.tol}};
  const auto labels = game.action_labels();
  r.results = {{"violation", check.violation},
               {"certified", check.certified},
               {"lhs", labeled_matrix(check.lhs, labels)},
               {"rhs", labeled_matrix(check.rhs, labels)},
               {"slack", labeled_matrix(check.slack, labels)},
               {"expected_social_cost", expected_social_cost(game, outcome)}};
  return r;
}

Outcome run_design(const Options& o, Inputs& inputs) {
  const CongestionGame game = io::parse_game(inputs.load("game", o.game));
  const FiniteOutcome bcwe = io::parse_outcome(inputs.load("bcwe", o.bcwe), game);
  const RationalApproximation approx = rational_approximation(bcwe.support(), o.eta);
  const InformationStructure structure = build_direct_structure(game, bcwe, approx);
  const AuxiliaryGame aux(game, structure);
  const InterimCostReport report = verify_eps_bwe(aux, obedient_profile(structure, game.action_labels()));
  const LipschitzEstimate lip = estimate_modulus(game, o.samples, o.seed);

  Outcome r;
  r.tolerances = {{"eta", o.eta}, {"tol", o.tol}};
  Json counts = Json::array();
  for (std::size_t i = 0; i < approx.flows.size(); ++i) {
    counts.push_back({{"flow", vector_json(approx.flows[i])}, {"counts", approx.counts[i]}});
  }
  r.results = {{"K", approx.K},
               {"eta_achieved", approx.eta_achieved},
               {"approximation", std::move(counts)},
               {"population_types", aux.num_population_types()},
               {"weighted_profiles", aux.num_weighted_profiles()},
               {"obedience_epsilon", report.epsilon},
               {"lipschitz", {{"L", lip.L}, {"samples", lip.sample_count}}}};
  double allowed = o.tol;
  try {
    const double bound = epsilon_bound(approx, bcwe, lip);
    r.results["epsilon_bound"] = bound;
    allowed += bound;
  } catch (const Error& e) {
    r.results["epsilon_bound"] = nullptr;
    r.results["epsilon_bound_error"] = e.message();
  }
  r.certified = report.epsilon <= allowed;
  const Json doc = io::structure_to_json(structure);
  r.results["structure"] = doc;
  maybe_write(o, doc);
  return r;
}

Outcome run_bwe_solve(const Options& o, Inputs& inputs) {
  const CongestionGame game = io::parse_game(inputs.load("game", o.game));
  const InformationStructure structure = io::parse_structure(inputs.load("structure", o.structure));
  const AuxiliaryGame aux(game, structure);
  Outcome r;
  r.tolerances = {{"gap", o.gap}};
  try {
    const BweSolution sol = solve_bwe(aux, descent_config(o));
    const InterimCostReport report = verify_eps_bwe(aux, sol.profile);
    const TotalCostReport tc = total_cost(aux, sol.profile);
    r.results = {{"iterations", sol.iterations},
                 {"gap", sol.gaps.gap()},
                 {"epsilon", report.epsilon},
                 {"unnormalized_epsilon", report.unnormalized_epsilon},
                 {"total_cost", tc.total_cost},
                 {"expected_social_cost", tc.expected_social_cost},
                 {"outcome", io::outcome_to_json(project_outcome(aux, sol.profile), game)}};
    const Json doc = io::profile_to_json(sol.profile, structure);
    r.results["profile"] = doc;
    maybe_write(o, doc);
  } catch (const ConvergenceError& e) {
    r.certified = false;
    r.results = {{"converged", false}, {"best_gap", e.best_gap()}};
  }
  return r;
}

Outcome run_bwe_verify(const Options& o, Inputs& inputs) {
  const CongestionGame game = io::parse_game(inputs.load("game", o.game));
  const InformationStructure structure = io::parse_structure(inputs.load("structure", o.structure));
  const AuxiliaryGame aux(game, structure);
  const InterimFlowProfile profile =
      o.profile.empty() ? obedient_profile(structure, game.action_labels())
                        : io::parse_profile(inputs.load("profile", o.profile), structure, game.num_actions());
  const InterimCostReport report = verify_eps_bwe(aux, profile);
  const TotalCostReport tc = total_cost(aux, profile);
  Outcome r;
  r.certified = report.certified(o.tol);
  r.tolerances = {{"tol", o.tol}};
  r.results = interim_report_json(report, structure, game.action_labels());
  r.results["profile_source"] = o.profile.empty() ? "obedient" : "file";
  r.results["certified"] = r.certified;
  r.results["total_cost"] = tc.total_cost;
  r.results["expected_social_cost"] = tc.expected_social_cost;
  r.results["outcome"] = io::outcome_to_json(project_outcome(aux, profile), game);
  return r;
}

Outcome run_full_check(const Options& o, Inputs& inputs) {
  const CongestionGame game = io::parse_game(inputs.load("game", o.game));
  const FiniteOutcome bcwe = io::parse_outcome(inputs.load("bcwe", o.bcwe), game);
  FullCheckConfig config;
  config.eta = o.eta;
  config.runs = o.runs;
  config.seed = o.seed;
  config.tol_cost = o.tol;
  config.descent = descent_config(o);
  const FullImplementationCertificate cert = full_check(game, bcwe, config);
  Outcome r;
  r.tolerances = {{"eta", config.eta},
                  {"tol_cost", config.tol_cost},
                  {"tol_outcome", config.tol_outcome},
                  {"tol_bcwe", config.tol_bcwe},
                  {"gap", config.descent.target_gap}};
  r.certified = cert.verdict == Verdict::kUniqueOutcome || cert.verdict == Verdict::kUniqueSocialCost;
  r.results = io::certificate_to_json(cert, game);
  maybe_write(o, r.results);
  return r;
}

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::kConvergence:
    case ErrorCode::kInfeasible:
      return 2;
    default:
      return 1;
  }
}

void configure_logging(std::ostream& err) {
  auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
  auto logger = std::make_shared<spdlog::logger>("bcwe", sink);
  const char* env = std::getenv("WARDROP_LOG");
  const std::string_view level = env ? env : "quiet";
  if (level == "debug") {
    logger->set_level(spdlog::level::debug);
  } else if (level == "info") {
    logger->set_level(spdlog::level::info);
  } else {
    logger->set_level(spdlog::level::off);
  }
  spdlog::set_default_logger(logger);
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  configure_logging(err);
  CLI::App app{"Bayes correlated Wardrop equilibria: compute, verify, implement", "bcwe"};
  app.require_subcommand(1);
  Options o;

  struct Command {
    const char* name;
    const char* help;
    Outcome (*run)(const Options&, Inputs&);
  };
  const Command commands[] = {
      {"wardrop", "Wardrop equilibrium of every state and of the average game", run_wardrop},
      {"bcwe-opt", "Optimize a designer objective over grid-supported BCWE", run_bcwe_opt},
      {"bcwe-verify", "Check obedience of an outcome", run_bcwe_verify},
      {"design", "Build the direct information structure implementing a BCWE", run_design},
      {"bwe-solve", "Solve for a Bayesian Wardrop equilibrium under a structure", run_bwe_solve},
      {"bwe-verify", "Check the epsilon of an interim profile (default: obedient)", run_bwe_verify},
      {"full-check", "Certify full implementation by multi-start solving", run_full_check},
  };
  std::vector<std::pair<CLI::App*, const Command*>> subs;
  for (const auto& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("--game", o.game, "Game document")->required();
    sub->add_option("--out", o.out, "Write the main artifact to this file");
    sub->add_option("--seed", o.seed, "Master seed")->capture_default_str();
    const std::string_view name = c.name;
    if (name == "bcwe-verify") {
      sub->add_option("--outcome", o.outcome, "Outcome document");
      sub->add_option("--bcwe", o.bcwe, "Alias of --outcome");
    }
    if (name == "design" || name == "full-check") sub->add_option("--bcwe", o.bcwe, "BCWE outcome document")->required();
    if (name == "design" || name == "full-check") sub->add_option("--eta", o.eta, "Rational approximation tolerance")->capture_default_str();
    if (name == "design") sub->add_option("--samples", o.samples, "Sample pairs for the modulus estimate")->capture_default_str();
    if (name == "bcwe-opt") {
      sub->add_option("--objective", o.objective, "social_cost or neg_social_cost")->capture_default_str();
      sub->add_option("--denominator", o.denominator, "Grid denominator D")->capture_default_str();
    }
    if (name == "bwe-solve" || name == "bwe-verify") sub->add_option("--structure", o.structure, "Structure document")->required();
    if (name == "bwe-verify") sub->add_option("--profile", o.profile, "Interim profile document");
    if (name == "wardrop" || name == "bwe-solve" || name == "full-check") {
      sub->add_option("--gap", o.gap, "Target equilibrium gap")->capture_default_str();
      sub->add_option("--max-iters", o.max_iters, "Iteration cap")->capture_default_str();
    }
    if (name == "full-check") sub->add_option("--runs", o.runs, "Solver runs")->capture_default_str();
    if (name != "bcwe-opt" && name != "bwe-solve") sub->add_option("--tol", o.tol, "Verification tolerance")->capture_default_str();
    subs.emplace_back(sub, &c);
  }
  if (args.empty()) {
    err << app.help();
    return 1;
  }

  std::vector<const char*> argv{"bcwe"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n" << app.help();
    return 1;
  }

  for (const auto& [sub, command] : subs) {
    if (!sub->parsed()) continue;
    Inputs inputs;
    const auto start = std::chrono::steady_clock::now();
    try {
      Outcome result = command->run(o, inputs);
      const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      const Json report{{"command", command->name},
                        {"status", result.certified ? "certified" : "verification_failed"},
                        {"inputs", inputs.digests()},
                        {"seed", o.seed},
                        {"tolerances", std::move(result.tolerances)},
                        {"results", std::move(result.results)},
                        {"timing", {{"wall_seconds", seconds}}}};
      out << report.dump(2) << '\n';
      return result.certified ? 0 : 2;
    } catch (const Error& e) {
      err << "error: " << e.what() << '\n';
      const Json report{{"command", command->name},
                        {"status", "error"},
                        {"inputs", inputs.digests()},
                        {"error", {{"code", std::string(code_name(e.code()))}, {"path", e.path()}, {"message", e.message()}}}};
      out << report.dump(2) << '\n';
      return exit_code(e.code());
    }
  }
  err << app.help();
  return 1;
}

}  // namespace bcwe::cli
