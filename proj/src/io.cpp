#include "bcwe/io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>
#include <utility>

#include "bcwe/errors.hpp"

namespace bcwe::io {

namespace {

const Json& field(const Json& doc, const char* key, const std::string& path) {
  if (!doc.is_object()) throw Error(ErrorCode::kSchema, "expected an object", path);
  const auto it = doc.find(key);
  if (it == doc.end()) {
    throw Error(ErrorCode::kSchema, std::string("missing field '") + key + "'", path.empty() ? key : path + "." + key);
  }
  return *it;
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }
std::string at(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

double number(const Json& j, const std::string& path) {
  if (!j.is_number()) throw Error(ErrorCode::kSchema, "expected a number", path);
  return j.get<double>();
}

std::string text(const Json& j, const std::string& path) {
  if (!j.is_string()) throw Error(ErrorCode::kSchema, "expected a string", path);
  return j.get<std::string>();
}

const Json& array(const Json& j, const std::string& path) {
  if (!j.is_array()) throw Error(ErrorCode::kSchema, "expected an array", path);
  return j;
}

const Json& object(const Json& j, const std::string& path) {
  if (!j.is_object()) throw Error(ErrorCode::kSchema, "expected an object", path);
  return j;
}

std::vector<std::string> strings(const Json& j, const std::string& path) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < array(j, path).size(); ++i) out.push_back(text(j[i], at(path, i)));
  return out;
}

Eigen::VectorXd vector(const Json& j, const std::string& path) {
  array(j, path);
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = number(j[i], at(path, i));
  return v;
}

Json to_json(const Eigen::VectorXd& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

// Re-raises construction errors with the document location prepended.
template <typename F>
auto located(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    if (!e.path().empty() && e.path() != path) throw Error(e.code(), e.message(), join(path, e.path()));
    throw Error(e.code(), e.message(), path);
  }
}

CostCurve parse_curve(const Json& j, const std::string& path) {
  object(j, path);
  const Json& pieces_json = array(field(j, "pieces", path), join(path, "pieces"));
  std::vector<double> breakpoints;
  if (j.contains("breakpoints")) {
    for (std::size_t i = 0; i < array(j["breakpoints"], join(path, "breakpoints")).size(); ++i) {
      breakpoints.push_back(number(j["breakpoints"][i], at(join(path, "breakpoints"), i)));
    }
  } else {
    breakpoints = {0.0, 1.0};
  }
  std::vector<Polynomial<double>> pieces;
  for (std::size_t i = 0; i < pieces_json.size(); ++i) {
    const std::string p = at(join(path, "pieces"), i);
    Eigen::VectorXd coef = vector(pieces_json[i], p);
    if (coef.size() == 0) throw Error(ErrorCode::kSchema, "piece has no coefficients", p);
    pieces.emplace_back(std::move(coef));
  }
  return located(path, [&] { return CostCurve(std::move(breakpoints), std::move(pieces)); });
}

Json curve_to_json(const CostCurve& curve) {
  Json pieces = Json::array();
  for (const auto& p : curve.pieces()) pieces.push_back(to_json(p.coefficients()));
  return Json{{"breakpoints", curve.breakpoints()}, {"pieces", std::move(pieces)}};
}

std::size_t state_of(const CongestionGame& game, const std::string& label, const std::string& path) {
  return located(path, [&] { return game.state_index(label); });
}

}  // namespace

Json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kSchema, "cannot open file", path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::kSchema, std::string("invalid JSON: ") + e.what(), path);
  }
}

void write_json_file(const std::string& path, const Json& doc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kSchema, "cannot write file", path);
  out << doc.dump(2) << '\n';
}

CongestionGame parse_game(const Json& doc) {
  object(doc, "");
  std::vector<std::string> states = strings(field(doc, "states", ""), "states");
  const Eigen::VectorXd prior = vector(field(doc, "prior", ""), "prior");
  std::vector<std::string> resources = strings(field(doc, "resources", ""), "resources");
  const Json& actions_json = array(field(doc, "actions", ""), "actions");
  std::vector<std::string> labels;
  if (doc.contains("action_labels")) {
    labels = strings(doc["action_labels"], "action_labels");
    if (labels.size() != actions_json.size()) {
      throw Error(ErrorCode::kSchema, "one label per action required", "action_labels");
    }
  }
  std::vector<Action> actions;
  for (std::size_t a = 0; a < actions_json.size(); ++a) {
    const std::string path = at("actions", a);
    Action act;
    std::string joined;
    for (const auto& name : strings(actions_json[a], path)) {
      const auto it = std::find(resources.begin(), resources.end(), name);
      if (it == resources.end()) throw Error(ErrorCode::kLookup, "unknown resource '" + name + "'", path);
      act.resources.push_back(static_cast<std::size_t>(it - resources.begin()));
      joined += (joined.empty() ? "" : "+") + name;
    }
    act.label = labels.empty() ? joined : labels[a];
    actions.push_back(std::move(act));
  }
  const Json& costs = object(field(doc, "costs", ""), "costs");
  std::vector<std::vector<CostCurve>> curves;
  for (const auto& e : resources) {
    const std::string rpath = join("costs", e);
    if (!costs.contains(e)) throw Error(ErrorCode::kSchema, "missing cost curves for resource", rpath);
    const Json& per_state = object(costs[e], rpath);
    auto& row = curves.emplace_back();
    for (const auto& s : states) {
      const std::string spath = join(rpath, s);
      if (!per_state.contains(s)) throw Error(ErrorCode::kSchema, "missing cost curve for state", spath);
      row.push_back(parse_curve(per_state[s], spath));
    }
  }
  return CongestionGame(std::move(states), prior, std::move(resources), std::move(actions), std::move(curves));
}

Json game_to_json(const CongestionGame& game) {
  Json actions = Json::array();
  Json labels = Json::array();
  for (const auto& a : game.actions()) {
    Json members = Json::array();
    for (std::size_t e : a.resources) members.push_back(game.resources()[e]);
    actions.push_back(std::move(members));
    labels.push_back(a.label);
  }
  Json costs = Json::object();
  for (std::size_t e = 0; e < game.num_resources(); ++e) {
    Json per_state = Json::object();
    for (std::size_t s = 0; s < game.num_states(); ++s) per_state[game.states()[s]] = curve_to_json(game.curve(e, s));
    costs[game.resources()[e]] = std::move(per_state);
  }
  return Json{{"states", game.states()},
              {"prior", to_json(game.prior())},
              {"resources", game.resources()},
              {"actions", std::move(actions)},
              {"action_labels", std::move(labels)},
              {"costs", std::move(costs)}};
}

FiniteOutcome parse_outcome(const Json& doc, const CongestionGame& game) {
  const Json& per_state_json = object(field(doc, "per_state", ""), "per_state");
  std::vector<std::vector<OutcomeAtom>> per_state(game.num_states());
  std::vector<bool> seen(game.num_states(), false);
  for (const auto& [label, atoms] : per_state_json.items()) {
    const std::string spath = join("per_state", label);
    const std::size_t s = state_of(game, label, spath);
    seen[s] = true;
    for (std::size_t i = 0; i < array(atoms, spath).size(); ++i) {
      const std::string apath = at(spath, i);
      Eigen::VectorXd flow = vector(field(atoms[i], "flow", apath), join(apath, "flow"));
      if (flow.size() != static_cast<Eigen::Index>(game.num_actions())) {
        throw Error(ErrorCode::kSchema, "flow length differs from number of actions", join(apath, "flow"));
      }
      const double prob = number(field(atoms[i], "prob", apath), join(apath, "prob"));
      per_state[s].push_back(
          {located(join(apath, "flow"), [&] { return FlowProfile(std::move(flow)); }), prob});
    }
  }
  for (std::size_t s = 0; s < seen.size(); ++s) {
    if (!seen[s]) throw Error(ErrorCode::kSchema, "missing state", join("per_state", game.states()[s]));
  }
  return located("per_state", [&] { return FiniteOutcome(std::move(per_state)); });
}

Json outcome_to_json(const FiniteOutcome& outcome, const CongestionGame& game) {
  Json per_state = Json::object();
  for (std::size_t s = 0; s < outcome.num_states(); ++s) {
    Json atoms = Json::array();
    for (const auto& atom : outcome.atoms(s)) atoms.push_back({{"flow", to_json(atom.flow.entries())}, {"prob", atom.prob}});
    per_state[game.states().at(s)] = std::move(atoms);
  }
  return Json{{"per_state", std::move(per_state)}};
}

InformationStructure parse_structure(const Json& doc) {
  object(doc, "");
  const Json& encoding = doc.contains("encoding") ? doc["encoding"] : Json("explicit");
  if (encoding.is_object()) {
    const std::string rpath = "encoding.rotation_symmetric";
    const Json& rot = object(field(encoding, "rotation_symmetric", "encoding"), rpath);
    const double k_value = number(field(rot, "K", rpath), join(rpath, "K"));
    if (k_value < 1 || k_value != static_cast<int>(k_value)) {
      throw Error(ErrorCode::kSchema, "K must be a positive integer", join(rpath, "K"));
    }
    const int K = static_cast<int>(k_value);
    const auto type_sets = field(doc, "type_sets", "");
    if (array(type_sets, "type_sets").empty()) throw Error(ErrorCode::kSchema, "no type sets", "type_sets");
    std::vector<std::string> actions = strings(type_sets[0], "type_sets[0]");
    std::vector<std::string> states;
    std::vector<std::vector<InformationStructure::RotationAtom>> per_state;
    const std::string ppath = join(rpath, "per_state");
    for (const auto& [label, atoms] : object(field(rot, "per_state", rpath), ppath).items()) {
      states.push_back(label);
      auto& list = per_state.emplace_back();
      const std::string spath = join(ppath, label);
      for (std::size_t i = 0; i < array(atoms, spath).size(); ++i) {
        const std::string apath = at(spath, i);
        InformationStructure::RotationAtom atom;
        if (atoms[i].contains("counts")) {
          for (std::size_t a = 0; a < array(atoms[i]["counts"], join(apath, "counts")).size(); ++a) {
            const double c = number(atoms[i]["counts"][a], at(join(apath, "counts"), a));
            if (c != static_cast<int>(c)) throw Error(ErrorCode::kSchema, "counts must be integers", join(apath, "counts"));
            atom.counts.push_back(static_cast<int>(c));
          }
        } else {
          const Eigen::VectorXd flow = vector(field(atoms[i], "flow", apath), join(apath, "flow"));
          for (Eigen::Index a = 0; a < flow.size(); ++a) {
            const double c = flow(a) * K;
            if (std::abs(c - std::round(c)) > 1e-9) {
              throw Error(ErrorCode::kDomain, "flow is not a multiple of 1/K", join(apath, "flow"));
            }
            atom.counts.push_back(static_cast<int>(std::lround(c)));
          }
        }
        atom.prob = number(field(atoms[i], "prob", apath), join(apath, "prob"));
        list.push_back(std::move(atom));
      }
    }
    return located(rpath, [&] {
      return InformationStructure::rotation_symmetric(std::move(actions), std::move(states), K, std::move(per_state));
    });
  }
  if (text(encoding, "encoding") != "explicit") {
    throw Error(ErrorCode::kSchema, "encoding must be \"explicit\" or a rotation_symmetric object", "encoding");
  }
  std::vector<double> sizes;
  const Json& sizes_json = array(field(doc, "population_sizes", ""), "population_sizes");
  for (std::size_t k = 0; k < sizes_json.size(); ++k) sizes.push_back(number(sizes_json[k], at("population_sizes", k)));
  std::vector<std::vector<std::string>> type_sets;
  const Json& types_json = array(field(doc, "type_sets", ""), "type_sets");
  for (std::size_t k = 0; k < types_json.size(); ++k) type_sets.push_back(strings(types_json[k], at("type_sets", k)));
  std::vector<std::string> states;
  std::vector<std::vector<InformationStructure::SignalAtom>> law;
  for (const auto& [label, atoms] : object(field(doc, "signal_law", ""), "signal_law").items()) {
    states.push_back(label);
    auto& list = law.emplace_back();
    const std::string spath = join("signal_law", label);
    for (std::size_t i = 0; i < array(atoms, spath).size(); ++i) {
      const std::string apath = at(spath, i);
      const auto profile = strings(field(atoms[i], "profile", apath), join(apath, "profile"));
      if (profile.size() != type_sets.size()) {
        throw Error(ErrorCode::kSchema, "profile needs one type per population", join(apath, "profile"));
      }
      InformationStructure::SignalAtom atom{{}, number(field(atoms[i], "prob", apath), join(apath, "prob"))};
      for (std::size_t k = 0; k < profile.size(); ++k) {
        const auto it = std::find(type_sets[k].begin(), type_sets[k].end(), profile[k]);
        if (it == type_sets[k].end()) {
          throw Error(ErrorCode::kDomain, "type '" + profile[k] + "' not in the type set of population " +
                                              std::to_string(k), at(join(apath, "profile"), k));
        }
        atom.profile.push_back(static_cast<std::size_t>(it - type_sets[k].begin()));
      }
      list.push_back(std::move(atom));
    }
  }
  return located("", [&] {
    return InformationStructure::explicit_law(std::move(sizes), std::move(type_sets), std::move(states), std::move(law));
  });
}

Json structure_to_json(const InformationStructure& structure) {
  Json doc{{"population_sizes", structure.population_sizes()}, {"type_sets", structure.type_sets()}};
  const auto& types = structure.type_sets();
  std::size_t entries = structure.profile_count_bound() * structure.num_populations();
  if (entries <= 100'000) {
    Json law = Json::object();
    for (std::size_t s = 0; s < structure.states().size(); ++s) {
      Json atoms = Json::array();
      for (const auto& atom : structure.signal_law(s)) {
        Json profile = Json::array();
        for (std::size_t k = 0; k < atom.profile.size(); ++k) profile.push_back(types[k][atom.profile[k]]);
        atoms.push_back({{"profile", std::move(profile)}, {"prob", atom.prob}});
      }
      law[structure.states()[s]] = std::move(atoms);
    }
    doc["signal_law"] = std::move(law);
  }
  if (!structure.rotation()) {
    doc["encoding"] = "explicit";
    return doc;
  }
  const auto& rot = *structure.rotation();
  Json per_state = Json::object();
  for (std::size_t s = 0; s < rot.per_state.size(); ++s) {
    Json atoms = Json::array();
    for (const auto& atom : rot.per_state[s]) {
      Json flow = Json::array();
      for (int c : atom.counts) flow.push_back(static_cast<double>(c) / rot.populations);
      atoms.push_back({{"counts", atom.counts}, {"flow", std::move(flow)}, {"prob", atom.prob}});
    }
    per_state[structure.states()[s]] = std::move(atoms);
  }
  doc["encoding"] = Json{{"rotation_symmetric", {{"K", rot.populations}, {"per_state", std::move(per_state)}}}};
  return doc;
}

InterimFlowProfile parse_profile(const Json& doc, const InformationStructure& structure, std::size_t num_actions) {
  const Json& profiles = object(field(doc, "profiles", ""), "profiles");
  const auto& types = structure.type_sets();
  InterimFlowProfile profile;
  std::vector<std::vector<bool>> seen;
  for (std::size_t k = 0; k < types.size(); ++k) {
    profile.flows.emplace_back(types[k].size(), Eigen::VectorXd());
    seen.emplace_back(types[k].size(), false);
  }
  for (const auto& [key, flow] : profiles.items()) {
    const std::string path = join("profiles", key);
    const auto colon = key.find(':');
    std::size_t k = 0;
    std::size_t used = 0;
    try {
      k = std::stoul(key.substr(0, colon), &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (colon == std::string::npos || used != colon || k >= types.size()) {
      throw Error(ErrorCode::kSchema, "key must be '<population>:<type>'", path);
    }
    const std::string type = key.substr(colon + 1);
    const auto it = std::find(types[k].begin(), types[k].end(), type);
    if (it == types[k].end()) throw Error(ErrorCode::kLookup, "unknown type '" + type + "'", path);
    const auto t = static_cast<std::size_t>(it - types[k].begin());
    Eigen::VectorXd v = vector(flow, path);
    if (v.size() != static_cast<Eigen::Index>(num_actions)) {
      throw Error(ErrorCode::kSchema, "flow length differs from number of actions", path);
    }
    located(path, [&] { return FlowProfile(v, structure.population_sizes()[k]); });
    profile.flows[k][t] = std::move(v);
    seen[k][t] = true;
  }
  for (std::size_t k = 0; k < types.size(); ++k) {
    for (std::size_t t = 0; t < types[k].size(); ++t) {
      if (!seen[k][t]) {
        throw Error(ErrorCode::kSchema, "missing population-type", join("profiles", std::to_string(k) + ":" + types[k][t]));
      }
    }
  }
  return profile;
}

Json profile_to_json(const InterimFlowProfile& profile, const InformationStructure& structure) {
  Json profiles = Json::object();
  for (std::size_t k = 0; k < profile.flows.size(); ++k) {
    for (std::size_t t = 0; t < profile.flows[k].size(); ++t) {
      profiles[std::to_string(k) + ":" + structure.type_sets()[k][t]] = to_json(profile.flows[k][t]);
    }
  }
  return Json{{"profiles", std::move(profiles)}};
}

Json certificate_to_json(const FullImplementationCertificate& cert, const CongestionGame& game) {
  Json runs = Json::array();
  for (const auto& r : cert.runs) {
    runs.push_back({{"seed", r.seed},
                    {"converged", r.converged},
                    {"iterations", r.iterations},
                    {"gap", r.gap},
                    {"expected_social_cost", r.expected_social_cost},
                    {"outcome_distance", r.outcome_distance},
                    {"state_residuals", r.state_residuals}});
  }
  Json residuals = Json::object();
  for (std::size_t s = 0; s < cert.state_residuals.size(); ++s) residuals[game.states()[s]] = cert.state_residuals[s];
  return Json{{"verdict", std::string(to_string(cert.verdict))},
              {"convexity", std::string(to_string(cert.convexity))},
              {"K", cert.K},
              {"eta_achieved", cert.eta_achieved},
              {"obedience_epsilon", cert.obedience_epsilon},
              {"bcwe_social_cost", cert.bcwe_social_cost},
              {"obedient_social_cost", cert.obedient_social_cost},
              {"expected_cost_gap", cert.expected_cost_gap},
              {"max_outcome_distance", cert.max_outcome_distance},
              {"state_residuals", std::move(residuals)},
              {"runs", std::move(runs)}};
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::kInternal, "SHA-256 computation failed");
  }
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

}  // namespace bcwe::io
