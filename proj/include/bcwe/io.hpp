#pragma once

#include <string>

#include "json.hpp"

#include "bcwe/full_impl.hpp"
#include "bcwe/game.hpp"
#include "bcwe/info_design.hpp"
#include "bcwe/structure.hpp"

namespace bcwe::io {

/// Key order is preserved so state and action orders survive round trips.
using Json = nlohmann::ordered_json;

/// Reads and parses a JSON file; SCHEMA error naming the file on failure.
Json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const Json& doc);

/// Game document:
///   {"states": [...], "prior": [...], "resources": [...],
///    "actions": [["e1", "e2"], ...], "action_labels": [...] (optional),
///    "costs": {"e1": {"s1": {"breakpoints": [0, 1], "pieces": [[c0, c1]]}}}}
/// Action labels default to the resource names joined by '+'.
CongestionGame parse_game(const Json& doc);
Json game_to_json(const CongestionGame& game);

/// {"per_state": {"s1": [{"flow": [...], "prob": p}, ...]}}, states by label.
FiniteOutcome parse_outcome(const Json& doc, const CongestionGame& game);
Json outcome_to_json(const FiniteOutcome& outcome, const CongestionGame& game);

/// Explicit or rotation-symmetric structure document. Rotation documents
/// carry {"encoding": {"rotation_symmetric": {"K": K, "per_state":
/// {"s1": [{"counts": [...], "flow": [...], "prob": p}]}}}}; their explicit
/// signal law is written alongside when small and ignored on input.
InformationStructure parse_structure(const Json& doc);
Json structure_to_json(const InformationStructure& structure);

/// {"profiles": {"k:type": [flow entries]}} with k the 0-based population.
InterimFlowProfile parse_profile(const Json& doc, const InformationStructure& structure, std::size_t num_actions);
Json profile_to_json(const InterimFlowProfile& profile, const InformationStructure& structure);

Json certificate_to_json(const FullImplementationCertificate& cert, const CongestionGame& game);

/// Lower-case hex SHA-256 of a byte string.
std::string sha256_hex(const std::string& bytes);

}  // namespace bcwe::io
