#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "aamcbr/aa_engine.hpp"
#include "aamcbr/core_model.hpp"

namespace aamcbr {

enum class NodeRole { Default, PreviousCase, NewCase };

/// Where an argument of a case-based framework came from.
struct NodeOrigin {
    NodeRole role = NodeRole::PreviousCase;
    FactorSet factors;
    /// Unset for the new case.
    std::optional<Outcome> outcome;
};

struct CbrFramework {
    AAFramework framework;
    std::map<ArgumentId, NodeOrigin> node_map;
    ArgumentId default_id;
    ArgumentId new_case_id;
};

struct CbrVerdict {
    Outcome outcome = Outcome::Zero;
    Outcome default_outcome = Outcome::Zero;
    bool default_in_grounded = false;
    GroundedExtension grounded;
};

/// Stable argument ids: "default", "new", and "case:{ids}:o" for previous cases.
ArgumentId default_node_id();
ArgumentId new_case_node_id();
ArgumentId case_node_id(const Case& c);

/// Attack between two members of the case base or the default argument
/// (which participates as a case with no factors). The concision witness
/// ranges over the case base only.
bool case_attacks(const Case& attacker, const Case& target, const CaseBase& case_base);

/// True when the new case attacks `previous`, i.e. previous is not covered by it.
bool is_irrelevant(const Case& previous, const NewCase& new_case);

CbrFramework build_framework(const CaseBase& case_base, Outcome default_outcome,
                             const NewCase& new_case);

CbrVerdict aacbr_outcome(const CaseBase& case_base, Outcome default_outcome,
                         const NewCase& new_case);

/// Verdict from an already built framework.
CbrVerdict evaluate(const CbrFramework& framework, Outcome default_outcome);

/// Keeps only the cases whose factors are covered by the new case.
CaseBase relevant_cases(const CaseBase& case_base, const NewCase& new_case);

struct DisputeNode {
    ArgumentId id;
    std::string label;
    /// Proponent nodes sit at even depth (the root), opponent nodes at odd depth.
    bool proponent = true;
    bool winning = false;
    /// Layer of the grounded construction at which the node was accepted, or -1.
    int accepted_at_layer = -1;
    /// Winning children, i.e. the arguments that defeat this node.
    std::vector<ArgumentId> defeated_by;
    bool truncated = false;
    std::vector<DisputeNode> children;
};

struct DisputeTree {
    DisputeNode root;
    CbrVerdict verdict;
};

/// Alternating proponent/opponent tree rooted at the default argument; the
/// children of a node are its attackers. Depth is capped at |case base|+1.
DisputeTree dispute_tree(const CaseBase& case_base, Outcome default_outcome,
                         const NewCase& new_case);

std::string render_text(const DisputeTree& tree);
nlohmann::json to_json(const DisputeNode& node);

/// `{"outcome":"0|1","default":"0|1","default_in_grounded":bool,"grounded":[...]}`
nlohmann::json to_json(const CbrVerdict& verdict);

std::string to_dot(const CbrFramework& framework, const CbrVerdict& verdict);

} // namespace aamcbr
