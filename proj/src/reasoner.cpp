#include "aamcbr/reasoner.hpp"

#include <algorithm>
#include <sstream>

namespace aamcbr {

ArgumentId default_node_id()
{
    return "default";
}

ArgumentId new_case_node_id()
{
    return "new";
}

ArgumentId case_node_id(const Case& c)
{
    return "case:" + to_string(c.factors) + ":" + to_string(c.outcome);
}

bool case_attacks(const Case& attacker, const Case& target, const CaseBase& case_base)
{
    if (attacker.outcome == target.outcome)
        return false;
    if (!is_strict_subset(target.factors, attacker.factors))
        return false;
    return std::none_of(case_base.begin(), case_base.end(), [&](const Case& z) {
        return z.outcome == attacker.outcome && is_strict_subset(target.factors, z.factors)
            && is_strict_subset(z.factors, attacker.factors);
    });
}

bool is_irrelevant(const Case& previous, const NewCase& new_case)
{
    return !is_subset(previous.factors, new_case.factors);
}

CaseBase relevant_cases(const CaseBase& case_base, const NewCase& new_case)
{
    std::vector<Case> kept;
    for (const auto& c : case_base)
        if (!is_irrelevant(c, new_case))
            kept.push_back(c);
    return check_consistency(kept);
}

CbrFramework build_framework(const CaseBase& case_base, Outcome default_outcome,
                             const NewCase& new_case)
{
    CbrFramework out;
    out.default_id = default_node_id();
    out.new_case_id = new_case_node_id();

    const Case default_case{{}, default_outcome};

    // Nodes that take part in case attacks: the default plus every previous
    // case. A previous case equal to (∅, default) is the default argument itself.
    std::vector<std::pair<ArgumentId, Case>> case_nodes;
    case_nodes.emplace_back(out.default_id, default_case);
    out.framework.add_argument({out.default_id, "default: " + to_string(default_case)});
    out.node_map[out.default_id] = {NodeRole::Default, {}, default_outcome};

    for (const auto& c : case_base) {
        if (c == default_case)
            continue;
        auto id = case_node_id(c);
        out.framework.add_argument({id, to_string(c)});
        out.node_map[id] = {NodeRole::PreviousCase, c.factors, c.outcome};
        case_nodes.emplace_back(std::move(id), c);
    }

    out.framework.add_argument({out.new_case_id, "(" + to_string(new_case.factors) + ",?)"});
    out.node_map[out.new_case_id] = {NodeRole::NewCase, new_case.factors, std::nullopt};

    for (const auto& [from_id, from] : case_nodes)
        for (const auto& [to_id, to] : case_nodes)
            if (case_attacks(from, to, case_base))
                out.framework.add_attack(from_id, to_id);

    for (const auto& [id, c] : case_nodes)
        if (id != out.default_id && is_irrelevant(c, new_case))
            out.framework.add_attack(out.new_case_id, id);

    return out;
}

CbrVerdict evaluate(const CbrFramework& framework, Outcome default_outcome)
{
    CbrVerdict v;
    v.default_outcome = default_outcome;
    v.grounded = grounded(framework.framework);
    v.default_in_grounded = v.grounded.contains(framework.default_id);
    v.outcome = v.default_in_grounded ? default_outcome : complement(default_outcome);
    return v;
}

CbrVerdict aacbr_outcome(const CaseBase& case_base, Outcome default_outcome,
                         const NewCase& new_case)
{
    return evaluate(build_framework(case_base, default_outcome, new_case), default_outcome);
}

namespace {

struct TreeBuilder {
    const AAFramework& framework;
    const GroundedExtension& ext;
    std::size_t max_depth;

    DisputeNode build(const ArgumentId& id, std::size_t depth, std::vector<ArgumentId>& path)
    {
        DisputeNode node;
        node.id = id;
        node.label = framework.argument(id).label;
        node.proponent = depth % 2 == 0;
        node.winning = ext.contains(id);
        node.accepted_at_layer = ext.layer_of(id);

        const auto attackers = framework.attackers_of(id);
        for (const auto& a : attackers)
            if (ext.contains(a))
                node.defeated_by.push_back(a);

        if (depth >= max_depth) {
            node.truncated = !attackers.empty();
            return node;
        }
        path.push_back(id);
        for (const auto& a : attackers) {
            if (std::find(path.begin(), path.end(), a) != path.end()) {
                node.truncated = true;
                continue;
            }
            node.children.push_back(build(a, depth + 1, path));
        }
        path.pop_back();
        return node;
    }
};

void render_node(std::ostringstream& os, const DisputeNode& node, const std::string& indent)
{
    os << indent << (node.proponent ? "[P] " : "[O] ") << node.label << "  "
       << (node.winning ? "WINS" : "LOSES");
    if (!node.defeated_by.empty()) {
        os << " (defeated by";
        for (const auto& d : node.defeated_by)
            os << ' ' << d;
        os << ')';
    }
    if (node.truncated)
        os << " ...";
    os << '\n';
    for (const auto& child : node.children)
        render_node(os, child, indent + "  ");
}

} // namespace

DisputeTree dispute_tree(const CaseBase& case_base, Outcome default_outcome,
                         const NewCase& new_case)
{
    const auto cbr = build_framework(case_base, default_outcome, new_case);
    DisputeTree tree;
    tree.verdict = evaluate(cbr, default_outcome);
    TreeBuilder builder{cbr.framework, tree.verdict.grounded, case_base.size() + 1};
    std::vector<ArgumentId> path;
    tree.root = builder.build(cbr.default_id, 0, path);
    return tree;
}

std::string render_text(const DisputeTree& tree)
{
    std::ostringstream os;
    render_node(os, tree.root, "");
    os << "outcome: " << to_string(tree.verdict.outcome) << '\n';
    return os.str();
}

nlohmann::json to_json(const DisputeNode& node)
{
    nlohmann::json children = nlohmann::json::array();
    for (const auto& c : node.children)
        children.push_back(to_json(c));
    return {{"id", node.id},
            {"label", node.label},
            {"role", node.proponent ? "proponent" : "opponent"},
            {"winning", node.winning},
            {"accepted_at_layer", node.accepted_at_layer},
            {"defeated_by", node.defeated_by},
            {"truncated", node.truncated},
            {"children", std::move(children)}};
}

nlohmann::json to_json(const CbrVerdict& verdict)
{
    return {{"outcome", to_string(verdict.outcome)},
            {"default", to_string(verdict.default_outcome)},
            {"default_in_grounded", verdict.default_in_grounded},
            {"grounded", std::vector<std::string>(verdict.grounded.members.begin(),
                                                  verdict.grounded.members.end())}};
}

std::string to_dot(const CbrFramework& framework, const CbrVerdict& verdict)
{
    return to_dot(framework.framework, verdict.grounded, "aacbr");
}

} // namespace aamcbr
