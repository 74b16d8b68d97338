#include "aamcbr/aa_engine.hpp"

#include <algorithm>
#include <sstream>

namespace aamcbr {

void AAFramework::add_argument(Argument arg)
{
    if (contains(arg.id))
        throw DuplicateArgument(arg.id);
    arguments_.push_back(std::move(arg));
}

void AAFramework::add_attack(const ArgumentId& attacker, const ArgumentId& target)
{
    if (!contains(attacker))
        throw UnknownArgument(attacker);
    if (!contains(target))
        throw UnknownArgument(target);
    attacks_.emplace(attacker, target);
}

bool AAFramework::contains(const ArgumentId& id) const
{
    return std::any_of(arguments_.begin(), arguments_.end(),
                       [&](const Argument& a) { return a.id == id; });
}

bool AAFramework::attacks(const ArgumentId& attacker, const ArgumentId& target) const
{
    return attacks_.contains({attacker, target});
}

const Argument& AAFramework::argument(const ArgumentId& id) const
{
    return arguments_[index_of(id)];
}

std::size_t AAFramework::index_of(const ArgumentId& id) const
{
    for (std::size_t i = 0; i < arguments_.size(); ++i)
        if (arguments_[i].id == id)
            return i;
    throw UnknownArgument(id);
}

std::vector<ArgumentId> AAFramework::attackers_of(const ArgumentId& target) const
{
    std::vector<ArgumentId> out;
    for (const auto& [from, to] : attacks_)
        if (to == target)
            out.push_back(from);
    std::sort(out.begin(), out.end());
    return out;
}

int GroundedExtension::layer_of(const ArgumentId& id) const
{
    for (std::size_t i = 0; i < layers.size(); ++i)
        if (layers[i].contains(id))
            return static_cast<int>(i);
    return -1;
}

GroundedExtension grounded(const AAFramework& framework)
{
    const auto& args = framework.arguments();
    const std::size_t n = args.size();

    std::vector<std::vector<std::size_t>> attackers(n);
    for (const auto& [from, to] : framework.attacks())
        attackers[framework.index_of(to)].push_back(framework.index_of(from));

    // defended(S): every attacker of x is attacked by some member of S.
    auto characteristic = [&](const std::vector<bool>& in) {
        std::vector<bool> attacked_by_in(n, false);
        for (const auto& [from, to] : framework.attacks())
            if (in[framework.index_of(from)])
                attacked_by_in[framework.index_of(to)] = true;
        std::vector<bool> out(n, false);
        for (std::size_t x = 0; x < n; ++x)
            out[x] = std::all_of(attackers[x].begin(), attackers[x].end(),
                                 [&](std::size_t y) { return attacked_by_in[y]; });
        return out;
    };

    auto to_ids = [&](const std::vector<bool>& in) {
        std::set<ArgumentId> ids;
        for (std::size_t i = 0; i < n; ++i)
            if (in[i])
                ids.insert(args[i].id);
        return ids;
    };

    GroundedExtension ext;
    // G_0 = F(empty set) = unattacked arguments.
    std::vector<bool> current = characteristic(std::vector<bool>(n, false));
    ext.layers.push_back(to_ids(current));
    for (;;) {
        auto next = characteristic(current);
        if (next == current)
            break;
        current = std::move(next);
        ext.layers.push_back(to_ids(current));
    }
    ext.members = ext.layers.back();
    return ext;
}

bool is_in_grounded(const AAFramework& framework, const ArgumentId& arg)
{
    if (!framework.contains(arg))
        throw UnknownArgument(arg);
    return grounded(framework).contains(arg);
}

nlohmann::json to_json(const AAFramework& framework, const GroundedExtension& ext)
{
    nlohmann::json args = nlohmann::json::array();
    for (const auto& a : framework.arguments())
        args.push_back(a.id);
    nlohmann::json attacks = nlohmann::json::array();
    for (const auto& [from, to] : framework.attacks())
        attacks.push_back({from, to});
    return {{"arguments", std::move(args)},
            {"attacks", std::move(attacks)},
            {"grounded", std::vector<std::string>(ext.members.begin(), ext.members.end())}};
}

namespace {

std::string dot_escape(const std::string& s)
{
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\')
            out += '\\';
        out += c;
    }
    return out;
}

} // namespace

std::string to_dot(const AAFramework& framework, const GroundedExtension& ext,
                   const std::string& graph_name)
{
    std::ostringstream os;
    os << "digraph \"" << dot_escape(graph_name) << "\" {\n";
    os << "  node [shape=box];\n";
    for (const auto& a : framework.arguments()) {
        os << "  \"" << dot_escape(a.id) << "\" [label=\"" << dot_escape(a.label) << "\"";
        if (ext.contains(a.id))
            os << ", style=filled, fillcolor=lightgrey";
        os << "];\n";
    }
    for (const auto& [from, to] : framework.attacks())
        os << "  \"" << dot_escape(from) << "\" -> \"" << dot_escape(to) << "\";\n";
    os << "}\n";
    return os.str();
}

} // namespace aamcbr
