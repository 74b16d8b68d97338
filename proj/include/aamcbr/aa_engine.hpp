#pragma once

#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace aamcbr {

using ArgumentId = std::string;

struct Argument {
    ArgumentId id;
    std::string label;

    bool operator==(const Argument&) const = default;
};

using Attack = std::pair<ArgumentId, ArgumentId>;

class UnknownArgument : public std::out_of_range {
public:
    explicit UnknownArgument(const ArgumentId& id)
        : std::out_of_range("unknown argument '" + id + "'"), id_(id)
    {
    }

    const ArgumentId& id() const noexcept { return id_; }

private:
    ArgumentId id_;
};

class DuplicateArgument : public std::invalid_argument {
public:
    explicit DuplicateArgument(const ArgumentId& id)
        : std::invalid_argument("duplicate argument '" + id + "'")
    {
    }
};

/// A Dung-style abstract argumentation framework. Arguments keep insertion
/// order; attacks form a set. Self-attacks are allowed.
class AAFramework {
public:
    void add_argument(Argument arg);
    void add_argument(ArgumentId id) { add_argument(Argument{id, id}); }

    /// Both endpoints must already exist. Re-adding an edge is a no-op.
    void add_attack(const ArgumentId& attacker, const ArgumentId& target);

    const std::vector<Argument>& arguments() const noexcept { return arguments_; }
    const std::set<Attack>& attacks() const noexcept { return attacks_; }

    bool contains(const ArgumentId& id) const;
    bool attacks(const ArgumentId& attacker, const ArgumentId& target) const;
    const Argument& argument(const ArgumentId& id) const;
    std::size_t index_of(const ArgumentId& id) const;

    /// Attackers of `target`, sorted by id.
    std::vector<ArgumentId> attackers_of(const ArgumentId& target) const;

private:
    std::vector<Argument> arguments_;
    std::set<Attack> attacks_;
};

struct GroundedExtension {
    std::set<ArgumentId> members;

    /// G_0, G_1, ... up to the fixpoint; each layer contains the previous one.
    std::vector<std::set<ArgumentId>> layers;

    bool contains(const ArgumentId& id) const { return members.contains(id); }

    /// Index of the first layer containing `id`, or -1 when not a member.
    int layer_of(const ArgumentId& id) const;
};

/// Least fixpoint of the characteristic function, starting from the
/// unattacked arguments.
GroundedExtension grounded(const AAFramework& framework);

bool is_in_grounded(const AAFramework& framework, const ArgumentId& arg);

/// `{"arguments":[...],"attacks":[["a","b"],...],"grounded":[...]}`
nlohmann::json to_json(const AAFramework& framework, const GroundedExtension& ext);

/// Graphviz rendering; grounded members are drawn filled.
std::string to_dot(const AAFramework& framework, const GroundedExtension& ext,
                   const std::string& graph_name = "aa");

} // namespace aamcbr
