#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace aamcbr {

using FactorId = std::string;

/// A situation: an unordered set of factor ids.
using FactorSet = std::set<FactorId>;

enum class Polarity : std::uint8_t { Positive, Negative };

enum class Outcome : std::uint8_t { Zero = 0, One = 1 };

constexpr Outcome complement(Outcome o) noexcept
{
    return o == Outcome::Zero ? Outcome::One : Outcome::Zero;
}

std::string to_string(Outcome o);
Outcome parse_outcome(std::string_view text);

std::string to_string(Polarity p);
Polarity parse_polarity(std::string_view text);

/// Renders a factor set as "{a,b,c}" in sorted id order.
std::string to_string(const FactorSet& factors);

bool is_subset(const FactorSet& inner, const FactorSet& outer);
bool is_strict_subset(const FactorSet& inner, const FactorSet& outer);
FactorSet intersect(const FactorSet& a, const FactorSet& b);

struct Factor {
    FactorId id;
    std::string sentence;
    Polarity polarity = Polarity::Positive;

    bool operator==(const Factor&) const = default;
};

class DomainError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The universe of factors. Order is significant only for prompt rendering.
class FactorDomain {
public:
    explicit FactorDomain(std::vector<Factor> factors);

    /// The ten-factor credit card application domain.
    static FactorDomain credit();

    static FactorDomain from_json(const nlohmann::json& doc);
    static FactorDomain load(const std::filesystem::path& path);
    nlohmann::json to_json() const;

    const std::vector<Factor>& factors() const noexcept { return factors_; }
    std::size_t size() const noexcept { return factors_.size(); }

    bool contains(std::string_view id) const;
    const Factor& at(std::string_view id) const;
    std::optional<FactorId> id_for_sentence(std::string_view sentence) const;

    FactorSet all_ids() const;

    /// Sentences for the given ids, in domain order.
    std::vector<std::string> sentences(const FactorSet& ids) const;

    /// Ids of the given set, in domain order.
    std::vector<FactorId> ordered(const FactorSet& ids) const;

    /// Throws DomainError if any id is not part of this domain.
    void validate(const FactorSet& ids) const;

    FactorDomain with_flipped_polarity() const;

private:
    std::vector<Factor> factors_;
};

struct Case {
    FactorSet factors;
    Outcome outcome = Outcome::Zero;

    auto operator<=>(const Case&) const = default;
    bool operator==(const Case&) const = default;
};

std::string to_string(const Case& c);

struct NewCase {
    FactorSet factors;

    bool operator==(const NewCase&) const = default;
};

class ConsistencyViolation : public std::runtime_error {
public:
    explicit ConsistencyViolation(std::vector<FactorSet> conflicts);

    const std::vector<FactorSet>& conflicts() const noexcept { return conflicts_; }

private:
    std::vector<FactorSet> conflicts_;
};

/// An outcome-consistent, duplicate-free set of cases, kept in sorted order.
class CaseBase {
public:
    CaseBase() = default;

    const std::vector<Case>& cases() const noexcept { return cases_; }
    std::size_t size() const noexcept { return cases_.size(); }
    bool empty() const noexcept { return cases_.empty(); }

    auto begin() const noexcept { return cases_.begin(); }
    auto end() const noexcept { return cases_.end(); }

    bool contains(const Case& c) const;

    bool operator==(const CaseBase&) const = default;

private:
    friend CaseBase check_consistency(std::span<const Case> cases);
    explicit CaseBase(std::vector<Case> sorted) : cases_(std::move(sorted)) {}

    std::vector<Case> cases_;
};

/// Deduplicates cases and rejects any factor set that carries both outcomes.
CaseBase check_consistency(std::span<const Case> cases);

/// As above, additionally checking every factor against the domain.
CaseBase check_consistency(std::span<const Case> cases, const FactorDomain& domain);

nlohmann::json factors_to_json(const FactorSet& factors);
FactorSet factors_from_json(const nlohmann::json& j);

} // namespace aamcbr
