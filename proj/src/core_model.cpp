#include "aamcbr/core_model.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <unordered_set>

namespace aamcbr {

std::string to_string(Outcome o)
{
    return o == Outcome::Zero ? "0" : "1";
}

Outcome parse_outcome(std::string_view text)
{
    if (text == "0")
        return Outcome::Zero;
    if (text == "1")
        return Outcome::One;
    throw DomainError("invalid outcome '" + std::string(text) + "', expected \"0\" or \"1\"");
}

std::string to_string(Polarity p)
{
    return p == Polarity::Positive ? "positive" : "negative";
}

Polarity parse_polarity(std::string_view text)
{
    if (text == "positive")
        return Polarity::Positive;
    if (text == "negative")
        return Polarity::Negative;
    throw DomainError("invalid polarity '" + std::string(text) + "'");
}

std::string to_string(const FactorSet& factors)
{
    std::string out = "{";
    bool first = true;
    for (const auto& f : factors) {
        if (!first)
            out += ',';
        out += f;
        first = false;
    }
    out += '}';
    return out;
}

bool is_subset(const FactorSet& inner, const FactorSet& outer)
{
    return std::includes(outer.begin(), outer.end(), inner.begin(), inner.end());
}

bool is_strict_subset(const FactorSet& inner, const FactorSet& outer)
{
    return inner.size() < outer.size() && is_subset(inner, outer);
}

FactorSet intersect(const FactorSet& a, const FactorSet& b)
{
    FactorSet out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::inserter(out, out.end()));
    return out;
}

// ---------------------------------------------------------------------------

FactorDomain::FactorDomain(std::vector<Factor> factors) : factors_(std::move(factors))
{
    if (factors_.empty())
        throw DomainError("factor domain must not be empty");
    std::unordered_set<std::string> ids;
    std::unordered_set<std::string> sentences;
    for (const auto& f : factors_) {
        if (f.id.empty())
            throw DomainError("factor id must not be empty");
        if (f.sentence.empty())
            throw DomainError("factor '" + f.id + "' has an empty sentence");
        if (!ids.insert(f.id).second)
            throw DomainError("duplicate factor id '" + f.id + "'");
        if (!sentences.insert(f.sentence).second)
            throw DomainError("duplicate factor sentence '" + f.sentence + "'");
    }
}

FactorDomain FactorDomain::credit()
{
    // Sentences are kept verbatim, including the trailing period on n1.
    return FactorDomain({
        {"p1", "low debt-to-income ratio", Polarity::Positive},
        {"p2", "long and stable employment history", Polarity::Positive},
        {"p3", "consistent payment history on existing loans", Polarity::Positive},
        {"p4", "significant assets declared", Polarity::Positive},
        {"p5", "positive relationship with the bank", Polarity::Positive},
        {"n1", "high number of recent credit inquiries.", Polarity::Negative},
        {"n2", "missed or late payments history", Polarity::Negative},
        {"n3", "insufficient income", Polarity::Negative},
        {"n4", "limited credit history", Polarity::Negative},
        {"n5", "young age", Polarity::Negative},
    });
}

FactorDomain FactorDomain::from_json(const nlohmann::json& doc)
{
    if (!doc.is_object() || !doc.contains("factors") || !doc.at("factors").is_array())
        throw DomainError("factor domain document must be an object with a \"factors\" array");
    std::vector<Factor> factors;
    for (const auto& entry : doc.at("factors")) {
        Factor f;
        f.id = entry.at("id").get<std::string>();
        f.sentence = entry.at("sentence").get<std::string>();
        f.polarity = parse_polarity(entry.at("polarity").get<std::string>());
        factors.push_back(std::move(f));
    }
    return FactorDomain(std::move(factors));
}

FactorDomain FactorDomain::load(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw DomainError("cannot open factor domain file " + path.string());
    try {
        return from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
        throw DomainError("malformed factor domain file " + path.string() + ": " + e.what());
    }
}

nlohmann::json FactorDomain::to_json() const
{
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& f : factors_)
        arr.push_back({{"id", f.id}, {"sentence", f.sentence}, {"polarity", to_string(f.polarity)}});
    return {{"factors", std::move(arr)}};
}

bool FactorDomain::contains(std::string_view id) const
{
    return std::any_of(factors_.begin(), factors_.end(), [&](const Factor& f) { return f.id == id; });
}

const Factor& FactorDomain::at(std::string_view id) const
{
    for (const auto& f : factors_)
        if (f.id == id)
            return f;
    throw DomainError("unknown factor id '" + std::string(id) + "'");
}

std::optional<FactorId> FactorDomain::id_for_sentence(std::string_view sentence) const
{
    for (const auto& f : factors_)
        if (f.sentence == sentence)
            return f.id;
    return std::nullopt;
}

FactorSet FactorDomain::all_ids() const
{
    FactorSet out;
    for (const auto& f : factors_)
        out.insert(f.id);
    return out;
}

std::vector<std::string> FactorDomain::sentences(const FactorSet& ids) const
{
    validate(ids);
    std::vector<std::string> out;
    for (const auto& f : factors_)
        if (ids.contains(f.id))
            out.push_back(f.sentence);
    return out;
}

std::vector<FactorId> FactorDomain::ordered(const FactorSet& ids) const
{
    validate(ids);
    std::vector<FactorId> out;
    for (const auto& f : factors_)
        if (ids.contains(f.id))
            out.push_back(f.id);
    return out;
}

void FactorDomain::validate(const FactorSet& ids) const
{
    for (const auto& id : ids)
        if (!contains(id))
            throw DomainError("unknown factor id '" + id + "'");
}

FactorDomain FactorDomain::with_flipped_polarity() const
{
    auto flipped = factors_;
    for (auto& f : flipped)
        f.polarity = f.polarity == Polarity::Positive ? Polarity::Negative : Polarity::Positive;
    return FactorDomain(std::move(flipped));
}

// ---------------------------------------------------------------------------

std::string to_string(const Case& c)
{
    return "(" + to_string(c.factors) + "," + to_string(c.outcome) + ")";
}

namespace {

std::string describe_conflicts(const std::vector<FactorSet>& conflicts)
{
    std::string msg = "inconsistent case base: conflicting outcomes for";
    for (const auto& s : conflicts)
        msg += " " + to_string(s);
    return msg;
}

} // namespace

ConsistencyViolation::ConsistencyViolation(std::vector<FactorSet> conflicts)
    : std::runtime_error(describe_conflicts(conflicts)), conflicts_(std::move(conflicts))
{
}

bool CaseBase::contains(const Case& c) const
{
    return std::binary_search(cases_.begin(), cases_.end(), c);
}

CaseBase check_consistency(std::span<const Case> cases)
{
    std::vector<Case> sorted(cases.begin(), cases.end());
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

    // After sorting, cases sharing a factor set are adjacent.
    std::vector<FactorSet> conflicts;
    for (std::size_t i = 1; i < sorted.size(); ++i) {
        if (sorted[i].factors == sorted[i - 1].factors
            && (conflicts.empty() || conflicts.back() != sorted[i].factors))
            conflicts.push_back(sorted[i].factors);
    }
    if (!conflicts.empty())
        throw ConsistencyViolation(std::move(conflicts));
    return CaseBase(std::move(sorted));
}

CaseBase check_consistency(std::span<const Case> cases, const FactorDomain& domain)
{
    for (const auto& c : cases)
        domain.validate(c.factors);
    return check_consistency(cases);
}

nlohmann::json factors_to_json(const FactorSet& factors)
{
    return nlohmann::json(std::vector<std::string>(factors.begin(), factors.end()));
}

FactorSet factors_from_json(const nlohmann::json& j)
{
    if (!j.is_array())
        throw DomainError("factor set must be a JSON array of ids");
    FactorSet out;
    for (const auto& v : j)
        out.insert(v.get<std::string>());
    return out;
}

} // namespace aamcbr
