#include "aamcbr/datagen.hpp"

#include <algorithm>
#include <sstream>

#include "aamcbr/util.hpp"

namespace aamcbr {

std::string to_string(ScenarioSource s)
{
    return s == ScenarioSource::LlmGenerated ? "llm-generated" : "template-composed";
}

ScenarioSource parse_scenario_source(std::string_view s)
{
    if (s == "llm-generated")
        return ScenarioSource::LlmGenerated;
    if (s == "template-composed")
        return ScenarioSource::TemplateComposed;
    throw std::invalid_argument("unknown scenario source '" + std::string(s) + "'");
}

ScenarioResult generate_scenario(Backend& backend, const FactorDomain& domain, const FactorSet& included,
                                 int max_attempts, const AgentOptions& options)
{
    if (included.empty())
        throw std::invalid_argument("scenario generation needs at least one included factor");
    domain.validate(included);
    const auto all = domain.all_ids();
    FactorSet excluded;
    std::set_difference(all.begin(), all.end(), included.begin(), included.end(),
                        std::inserter(excluded, excluded.end()));

    const auto prompt = render(options.templates.generate_scenario,
                               {{"included_factor_list", format_sentence_list(domain.sentences(included))},
                                {"excluded_factor_list", format_sentence_list(domain.sentences(excluded))}});
    for (int attempt = 1; attempt <= max_attempts; ++attempt) {
        auto description = trim(backend.complete(prompt));
        if (description.empty())
            continue;
        const auto extracted = extract_case_factors(backend, domain, all, description, options);
        if (!extracted.failed && extracted.factors == included)
            return Scenario{included, std::move(description), ScenarioSource::LlmGenerated, attempt};
    }
    return SkippedSubset{included, max_attempts};
}

// ---------------------------------------------------------------------------

namespace {

struct PhraseBank {
    std::map<FactorId, std::vector<std::string>> phrases;
};

const PhraseBank& credit_phrases()
{
    static const PhraseBank bank{{
        {"p1",
         {"{name}'s monthly obligations take up only a small share of what they earn.",
          "Compared with their salary, {name} carries very little outstanding borrowing.",
          "{name} keeps repayments modest relative to take-home pay."}},
        {"p2",
         {"{name} has held the same job for more than a decade.",
          "{name} has worked steadily for one employer for many years.",
          "{name}'s career shows years of uninterrupted work with a single company."}},
        {"p3",
         {"{name} has paid every installment on a car loan on time.",
          "{name}'s current mortgage has been serviced without a single slip.",
          "Every installment on {name}'s student loan has been settled as scheduled."}},
        {"p4",
         {"{name} lists a paid-off home and a sizeable investment portfolio on the form.",
          "{name} reports substantial savings and property holdings.",
          "The form shows that {name} owns valuable real estate and large deposits."}},
        {"p5",
         {"{name} has kept accounts at this lender for years and is well regarded by its staff.",
          "{name} is a long-time customer of the lender in good standing.",
          "The branch manager knows {name} as a loyal and trusted client."}},
        {"n1",
         {"In the past few months {name} has applied for several other cards and loans.",
          "{name}'s file shows a flurry of new lending applications lately.",
          "Multiple lenders have pulled {name}'s report in recent weeks."}},
        {"n2",
         {"{name} has a few overdue bills on record.",
          "{name}'s report notes past installments that were settled after their due dates.",
          "Several past invoices were paid behind schedule by {name}."}},
        {"n3",
         {"{name}'s earnings fall short of what the card's requirements expect.",
          "{name} earns too little to comfortably take on new obligations.",
          "{name}'s pay is modest and barely covers living costs."}},
        {"n4",
         {"{name} only recently began borrowing, so there is little record to go on.",
          "{name}'s report is thin, with just one account opened last year.",
          "There is barely any borrowing track record for {name}."}},
        {"n5",
         {"{name} turned nineteen this spring.",
          "{name} is barely out of their teens.",
          "{name} recently finished secondary school."}},
    }};
    return bank;
}

const std::vector<std::string>& names()
{
    static const std::vector<std::string> v = {"Alex", "Jordan", "Sam", "Taylor", "Morgan", "Casey",
                                               "Riley", "Jamie", "Avery", "Quinn", "Robin", "Devon"};
    return v;
}

const std::vector<std::string>& openings()
{
    static const std::vector<std::string> v = {"{name} is applying for a new credit card.",
                                               "{name} submits an application for a rewards card.",
                                               "{name} visits a branch to request a credit card."};
    return v;
}

const std::vector<std::string>& closings()
{
    static const std::vector<std::string> v = {"The application was filed online.",
                                               "{name} hopes to use the card for everyday purchases.",
                                               "The request is for a standard card with a modest limit."};
    return v;
}

std::vector<std::string> generic_phrases(const Factor& f)
{
    auto s = f.sentence;
    while (!s.empty() && std::string_view(".;:,!").find(s.back()) != std::string_view::npos)
        s.pop_back();
    return {"The file for {name} indicates " + s + ".", "Reviewers noted the following about {name}: " + s + ".",
            "According to the records, {name} shows " + s + "."};
}

std::string fill(std::string text, const std::string& name)
{
    const std::string key = "{name}";
    for (auto pos = text.find(key); pos != std::string::npos; pos = text.find(key, pos + name.size()))
        text.replace(pos, key.size(), name);
    return text;
}

template <typename T>
const T& pick(Rng& rng, const std::vector<T>& v)
{
    return v[rng.below(v.size())];
}

} // namespace

Scenario compose_template_scenario(const FactorDomain& domain, const FactorSet& subset, std::uint64_t seed)
{
    if (subset.empty())
        throw std::invalid_argument("template scenarios need at least one factor");
    domain.validate(subset);
    Rng rng(seed ^ fnv1a64(to_string(subset)));

    static const FactorDomain credit_domain = FactorDomain::credit();
    const auto& bank = credit_phrases().phrases;

    const auto& name = pick(rng, names());
    std::vector<std::string> body;
    for (const auto& id : domain.ordered(subset)) {
        auto it = bank.find(id);
        // The credit phrase bank only applies when the sentence is the credit one.
        const bool credit = it != bank.end() && credit_domain.at(id).sentence == domain.at(id).sentence;
        const auto options = credit ? it->second : generic_phrases(domain.at(id));
        body.push_back(fill(pick(rng, options), name));
    }
    rng.shuffle_prefix(body, body.size());

    std::string text = fill(pick(rng, openings()), name);
    for (const auto& sentence : body)
        text += " " + sentence;
    text += " " + fill(pick(rng, closings()), name);
    return Scenario{subset, std::move(text), ScenarioSource::TemplateComposed, 1};
}

std::vector<FactorSet> nonempty_subsets(const FactorDomain& domain)
{
    const auto n = domain.size();
    if (n >= 31)
        throw std::invalid_argument("domain too large to enumerate subsets");
    std::vector<FactorSet> out;
    out.reserve((std::size_t{1} << n) - 1);
    for (std::uint32_t mask = 1; mask < (std::uint32_t{1} << n); ++mask) {
        FactorSet s;
        for (std::size_t i = 0; i < n; ++i)
            if (mask & (1u << i))
                s.insert(domain.factors()[i].id);
        out.push_back(std::move(s));
    }
    return out;
}

// ---------------------------------------------------------------------------

void ScenarioPool::add(Scenario scenario)
{
    auto key = scenario.subset;
    if (!scenarios_.emplace(std::move(key), std::move(scenario)).second)
        throw std::invalid_argument("scenario pool already has an entry for this subset");
}

void ScenarioPool::skip(SkippedSubset skipped)
{
    skipped_.push_back(std::move(skipped));
}

const Scenario& ScenarioPool::at(const FactorSet& subset) const
{
    auto it = scenarios_.find(subset);
    if (it == scenarios_.end())
        throw std::out_of_range("no scenario for subset " + to_string(subset));
    return it->second;
}

void ScenarioPool::register_truth(TruthTable& table) const
{
    for (const auto& [subset, s] : scenarios_)
        table.add(s.description, subset);
}

std::string ScenarioPool::to_jsonl() const
{
    std::string out;
    for (const auto& [subset, s] : scenarios_) {
        nlohmann::json line = {{"subset", factors_to_json(subset)},
                               {"description", s.description},
                               {"source", to_string(s.source)},
                               {"attempts", s.attempts}};
        out += line.dump() + "\n";
    }
    return out;
}

ScenarioPool ScenarioPool::from_jsonl(std::string_view text)
{
    ScenarioPool pool;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty())
            continue;
        auto j = nlohmann::json::parse(line);
        Scenario s;
        s.subset = factors_from_json(j.at("subset"));
        s.description = j.at("description").get<std::string>();
        s.source = parse_scenario_source(j.at("source").get<std::string>());
        s.attempts = j.value("attempts", 1);
        pool.add(std::move(s));
    }
    return pool;
}

void ScenarioPool::save(const std::filesystem::path& path) const
{
    write_file_atomic(path, to_jsonl());
}

ScenarioPool ScenarioPool::load(const std::filesystem::path& path)
{
    return from_jsonl(read_text_file(path));
}

ScenarioPool compose_template_pool(const FactorDomain& domain, std::uint64_t seed)
{
    ScenarioPool pool;
    for (auto& subset : nonempty_subsets(domain))
        pool.add(compose_template_scenario(domain, subset, seed));
    return pool;
}

ScenarioPool generate_pool(Backend& backend, const FactorDomain& domain, int max_attempts,
                           std::size_t concurrency, const AgentOptions& options)
{
    const auto subsets = nonempty_subsets(domain);
    std::vector<std::optional<ScenarioResult>> results(subsets.size());
    parallel_for(subsets.size(), backend.single_flight() ? 1 : concurrency, [&](std::size_t i) {
        results[i] = generate_scenario(backend, domain, subsets[i], max_attempts, options);
    });
    ScenarioPool pool;
    for (auto& r : results) {
        if (auto* s = std::get_if<Scenario>(&*r))
            pool.add(std::move(*s));
        else
            pool.skip(std::get<SkippedSubset>(*r));
    }
    return pool;
}

void attach_template_writer(OracleBackend& oracle, std::uint64_t seed)
{
    oracle.enable_generation([domain = oracle.domain(), seed](const FactorSet& included, std::uint64_t attempt) {
        return compose_template_scenario(domain, included, splitmix64(seed + attempt)).description;
    });
}

// ---------------------------------------------------------------------------

std::optional<Outcome> forced_outcome(const FactorDomain& domain, const FactorSet& subset)
{
    if (subset.empty())
        return std::nullopt;
    bool all_negative = true;
    bool all_positive = true;
    for (const auto& id : subset) {
        const auto p = domain.at(id).polarity;
        all_negative = all_negative && p == Polarity::Negative;
        all_positive = all_positive && p == Polarity::Positive;
    }
    if (all_negative)
        return Outcome::Zero;
    if (all_positive)
        return Outcome::One;
    return std::nullopt;
}

std::vector<TestSet> generate_test_sets(const ScenarioPool& pool, const FactorDomain& domain,
                                        const TestSetOptions& options)
{
    std::vector<FactorSet> keys;
    for (const auto& [subset, s] : pool.scenarios())
        keys.push_back(subset);
    if (keys.empty() || (!options.with_replacement && keys.size() < options.previous_per_set))
        throw InsufficientPool("scenario pool has " + std::to_string(keys.size()) + " scenarios, need "
                               + std::to_string(options.previous_per_set));
    for (auto size : options.new_case_sizes)
        if (size == 0 || size > domain.size())
            throw std::invalid_argument("new case size " + std::to_string(size) + " is out of range");

    std::vector<FactorId> ids;
    for (const auto& f : domain.factors())
        ids.push_back(f.id);

    std::vector<TestSet> sets;
    for (std::size_t i = 0; i < options.count; ++i) {
        TestSet ts;
        ts.id = i;
        ts.seed = splitmix64(options.seed ^ splitmix64(i + 1));
        Rng rng(ts.seed);

        std::vector<FactorSet> drawn;
        if (options.with_replacement) {
            for (std::size_t k = 0; k < options.previous_per_set; ++k)
                drawn.push_back(keys[rng.below(keys.size())]);
        } else {
            auto shuffled = keys;
            rng.shuffle_prefix(shuffled, options.previous_per_set);
            drawn.assign(shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(options.previous_per_set));
        }

        std::map<FactorSet, Outcome> assigned;
        for (auto& subset : drawn) {
            auto it = assigned.find(subset);
            Outcome o;
            if (it != assigned.end()) {
                o = it->second;
            } else if (auto forced = forced_outcome(domain, subset)) {
                o = *forced;
            } else {
                o = rng.bernoulli(0.5) ? Outcome::One : Outcome::Zero;
            }
            assigned.emplace(subset, o);
            ts.previous.push_back({std::move(subset), o});
        }

        for (auto size : options.new_case_sizes) {
            auto order = ids;
            rng.shuffle_prefix(order, size);
            ts.new_cases.emplace_back(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(size));
        }
        sets.push_back(std::move(ts));
    }
    return sets;
}

CaseBase truth_case_base(const TestSet& test_set)
{
    std::vector<Case> cases;
    for (const auto& p : test_set.previous)
        cases.push_back({p.subset, p.outcome});
    return check_consistency(cases);
}

std::vector<PreviousCaseText> previous_texts(const TestSet& test_set, const ScenarioPool& pool)
{
    std::vector<PreviousCaseText> out;
    for (const auto& p : test_set.previous)
        out.push_back({pool.at(p.subset).description, p.outcome});
    return out;
}

nlohmann::json to_json(const TestSet& ts)
{
    nlohmann::json previous = nlohmann::json::array();
    for (const auto& p : ts.previous)
        previous.push_back({{"subset", factors_to_json(p.subset)}, {"outcome", to_string(p.outcome)}});
    nlohmann::json new_cases = nlohmann::json::array();
    for (const auto& n : ts.new_cases)
        new_cases.push_back(factors_to_json(n));
    return {{"id", ts.id}, {"seed", ts.seed}, {"previous", std::move(previous)}, {"new_cases", std::move(new_cases)}};
}

TestSet test_set_from_json(const nlohmann::json& j)
{
    TestSet ts;
    ts.id = j.value("id", std::size_t{0});
    ts.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& p : j.at("previous"))
        ts.previous.push_back({factors_from_json(p.at("subset")), parse_outcome(p.at("outcome").get<std::string>())});
    for (const auto& n : j.at("new_cases"))
        ts.new_cases.push_back(factors_from_json(n));
    return ts;
}

void save_test_sets(const std::filesystem::path& path, const std::vector<TestSet>& sets)
{
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& ts : sets)
        arr.push_back(to_json(ts));
    write_file_atomic(path, arr.dump(2) + "\n");
}

std::vector<TestSet> load_test_sets(const std::filesystem::path& path)
{
    auto j = nlohmann::json::parse(read_text_file(path));
    if (!j.is_array())
        throw std::runtime_error("test-set file must hold a JSON array");
    std::vector<TestSet> out;
    for (const auto& e : j)
        out.push_back(test_set_from_json(e));
    return out;
}

} // namespace aamcbr
