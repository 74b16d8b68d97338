#include "aamcbr/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "aamcbr/util.hpp"

namespace aamcbr {

std::string to_string(Strategy s)
{
    switch (s) {
    case Strategy::SingleNotInstructed:
        return "single-not-instructed";
    case Strategy::SingleInstructed:
        return "single-instructed";
    case Strategy::AamCbr:
        return "aam-cbr";
    }
    return "aam-cbr";
}

Strategy parse_strategy(std::string_view s)
{
    if (s == "single-not-instructed")
        return Strategy::SingleNotInstructed;
    if (s == "single-instructed")
        return Strategy::SingleInstructed;
    if (s == "aam-cbr")
        return Strategy::AamCbr;
    throw std::invalid_argument("unknown strategy '" + std::string(s) + "'");
}

std::string display_name(Strategy s)
{
    switch (s) {
    case Strategy::SingleNotInstructed:
        return "SinglePrompt-NotInstructed";
    case Strategy::SingleInstructed:
        return "SinglePrompt-Instructed";
    case Strategy::AamCbr:
        return "AAM-CBR";
    }
    return "AAM-CBR";
}

std::string to_string(Prediction p)
{
    switch (p) {
    case Prediction::Zero:
        return "0";
    case Prediction::One:
        return "1";
    case Prediction::Mixed:
        return "mixed";
    }
    return "mixed";
}

Prediction parse_prediction(std::string_view s)
{
    if (s == "0")
        return Prediction::Zero;
    if (s == "1")
        return Prediction::One;
    if (s == "mixed")
        return Prediction::Mixed;
    throw std::invalid_argument("unknown prediction '" + std::string(s) + "'");
}

Prediction parse_conclusion(std::string_view response)
{
    auto s = trim(response);
    while (!s.empty() && s.back() == '.')
        s.pop_back();
    while (s.size() >= 2 && (s.front() == '\'' || s.front() == '"' || s.front() == '`') && s.back() == s.front())
        s = trim(std::string_view(s).substr(1, s.size() - 2));
    if (s == "0")
        return Prediction::Zero;
    if (s == "1")
        return Prediction::One;
    return Prediction::Mixed;
}

// ---------------------------------------------------------------------------

namespace {

nlohmann::json rate_json(const Rate& r)
{
    nlohmann::json j = {{"hits", r.hits}, {"total", r.total}};
    if (auto v = r.value())
        j["value"] = *v;
    else
        j["value"] = nullptr;
    return j;
}

Rate rate_from_json(const nlohmann::json& j)
{
    return {j.at("hits").get<std::size_t>(), j.at("total").get<std::size_t>()};
}

nlohmann::json per_size_json(const std::map<std::size_t, Rate>& m)
{
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [n, r] : m)
        j[std::to_string(n)] = rate_json(r);
    return j;
}

std::map<std::size_t, Rate> per_size_from_json(const nlohmann::json& j)
{
    std::map<std::size_t, Rate> out;
    for (const auto& [k, v] : j.items())
        out[static_cast<std::size_t>(std::stoul(k))] = rate_from_json(v);
    return out;
}

void note_size(MetricsTable& m, std::size_t n)
{
    if (std::find(m.sizes.begin(), m.sizes.end(), n) == m.sizes.end()) {
        m.sizes.push_back(n);
        std::sort(m.sizes.begin(), m.sizes.end());
    }
}

} // namespace

nlohmann::json to_json(const MetricsTable& m)
{
    nlohmann::json prediction = nlohmann::json::array();
    for (const auto& [key, r] : m.prediction_accuracy) {
        const auto& [strategy, n, d] = key;
        auto j = rate_json(r);
        j["strategy"] = to_string(strategy);
        j["n"] = n;
        j["default"] = to_string(d);
        prediction.push_back(std::move(j));
    }
    return {{"sizes", m.sizes},
            {"coverage_accuracy", per_size_json(m.coverage_accuracy)},
            {"coverage_precision", per_size_json(m.coverage_precision)},
            {"ground_truth_relevance", per_size_json(m.ground_truth_relevance)},
            {"extraction_accuracy", per_size_json(m.extraction_accuracy)},
            {"extraction_accuracy_given_relevance", per_size_json(m.extraction_accuracy_given_relevance)},
            {"prediction_accuracy", std::move(prediction)}};
}

MetricsTable metrics_from_json(const nlohmann::json& j)
{
    MetricsTable m;
    m.sizes = j.at("sizes").get<std::vector<std::size_t>>();
    m.coverage_accuracy = per_size_from_json(j.at("coverage_accuracy"));
    m.coverage_precision = per_size_from_json(j.at("coverage_precision"));
    m.ground_truth_relevance = per_size_from_json(j.at("ground_truth_relevance"));
    m.extraction_accuracy = per_size_from_json(j.at("extraction_accuracy"));
    m.extraction_accuracy_given_relevance = per_size_from_json(j.at("extraction_accuracy_given_relevance"));
    for (const auto& e : j.at("prediction_accuracy")) {
        auto key = std::make_tuple(parse_strategy(e.at("strategy").get<std::string>()), e.at("n").get<std::size_t>(),
                                   parse_outcome(e.at("default").get<std::string>()));
        m.prediction_accuracy[key] = rate_from_json(e);
    }
    return m;
}

void merge_metrics(MetricsTable& into, const MetricsTable& other)
{
    for (auto n : other.sizes)
        note_size(into, n);
    auto merge = [](auto& dst, const auto& src) {
        for (const auto& [k, v] : src)
            dst[k] = v;
    };
    merge(into.coverage_accuracy, other.coverage_accuracy);
    merge(into.coverage_precision, other.coverage_precision);
    merge(into.ground_truth_relevance, other.ground_truth_relevance);
    merge(into.extraction_accuracy, other.extraction_accuracy);
    merge(into.extraction_accuracy_given_relevance, other.extraction_accuracy_given_relevance);
    merge(into.prediction_accuracy, other.prediction_accuracy);
}

// ---------------------------------------------------------------------------

CoverageRun run_coverage_experiment(Backend& backend, const ExperimentInputs& in, const ExperimentOptions& opt)
{
    struct Item {
        std::size_t ts;
        std::size_t new_idx;
        std::size_t prev_idx;
    };
    std::vector<Item> items;
    for (std::size_t t = 0; t < in.test_sets.size(); ++t)
        for (std::size_t k = 0; k < in.test_sets[t].new_cases.size(); ++k)
            for (std::size_t p = 0; p < in.test_sets[t].previous.size(); ++p)
                items.push_back({t, k, p});

    std::vector<CoverageRecord> records(items.size());
    parallel_for(items.size(), backend.single_flight() ? 1 : opt.concurrency, [&](std::size_t i) {
        const auto& item = items[i];
        const auto& ts = in.test_sets[item.ts];
        const auto& new_case = ts.new_cases[item.new_idx];
        const auto& prev = ts.previous[item.prev_idx];
        auto& r = records[i];
        r.test_set = ts.id;
        r.new_case_index = item.new_idx;
        r.previous_index = item.prev_idx;
        r.new_case_size = new_case.size();
        r.ground_truth_relevant = is_subset(prev.subset, new_case);
        try {
            const auto v = determine_coverage(backend, in.domain.sentences(new_case), in.pool.at(prev.subset).description,
                                              opt.agent);
            r.predicted_relevant = v.relevant;
            r.parse_status = v.parse_status;
        } catch (const BackendFailure& e) {
            r.parse_status = ParseStatus::Failed;
            r.error = e.what();
        }
    });

    CoverageRun run;
    for (const auto& r : records) {
        note_size(run.metrics, r.new_case_size);
        run.metrics.coverage_accuracy[r.new_case_size].add(r.predicted_relevant == r.ground_truth_relevant);
        run.metrics.ground_truth_relevance[r.new_case_size].add(r.ground_truth_relevant);
        auto& precision = run.metrics.coverage_precision[r.new_case_size];
        if (r.predicted_relevant)
            precision.add(r.ground_truth_relevant);
    }
    run.records = std::move(records);
    return run;
}

ExtractionRun run_extraction_experiment(Backend& backend, const ExperimentInputs& in,
                                        const std::vector<CoverageRecord>& coverage, const ExperimentOptions& opt)
{
    std::map<std::size_t, const TestSet*> by_id;
    for (const auto& ts : in.test_sets)
        by_id[ts.id] = &ts;

    std::vector<const CoverageRecord*> selected;
    for (const auto& c : coverage)
        if (c.predicted_relevant)
            selected.push_back(&c);

    std::vector<ExtractionRecord> records(selected.size());
    parallel_for(selected.size(), backend.single_flight() ? 1 : opt.concurrency, [&](std::size_t i) {
        const auto& c = *selected[i];
        const auto& ts = *by_id.at(c.test_set);
        const auto& new_case = ts.new_cases.at(c.new_case_index);
        const auto& prev = ts.previous.at(c.previous_index);

        auto& r = records[i];
        r.test_set = c.test_set;
        r.new_case_index = c.new_case_index;
        r.previous_index = c.previous_index;
        r.new_case_size = c.new_case_size;
        r.actually_relevant = is_subset(prev.subset, new_case);
        r.truth = intersect(prev.subset, new_case);
        try {
            const auto e = extract_case_factors(backend, in.domain, new_case, in.pool.at(prev.subset).description,
                                                opt.agent);
            r.predicted = e.factors;
            r.failed = e.failed;
        } catch (const BackendFailure& ex) {
            r.failed = true;
            r.error = ex.what();
        }
        r.exact_match = !r.failed && r.predicted == r.truth;
    });

    ExtractionRun run;
    for (const auto& c : coverage)
        note_size(run.metrics, c.new_case_size);
    for (const auto& r : records) {
        note_size(run.metrics, r.new_case_size);
        run.metrics.extraction_accuracy[r.new_case_size].add(r.exact_match);
        if (r.actually_relevant)
            run.metrics.extraction_accuracy_given_relevance[r.new_case_size].add(r.exact_match);
    }
    run.records = std::move(records);
    return run;
}

Outcome gold_outcome(const TestSet& ts, const FactorSet& new_case, Outcome default_outcome)
{
    return aacbr_outcome(truth_case_base(ts), default_outcome, NewCase{new_case}).outcome;
}

namespace {

std::string render_previous_cases(const FactorDomain& domain, const TestSet& ts, const ScenarioPool& pool,
                                  bool factorized)
{
    std::string out;
    for (std::size_t i = 0; i < ts.previous.size(); ++i) {
        const auto& p = ts.previous[i];
        if (i > 0)
            out += "\n    ";
        out += "Case " + std::to_string(i + 1) + ": ";
        if (factorized)
            out += "factors " + format_sentence_list(domain.sentences(p.subset));
        else
            out += pool.at(p.subset).description;
        out += " Outcome: '" + to_string(p.outcome) + "'";
    }
    return out;
}

} // namespace

std::string render_single_prompt(const FactorDomain& domain, const TestSet& ts, const ScenarioPool& pool,
                                 const FactorSet& new_case, Outcome default_outcome, bool instructed,
                                 const ExperimentOptions& opt)
{
    const auto& t = opt.agent.templates;
    const PromptValues values = {
        {"previous_case_list", render_previous_cases(domain, ts, pool, opt.single_prompt_factorized)},
        {"new_case_list", format_sentence_list(domain.sentences(new_case))},
        {"default_outcome", to_string(default_outcome)},
        {"opponent_outcome", to_string(complement(default_outcome))},
    };
    return render(instructed ? t.instructed_predict_outcome() : t.predict_outcome, values);
}

Prediction single_prompt_predict(Backend& backend, const FactorDomain& domain, const TestSet& ts,
                                 const ScenarioPool& pool, const FactorSet& new_case, Outcome default_outcome,
                                 bool instructed, const ExperimentOptions& opt)
{
    const auto first = backend.complete(render_single_prompt(domain, ts, pool, new_case, default_outcome, instructed, opt));
    const auto conclusion = backend.complete(render(opt.agent.templates.conclude_outcome,
                                                    {{"first_response", first}, {"outcome0", "0"}, {"outcome1", "1"}}));
    return parse_conclusion(conclusion);
}

PredictionRun run_prediction_experiment(Backend& backend, const ExperimentInputs& in, const ExperimentOptions& opt)
{
    struct Item {
        std::size_t ts;
        std::size_t new_idx;
        Outcome default_outcome;
        Strategy strategy;
    };
    std::vector<Item> items;
    for (std::size_t t = 0; t < in.test_sets.size(); ++t)
        for (std::size_t k = 0; k < in.test_sets[t].new_cases.size(); ++k)
            for (auto d : opt.defaults)
                for (auto s : opt.strategies)
                    items.push_back({t, k, d, s});

    // Items run concurrently; each item's own backend calls are sequential.
    auto agent = opt.agent;
    agent.concurrency = 1;

    std::vector<PredictionRecord> records(items.size());
    parallel_for(items.size(), backend.single_flight() ? 1 : opt.concurrency, [&](std::size_t i) {
        const auto& item = items[i];
        const auto& ts = in.test_sets[item.ts];
        const auto& new_case = ts.new_cases[item.new_idx];
        auto& r = records[i];
        r.test_set = ts.id;
        r.new_case_index = item.new_idx;
        r.new_case_size = new_case.size();
        r.default_outcome = item.default_outcome;
        r.strategy = item.strategy;
        r.gold = gold_outcome(ts, new_case, item.default_outcome);
        try {
            if (item.strategy == Strategy::AamCbr) {
                const auto result = run_aam_cbr(backend, in.domain, previous_texts(ts, in.pool), NewCase{new_case},
                                                item.default_outcome, agent);
                r.predicted = result.verdict.outcome == Outcome::Zero ? Prediction::Zero : Prediction::One;
            } else {
                r.predicted = single_prompt_predict(backend, in.domain, ts, in.pool, new_case, item.default_outcome,
                                                    item.strategy == Strategy::SingleInstructed, opt);
            }
        } catch (const BackendFailure& e) {
            r.predicted = Prediction::Mixed;
            r.error = e.what();
        }
        r.correct = r.predicted != Prediction::Mixed
            && (r.predicted == Prediction::Zero ? Outcome::Zero : Outcome::One) == r.gold;
    });

    PredictionRun run;
    for (const auto& r : records) {
        note_size(run.metrics, r.new_case_size);
        run.metrics.prediction_accuracy[{r.strategy, r.new_case_size, r.default_outcome}].add(r.correct);
    }
    run.records = std::move(records);
    return run;
}

// ---------------------------------------------------------------------------

double relevance_probability(std::size_t n, std::size_t domain_size)
{
    if (n > domain_size)
        throw std::invalid_argument("new case size exceeds the domain size");
    return std::ldexp(1.0, static_cast<int>(n) - static_cast<int>(domain_size));
}

double empirical_relevance_frequency(std::size_t n, std::size_t domain_size, std::size_t samples, std::uint64_t seed)
{
    if (n > domain_size)
        throw std::invalid_argument("new case size exceeds the domain size");
    if (samples == 0)
        throw std::invalid_argument("need at least one sample");
    Rng rng(seed);
    std::vector<std::size_t> order(domain_size);
    for (std::size_t i = 0; i < domain_size; ++i)
        order[i] = i;
    std::size_t covered = 0;
    for (std::size_t s = 0; s < samples; ++s) {
        std::vector<bool> in_new(domain_size, false);
        rng.shuffle_prefix(order, n);
        for (std::size_t i = 0; i < n; ++i)
            in_new[order[i]] = true;
        bool subset = true;
        // Each factor joins the previous situation with probability 1/2.
        for (std::size_t f = 0; f < domain_size; ++f)
            if (rng.bernoulli(0.5) && !in_new[f])
                subset = false;
        covered += subset ? 1 : 0;
    }
    return static_cast<double>(covered) / static_cast<double>(samples);
}

} // namespace aamcbr
