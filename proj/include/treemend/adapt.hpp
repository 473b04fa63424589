#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "treemend/dom.hpp"
#include "treemend/match.hpp"
#include "treemend/signature.hpp"
#include "treemend/xpath.hpp"

namespace treemend {

enum class AdaptStatus { xpath_still_valid, adapted, no_match };

inline std::string_view adapt_status_name(AdaptStatus s) {
    switch (s) {
        case AdaptStatus::xpath_still_valid: return "xpath_still_valid";
        case AdaptStatus::adapted: return "adapted";
        default: return "no_match";
    }
}

struct MatchResult {
    NodeRef node;
    std::optional<Rational> score;          // absent when the original XPath still matched
    std::optional<size_t> snapshot_index;   // best-matching snapshot
    XPathExpr xpath;                        // evaluates on the page to exactly [node]
};

struct NearMiss {
    XPathExpr xpath;
    Rational score;
};

struct AdaptationReport {
    AdaptStatus status = AdaptStatus::no_match;
    std::vector<MatchResult> results;
    std::optional<GeneralizedXPath> generalized_xpath;   // multi mode only
    size_t candidates_scored = 0;
    Rational threshold_used;
    Algorithm algorithm_used = Algorithm::clustered;
    std::vector<NearMiss> near_misses;   // best below-threshold scores on no_match
};

// All nodes, in document order, whose label matches any snapshot root label
// under the configured options; then the optional size-ratio prune.
inline std::vector<NodeRef> enumerate_candidates(const DomTree& page, const Signature& sig,
                                                 const MatchOptions& opts) {
    std::vector<NodeRef> out;
    for (DomTree::NodeId id = 0; (size_t)id < page.size(); ++id) {
        NodeRef node = page.node(id);
        bool label_ok = false;
        for (const auto& snap : sig.snapshots) {
            if (labels_match(node.label(), snap.root().label(), opts)) {
                label_ok = true;
                break;
            }
        }
        if (!label_ok) continue;
        if (opts.max_size_ratio) {
            bool size_ok = false;
            for (const auto& snap : sig.snapshots) {
                long long a = node.subtree_size();
                long long b = snap.root().subtree_size();
                if (Rational(std::max(a, b)) <= *opts.max_size_ratio * Rational(std::min(a, b))) {
                    size_ok = true;
                    break;
                }
            }
            if (!size_ok) continue;
        }
        out.push_back(node);
    }
    return out;
}

namespace detail {

// Keep the higher-scoring node of every ancestor/descendant pair that passed
// the threshold; on a tie the ancestor survives. Input is in document order.
inline void prune_nested_results(std::vector<MatchResult>& results) {
    std::vector<bool> drop(results.size(), false);
    for (size_t i = 0; i < results.size(); ++i) {
        for (size_t j = 0; j < results.size(); ++j) {
            if (i == j || drop[i] || drop[j]) continue;
            if (!results[i].node.is_ancestor_of(results[j].node)) continue;
            // i is the ancestor
            if (*results[j].score > *results[i].score)
                drop[i] = true;
            else
                drop[j] = true;
        }
    }
    std::vector<MatchResult> kept;
    for (size_t i = 0; i < results.size(); ++i)
        if (!drop[i]) kept.push_back(std::move(results[i]));
    results = std::move(kept);
}

}  // namespace detail

// The adaptation engine. Short-circuits when the stored XPath still matches;
// otherwise scores every candidate against every snapshot (keeping the best
// snapshot per candidate) and selects winners at or above the threshold.
inline AdaptationReport adapt(const DomTree& page, const Signature& sig,
                              std::optional<MatchOptions> overrides = std::nullopt) {
    const MatchOptions opts = overrides ? *overrides : sig.options;
    AdaptationReport report;
    report.threshold_used = opts.threshold;
    report.algorithm_used = opts.algorithm;

    XPathExpr original = parse_xpath(sig.original_xpath);
    std::vector<NodeRef> still = eval_xpath(page, original);
    if (!still.empty()) {
        report.status = AdaptStatus::xpath_still_valid;
        for (const NodeRef& n : still)
            report.results.push_back(
                {n, std::nullopt, std::nullopt, induce_xpath(page, n)});
        return report;
    }

    std::vector<NodeRef> candidates = enumerate_candidates(page, sig, opts);
    report.candidates_scored = candidates.size();

    struct Scored {
        NodeRef node;
        Rational score;
        size_t snapshot;
        XPathExpr xpath;
    };
    std::vector<Scored> scored;
    scored.reserve(candidates.size());
    for (const NodeRef& c : candidates) {
        Rational best;
        size_t best_snap = 0;
        for (size_t s = 0; s < sig.snapshots.size(); ++s) {
            Rational v = similarity_score(sig.snapshots[s].root(), c, opts).value;
            if (s == 0 || v > best) {
                best = v;
                best_snap = s;
            }
        }
        scored.push_back({c, best, best_snap, induce_xpath(page, c)});
    }

    std::vector<Scored> passing;
    for (const auto& s : scored)
        if (s.score >= opts.threshold) passing.push_back(s);

    if (passing.empty()) {
        report.status = AdaptStatus::no_match;
        std::vector<Scored> misses = scored;
        std::stable_sort(misses.begin(), misses.end(),
                         [](const Scored& a, const Scored& b) { return b.score < a.score; });
        for (size_t i = 0; i < misses.size() && i < 5; ++i)
            report.near_misses.push_back({misses[i].xpath, misses[i].score});
        return report;
    }

    report.status = AdaptStatus::adapted;
    if (sig.mode == SignatureMode::single) {
        // minor layout shifts dominate in practice, so equal scores prefer
        // the candidate whose path stays closest to the original
        const Scored* winner = &passing.front();
        int winner_dist = xpath_step_distance(winner->xpath, original);
        for (const auto& s : passing) {
            int dist = xpath_step_distance(s.xpath, original);
            if (s.score > winner->score || (s.score == winner->score && dist < winner_dist)) {
                winner = &s;
                winner_dist = dist;
            }
        }
        report.results.push_back({winner->node, winner->score, winner->snapshot, winner->xpath});
        return report;
    }

    for (const auto& s : passing)
        report.results.push_back({s.node, s.score, s.snapshot, s.xpath});
    if (opts.prune_nested) detail::prune_nested_results(report.results);
    std::vector<NodeRef> nodes;
    for (const auto& r : report.results) nodes.push_back(r.node);
    report.generalized_xpath = generalize_xpaths(page, nodes);
    return report;
}

inline nlohmann::ordered_json report_to_json(const AdaptationReport& report) {
    nlohmann::ordered_json j;
    j["status"] = std::string(adapt_status_name(report.status));
    j["threshold"] = report.threshold_used.str();
    j["algorithm"] = std::string(algorithm_name(report.algorithm_used));
    j["candidates_scored"] = report.candidates_scored;
    auto& results = j["results"] = nlohmann::ordered_json::array();
    for (const auto& r : report.results) {
        nlohmann::ordered_json e;
        e["xpath"] = r.xpath.str();
        if (r.score) {
            e["score"] = {{"fraction", r.score->str()}, {"decimal", r.score->decimal_str()}};
        } else {
            e["score"] = nullptr;   // original XPath still matched; not rescored
        }
        e["snapshot"] = r.snapshot_index ? nlohmann::ordered_json(*r.snapshot_index)
                                         : nlohmann::ordered_json(nullptr);
        results.push_back(std::move(e));
    }
    if (report.generalized_xpath) {
        j["generalized_xpath"] = {
            {"xpath", report.generalized_xpath->primary().str()},
            {"unified", report.generalized_xpath->unified.has_value()},
            {"over_selects", report.generalized_xpath->over_selects},
        };
    }
    return j;
}

}  // namespace treemend
