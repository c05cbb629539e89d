#pragma once

/// Moving a seek from one viewpoint to another without losing its context.
///
/// Three routes, in order of preference when the orchestrator switches
/// viewpoints:
///  - IntersectionEntry: the item in focus lives in both domains, so a query
///    is built from its own terms in the target index.
///  - RuleRewrite: term-level synonym rules rewrite the last query.
///  - IdentityFallback: the target is consulted with the query unchanged.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "vlens/error.hpp"
#include "vlens/text.hpp"
#include "vlens/viewpoint.hpp"

namespace vlens {

enum class MappingOrigin { Manual, Mined };

constexpr std::string_view to_string(MappingOrigin origin) noexcept {
  return origin == MappingOrigin::Manual ? "Manual" : "Mined";
}

inline std::optional<MappingOrigin> parse_mapping_origin(std::string_view text) noexcept {
  if (text == "Manual") return MappingOrigin::Manual;
  if (text == "Mined") return MappingOrigin::Mined;
  return std::nullopt;
}

struct TransitionRule {
  std::string from;
  std::vector<std::string> to;
  double confidence = 1.0;
  MappingOrigin origin = MappingOrigin::Manual;

  friend bool operator==(const TransitionRule&, const TransitionRule&) = default;
};

/// Directed rule set from one viewpoint's vocabulary to another's.
class TransitionMapping {
 public:
  /// Normalizes rule terms with the tokenizer. Throws InvalidArgument on an
  /// empty or multi-token source term, an empty target list, a confidence
  /// outside (0, 1], or a repeated source term.
  TransitionMapping(std::string source_vp, std::string target_vp, MappingOrigin origin,
                    std::vector<TransitionRule> rules)
      : source_vp_(std::move(source_vp)),
        target_vp_(std::move(target_vp)),
        origin_(origin) {
    std::set<std::string> seen;
    for (auto& rule : rules) {
      auto from = tokenize(rule.from);
      if (from.size() != 1)
        throw Error(ErrorCode::InvalidArgument,
                    "rule source '" + rule.from + "' must be exactly one term", {rule.from});
      std::vector<std::string> to;
      for (const auto& t : rule.to)
        for (auto& tok : tokenize(t)) to.push_back(std::move(tok));
      if (to.empty())
        throw Error(ErrorCode::InvalidArgument, "rule '" + from[0] + "' has no target terms",
                    {from[0]});
      if (!(rule.confidence > 0.0 && rule.confidence <= 1.0))
        throw Error(ErrorCode::InvalidArgument,
                    "rule '" + from[0] + "' confidence must lie in (0, 1]", {from[0]});
      if (!seen.insert(from[0]).second)
        throw Error(ErrorCode::InvalidArgument, "duplicate rule for '" + from[0] + "'", {from[0]});
      rule.from = std::move(from[0]);
      rule.to = std::move(to);
    }
    rules_ = std::move(rules);
  }

  const std::string& source_vp() const noexcept { return source_vp_; }
  const std::string& target_vp() const noexcept { return target_vp_; }
  MappingOrigin origin() const noexcept { return origin_; }
  const std::vector<TransitionRule>& rules() const noexcept { return rules_; }

  /// Index into rules() of the rule for `term`, if any.
  std::optional<std::size_t> find(std::string_view term) const {
    for (std::size_t i = 0; i < rules_.size(); ++i)
      if (rules_[i].from == term) return i;
    return std::nullopt;
  }

  friend bool operator==(const TransitionMapping&, const TransitionMapping&) = default;

 private:
  std::string source_vp_;
  std::string target_vp_;
  MappingOrigin origin_;
  std::vector<TransitionRule> rules_;
};

enum class TranslationStrategy { RuleRewrite, IdentityFallback, IntersectionEntry };

constexpr std::string_view to_string(TranslationStrategy s) noexcept {
  switch (s) {
    case TranslationStrategy::RuleRewrite: return "RuleRewrite";
    case TranslationStrategy::IdentityFallback: return "IdentityFallback";
    case TranslationStrategy::IntersectionEntry: return "IntersectionEntry";
  }
  return "";
}

struct AppliedRule {
  std::size_t index = 0;  // position in the mapping's rules()
  TransitionRule rule;

  friend bool operator==(const AppliedRule&, const AppliedRule&) = default;
};

struct TranslatedQuery {
  Query query;
  Query original;
  std::vector<AppliedRule> applied_rules;
  TranslationStrategy strategy = TranslationStrategy::IdentityFallback;

  friend bool operator==(const TranslatedQuery&, const TranslatedQuery&) = default;
};

inline TranslatedQuery identity_fallback(const Query& q) {
  return {q, q, {}, TranslationStrategy::IdentityFallback};
}

/// Substitutes every term that has a rule with the rule's targets, in place.
/// Terms without a rule pass through. Never fails.
inline TranslatedQuery translate(const TransitionMapping& mapping, const Query& q) {
  std::vector<std::string> terms;
  std::vector<AppliedRule> applied;
  for (const auto& term : q.terms()) {
    auto idx = mapping.find(term);
    if (!idx) {
      terms.push_back(term);
      continue;
    }
    const auto& rule = mapping.rules()[*idx];
    terms.insert(terms.end(), rule.to.begin(), rule.to.end());
    bool recorded = std::any_of(applied.begin(), applied.end(),
                                [&](const AppliedRule& a) { return a.index == *idx; });
    if (!recorded) applied.push_back({*idx, rule});
  }
  if (applied.empty()) return identity_fallback(q);
  return {Query::from_terms(std::span<const std::string>(terms), q.filters()), q,
          std::move(applied), TranslationStrategy::RuleRewrite};
}

inline constexpr std::size_t kEntryPointTerms = 3;

/// Builds a query from `item`'s highest-weighted terms in `target`. Prefers
/// the top three tf-idf terms; if those do not put the item first and the
/// item has terms unique to it in the target, the query is rebuilt from the
/// unique terms alone. `original` defaults to the built query.
///
/// Throws NotInIntersection when the item is outside either domain or has
/// no indexed terms in the target; callers fall back to translate().
inline TranslatedQuery entry_points(const Viewpoint& source, const Viewpoint& target,
                                    std::string_view item,
                                    const std::optional<Query>& original = std::nullopt) {
  if (!source.in_domain(item) || !target.in_domain(item))
    throw Error(ErrorCode::NotInIntersection,
                "'" + std::string(item) + "' is not in both '" + source.id() + "' and '" +
                    target.id() + "'",
                {std::string(item)});

  auto weights = target.term_weights(item);
  if (weights.empty())
    throw Error(ErrorCode::NotInIntersection,
                "'" + std::string(item) + "' has no indexed terms in '" + target.id() + "'",
                {std::string(item)});

  auto build = [](const std::vector<TermWeight>& ranked) {
    std::vector<std::string> terms;
    for (std::size_t i = 0; i < ranked.size() && i < kEntryPointTerms; ++i)
      terms.push_back(ranked[i].term);
    return Query::from_terms(std::span<const std::string>(terms));
  };

  Query query = build(weights);
  auto hits = target.evaluate(query).hits;
  if (hits.empty() || hits.front().item != item) {
    std::vector<TermWeight> unique;
    for (const auto& tw : weights)
      if (target.document_frequency(tw.term) == 1) unique.push_back(tw);
    if (!unique.empty()) query = build(unique);
  }
  Query from = original.value_or(query);
  return {std::move(query), std::move(from), {}, TranslationStrategy::IntersectionEntry};
}

/// Mines term-level rules from item co-occurrence over the domain
/// intersection. For each term a of `a`, the candidate b maximizing
///   |intersection items indexed under a (in a) and b (in b)|
///   / |intersection items indexed under a (in a)|
/// becomes a rule a -> b if it reaches `min_confidence`. When the identity
/// candidate (b == a) attains the maximum, no rule is emitted.
inline TransitionMapping mine_mappings(const Viewpoint& a, const Viewpoint& b,
                                       double min_confidence) {
  if (!(min_confidence > 0.0 && min_confidence <= 1.0))
    throw Error(ErrorCode::InvalidArgument, "min_confidence must lie in (0, 1]");

  std::vector<TransitionRule> rules;
  for (const auto& term : a.vocabulary()) {
    std::size_t support = 0;
    std::map<std::string, std::size_t> co;
    for (const auto& p : a.postings(term)) {
      const auto& item = a.domain()[p.doc];
      if (!b.in_domain(item)) continue;
      ++support;
      for (const auto& tb : b.item_terms(item)) ++co[tb];
    }
    if (support == 0) continue;

    std::size_t best_count = 0;
    const std::string* best = nullptr;
    for (const auto& [candidate, count] : co) {
      if (count > best_count) {
        best_count = count;
        best = &candidate;
      }
    }
    if (best == nullptr) continue;
    auto identity = co.find(term);
    if (identity != co.end() && identity->second == best_count) continue;

    double confidence = static_cast<double>(best_count) / static_cast<double>(support);
    if (confidence >= min_confidence)
      rules.push_back({term, {*best}, confidence, MappingOrigin::Mined});
  }
  return TransitionMapping(a.id(), b.id(), MappingOrigin::Mined, std::move(rules));
}

/// Rules of `preferred` first; rules of `fallback` only for source terms
/// `preferred` does not cover.
inline TransitionMapping combine_mappings(const TransitionMapping& preferred,
                                          const TransitionMapping& fallback) {
  auto rules = preferred.rules();
  for (const auto& rule : fallback.rules())
    if (!preferred.find(rule.from)) rules.push_back(rule);
  return TransitionMapping(preferred.source_vp(), preferred.target_vp(), preferred.origin(),
                           std::move(rules));
}

}  // namespace vlens
