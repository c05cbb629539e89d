#pragma once

/// A viewpoint is an actor's filtered, independently indexed slice of the
/// PPCO universe: a domain (the items a filter selects) plus an access
/// method (term index and evaluator) over that domain.
///
/// Scoring: score(item) = sum over query terms t, over indexed fields f, of
///   weight(f) * tf(t, item, f) * ln(1 + |domain| / df(t))
/// with document frequencies taken from the viewpoint's own domain.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "vlens/error.hpp"
#include "vlens/ppco.hpp"
#include "vlens/text.hpp"

namespace vlens {

struct KindClause {
  ItemKind kind;
  friend bool operator==(const KindClause&, const KindClause&) = default;
};

struct AttributeClause {
  std::string name;
  std::string value;
  friend bool operator==(const AttributeClause&, const AttributeClause&) = default;
};

struct ReachableClause {
  ItemId root;
  RelationKind via;
  friend bool operator==(const ReachableClause&, const ReachableClause&) = default;
};

using FilterClause = std::variant<KindClause, AttributeClause, ReachableClause>;

/// Index fields: "name", "description", "attributes" (all values) or
/// "attr:<name>" (one attribute). An empty map indexes name, description and
/// attributes at weight 1.
using FieldWeights = std::map<std::string, double>;

struct ViewpointSpec {
  std::string id;
  ItemId actor;
  std::string context;
  double importance = 1.0;
  std::vector<FilterClause> filter;  // conjunction; empty selects every item
  FieldWeights field_weights;

  friend bool operator==(const ViewpointSpec&, const ViewpointSpec&) = default;
};

struct QueryFilters {
  std::optional<ItemKind> kind;
  std::map<std::string, std::string> attributes;

  bool empty() const noexcept { return !kind && attributes.empty(); }
  friend bool operator==(const QueryFilters&, const QueryFilters&) = default;
};

/// Non-empty multiset of normalized tokens plus optional structured filters.
class Query {
 public:
  /// Each raw term is run through the tokenizer, so "Vortex-Finder" yields
  /// two terms. Throws InvalidQuery when nothing survives.
  static Query from_terms(std::span<const std::string> raw, QueryFilters filters = {}) {
    std::vector<std::string> terms;
    for (const auto& r : raw)
      for (auto& t : tokenize(r)) terms.push_back(std::move(t));
    return Query(std::move(terms), std::move(filters));
  }

  static Query from_terms(std::initializer_list<std::string> raw, QueryFilters filters = {}) {
    std::vector<std::string> v(raw);
    return from_terms(std::span<const std::string>(v), std::move(filters));
  }

  static Query from_text(std::string_view text, QueryFilters filters = {}) {
    return Query(tokenize(text), std::move(filters));
  }

  const std::vector<std::string>& terms() const noexcept { return terms_; }
  const QueryFilters& filters() const noexcept { return filters_; }

  std::set<std::string> term_set() const { return {terms_.begin(), terms_.end()}; }

  std::string text() const {
    std::string out;
    for (const auto& t : terms_) {
      if (!out.empty()) out += ' ';
      out += t;
    }
    return out;
  }

  friend bool operator==(const Query&, const Query&) = default;

 private:
  Query(std::vector<std::string> terms, QueryFilters filters)
      : terms_(std::move(terms)), filters_(std::move(filters)) {
    if (terms_.empty()) throw Error(ErrorCode::InvalidQuery, "query has no terms after normalization");
  }

  std::vector<std::string> terms_;
  QueryFilters filters_;
};

struct Hit {
  ItemId item;
  double score = 0.0;
  friend bool operator==(const Hit&, const Hit&) = default;
};

struct ResultSet {
  std::string viewpoint_id;
  Query query;
  std::vector<Hit> hits;  // score descending, ties by ascending id
};

enum class FieldSource { Name, Description, AllAttributes, Attribute };

struct IndexedField {
  std::string key;
  FieldSource source = FieldSource::Name;
  std::string attribute;  // for FieldSource::Attribute
  double weight = 1.0;
};

struct Posting {
  std::uint32_t doc = 0;               // position in domain()
  std::vector<std::uint32_t> tf;       // per field, aligned with fields()
};

struct TermWeight {
  std::string term;
  double weight = 0.0;  // sum over fields of weight(f) * tf * idf
};

inline constexpr std::string_view kEmptyDomainWarning = "EmptyDomain";

class Viewpoint {
 public:
  /// Errors: InvalidSpec, UnknownActor, UnknownItem (reachability root),
  /// UnknownAttributeInFilter. An empty domain is reported through
  /// warnings(), not thrown.
  static Viewpoint materialize(const ViewpointSpec& spec, const PpcoGraph& graph);

  const ViewpointSpec& spec() const noexcept { return spec_; }
  const std::string& id() const noexcept { return spec_.id; }
  const PpcoGraph& graph() const noexcept { return graph_; }
  const std::vector<IndexedField>& fields() const noexcept { return fields_; }
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

  /// Sorted item ids.
  const std::vector<ItemId>& domain() const noexcept { return domain_; }

  bool in_domain(std::string_view id) const { return doc_of(id).has_value(); }

  std::optional<std::uint32_t> doc_of(std::string_view id) const {
    auto it = std::lower_bound(domain_.begin(), domain_.end(), id);
    if (it == domain_.end() || *it != id) return std::nullopt;
    return static_cast<std::uint32_t>(it - domain_.begin());
  }

  /// Sorted indexed terms.
  std::vector<std::string> vocabulary() const {
    std::vector<std::string> out;
    out.reserve(index_.size());
    for (const auto& [term, postings] : index_) out.push_back(term);
    return out;
  }

  bool has_term(std::string_view term) const { return index_.find(term) != index_.end(); }

  std::span<const Posting> postings(std::string_view term) const {
    auto it = index_.find(term);
    if (it == index_.end()) return {};
    return it->second;
  }

  std::size_t document_frequency(std::string_view term) const { return postings(term).size(); }

  double idf(std::string_view term) const {
    std::size_t df = document_frequency(term);
    if (df == 0) return 0.0;
    return std::log(1.0 + static_cast<double>(domain_.size()) / static_cast<double>(df));
  }

  /// Ids of the domain items indexed under `term` (any field), sorted.
  std::vector<ItemId> items_with_term(std::string_view term) const {
    std::vector<ItemId> out;
    for (const auto& p : postings(term)) out.push_back(domain_[p.doc]);
    return out;
  }

  /// Sorted distinct terms indexed for `item`; empty outside the domain.
  std::span<const std::string> item_terms(std::string_view item) const {
    auto doc = doc_of(item);
    if (!doc) return {};
    return doc_terms_[*doc];
  }

  /// Every term indexed for `item` with its tf-idf weight, sorted by weight
  /// descending then term ascending. Empty if the item is outside the domain.
  std::vector<TermWeight> term_weights(std::string_view item) const {
    std::vector<TermWeight> out;
    auto doc = doc_of(item);
    if (!doc) return out;
    for (const auto& term : doc_terms_[*doc]) {
      double idf_t = idf(term);
      double w = 0.0;
      auto list = postings(term);
      auto p = std::lower_bound(list.begin(), list.end(), *doc,
                                [](const Posting& a, std::uint32_t d) { return a.doc < d; });
      for (std::size_t f = 0; f < fields_.size(); ++f) w += fields_[f].weight * p->tf[f] * idf_t;
      out.push_back({term, w});
    }
    std::sort(out.begin(), out.end(), [](const TermWeight& a, const TermWeight& b) {
      if (a.weight != b.weight) return a.weight > b.weight;
      return a.term < b.term;
    });
    return out;
  }

  ResultSet evaluate(const Query& query) const;

 private:
  Viewpoint() = default;

  bool passes(const QueryFilters& filters, const InformationItem& item) const {
    if (filters.kind && item.kind != *filters.kind) return false;
    for (const auto& [key, value] : filters.attributes) {
      auto it = item.attributes.find(key);
      if (it == item.attributes.end() || it->second != value) return false;
    }
    return true;
  }

  ViewpointSpec spec_;
  PpcoGraph graph_;
  std::vector<IndexedField> fields_;
  std::vector<ItemId> domain_;
  std::map<std::string, std::vector<Posting>, std::less<>> index_;
  std::vector<std::vector<std::string>> doc_terms_;  // per doc, sorted unique
  std::vector<std::string> warnings_;
};

namespace detail {

inline std::vector<IndexedField> resolve_fields(const ViewpointSpec& spec) {
  FieldWeights weights = spec.field_weights;
  if (weights.empty()) weights = {{"attributes", 1.0}, {"description", 1.0}, {"name", 1.0}};

  std::vector<IndexedField> fields;
  for (const auto& [key, weight] : weights) {
    if (!(weight > 0.0) || !std::isfinite(weight))
      throw Error(ErrorCode::InvalidSpec,
                  "viewpoint '" + spec.id + "': field weight for '" + key + "' must be positive",
                  {spec.id});
    IndexedField field{key, FieldSource::Name, "", weight};
    if (key == "name") {
      field.source = FieldSource::Name;
    } else if (key == "description") {
      field.source = FieldSource::Description;
    } else if (key == "attributes") {
      field.source = FieldSource::AllAttributes;
    } else if (key.starts_with("attr:") && key.size() > 5) {
      field.source = FieldSource::Attribute;
      field.attribute = key.substr(5);
    } else {
      throw Error(ErrorCode::InvalidSpec,
                  "viewpoint '" + spec.id + "': unknown index field '" + key + "'", {spec.id});
    }
    fields.push_back(std::move(field));
  }
  return fields;
}

inline std::vector<std::string> field_tokens(const IndexedField& field, const InformationItem& item) {
  switch (field.source) {
    case FieldSource::Name: return tokenize(item.name);
    case FieldSource::Description: return tokenize(item.description);
    case FieldSource::AllAttributes: {
      std::vector<std::string> out;
      for (const auto& [key, value] : item.attributes)
        for (auto& t : tokenize(value)) out.push_back(std::move(t));
      return out;
    }
    case FieldSource::Attribute: {
      auto it = item.attributes.find(field.attribute);
      return it == item.attributes.end() ? std::vector<std::string>{} : tokenize(it->second);
    }
  }
  return {};
}

}  // namespace detail

inline Viewpoint Viewpoint::materialize(const ViewpointSpec& spec, const PpcoGraph& graph) {
  if (spec.id.empty()) throw Error(ErrorCode::InvalidSpec, "viewpoint id is empty");
  if (!(spec.importance >= 0.0 && spec.importance <= 1.0))
    throw Error(ErrorCode::InvalidSpec, "viewpoint '" + spec.id + "': importance must lie in [0, 1]",
                {spec.id});
  const auto* actor = graph.find(spec.actor);
  if (actor == nullptr || actor->kind != ItemKind::Actor)
    throw Error(ErrorCode::UnknownActor,
                "viewpoint '" + spec.id + "': '" + spec.actor + "' is not an Actor in the graph",
                {spec.actor});

  Viewpoint vp;
  vp.spec_ = spec;
  vp.graph_ = graph;
  vp.fields_ = detail::resolve_fields(spec);

  // Start from every item and narrow clause by clause.
  std::vector<bool> keep(graph.size(), true);
  auto items = graph.items();
  for (const auto& clause : spec.filter) {
    if (const auto* c = std::get_if<KindClause>(&clause)) {
      for (std::size_t i = 0; i < items.size(); ++i) keep[i] = keep[i] && items[i].kind == c->kind;
    } else if (const auto* c = std::get_if<AttributeClause>(&clause)) {
      if (!graph.has_attribute_name(c->name))
        throw Error(ErrorCode::UnknownAttributeInFilter,
                    "viewpoint '" + spec.id + "': no item has attribute '" + c->name + "'",
                    {c->name});
      for (std::size_t i = 0; i < items.size(); ++i) {
        auto it = items[i].attributes.find(c->name);
        keep[i] = keep[i] && it != items[i].attributes.end() && it->second == c->value;
      }
    } else if (const auto* c = std::get_if<ReachableClause>(&clause)) {
      auto reachable = graph.reachable_from(c->root, c->via);  // sorted, like items
      std::size_t r = 0;
      for (std::size_t i = 0; i < items.size(); ++i) {
        bool hit = r < reachable.size() && reachable[r] == items[i].id;
        if (hit) ++r;
        keep[i] = keep[i] && hit;
      }
    }
  }

  for (std::size_t i = 0; i < items.size(); ++i)
    if (keep[i]) vp.domain_.push_back(items[i].id);
  if (vp.domain_.empty()) vp.warnings_.emplace_back(kEmptyDomainWarning);

  vp.doc_terms_.resize(vp.domain_.size());
  for (std::uint32_t doc = 0; doc < vp.domain_.size(); ++doc) {
    const auto& item = graph.at(vp.domain_[doc]);
    std::map<std::string, std::vector<std::uint32_t>> tf;
    for (std::size_t f = 0; f < vp.fields_.size(); ++f) {
      for (auto& token : detail::field_tokens(vp.fields_[f], item)) {
        auto& counts = tf[std::move(token)];
        counts.resize(vp.fields_.size(), 0);
        ++counts[f];
      }
    }
    for (auto& [term, counts] : tf) {
      vp.doc_terms_[doc].push_back(term);
      vp.index_[term].push_back({doc, std::move(counts)});
    }
  }
  return vp;
}

inline ResultSet Viewpoint::evaluate(const Query& query) const {
  std::vector<double> score(domain_.size(), 0.0);
  for (const auto& term : query.terms()) {
    auto it = index_.find(term);
    if (it == index_.end()) continue;
    double idf_t = idf(term);
    for (const auto& p : it->second)
      for (std::size_t f = 0; f < fields_.size(); ++f)
        score[p.doc] += fields_[f].weight * p.tf[f] * idf_t;
  }

  ResultSet result{spec_.id, query, {}};
  for (std::uint32_t doc = 0; doc < domain_.size(); ++doc) {
    if (!(score[doc] > 0.0)) continue;
    if (!query.filters().empty() && !passes(query.filters(), graph_.at(domain_[doc]))) continue;
    result.hits.push_back({domain_[doc], score[doc]});
  }
  std::stable_sort(result.hits.begin(), result.hits.end(), [](const Hit& a, const Hit& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.item < b.item;
  });
  return result;
}

inline Viewpoint materialize_viewpoint(const ViewpointSpec& spec, const PpcoGraph& graph) {
  return Viewpoint::materialize(spec, graph);
}

inline ResultSet evaluate(const Viewpoint& vp, const Query& query) { return vp.evaluate(query); }

inline std::vector<std::string> vocabulary(const Viewpoint& vp) { return vp.vocabulary(); }

}  // namespace vlens
