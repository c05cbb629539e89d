#pragma once

// JSON wire format of the session API. Lists carry explicit ordering
// fields (rank, seq, order) so clients never depend on container order.

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

#include "vlens/catalog.hpp"
#include "vlens/error.hpp"
#include "vlens/fusion.hpp"
#include "vlens/orchestrator.hpp"
#include "vlens/ppco.hpp"
#include "vlens/transition.hpp"
#include "vlens/viewpoint.hpp"

namespace vlens::json_io {

using nlohmann::json;

inline json error_body(const Error& e) {
  return {{"error", std::string(to_string(e.code()))}, {"message", e.what()}};
}

inline json to_json(const InformationItem& item) {
  json attrs = json::object();
  for (const auto& [k, v] : item.attributes) attrs[k] = v;
  return {{"id", item.id},
          {"kind", std::string(to_string(item.kind))},
          {"name", item.name},
          {"attributes", attrs},
          {"description", item.description}};
}

inline json to_json(const Relationship& rel) {
  return {{"source", rel.source},
          {"target", rel.target},
          {"kind", std::string(to_string(rel.kind))},
          {"weight", rel.weight}};
}

inline json to_json(const QueryFilters& f) {
  json out = json::object();
  if (f.kind) out["kind"] = std::string(to_string(*f.kind));
  if (!f.attributes.empty()) {
    json attrs = json::object();
    for (const auto& [k, v] : f.attributes) attrs[k] = v;
    out["attributes"] = attrs;
  }
  return out;
}

inline json to_json(const Query& q) {
  return {{"terms", q.terms()}, {"text", q.text()}, {"filters", to_json(q.filters())}};
}

inline json to_json(const ResultSet& rs) {
  json hits = json::array();
  std::size_t rank = 0;
  for (const auto& h : rs.hits) hits.push_back({{"rank", ++rank}, {"item", h.item}, {"score", h.score}});
  return {{"viewpoint_id", rs.viewpoint_id}, {"query", to_json(rs.query)}, {"hits", hits}};
}

inline json to_json(const MergedResult& m) {
  json ranked = json::array();
  std::size_t rank = 0;
  for (const auto& item : m.ranked) {
    json prov = json::array();
    for (const auto& p : item.provenance)
      prov.push_back({{"viewpoint_id", p.viewpoint_id},
                      {"raw_score", p.raw_score},
                      {"drift", p.drift},
                      {"reliability", p.reliability}});
    ranked.push_back({{"rank", ++rank}, {"item", item.item}, {"score", item.score}, {"provenance", prov}});
  }
  return {{"ranked", ranked}};
}

inline json to_json(const TransitionRule& rule) {
  return {{"from", rule.from},
          {"to", rule.to},
          {"confidence", rule.confidence},
          {"origin", std::string(to_string(rule.origin))}};
}

inline json to_json(const TranslatedQuery& tq) {
  json applied = json::array();
  for (const auto& a : tq.applied_rules) {
    json r = to_json(a.rule);
    r["index"] = a.index;
    applied.push_back(r);
  }
  return {{"query", to_json(tq.query)},
          {"original", to_json(tq.original)},
          {"applied_rules", applied},
          {"strategy", std::string(to_string(tq.strategy))}};
}

inline json to_json(const TransitionMapping& m) {
  json rules = json::array();
  for (const auto& r : m.rules()) rules.push_back(to_json(r));
  return {{"source_vp", m.source_vp()},
          {"target_vp", m.target_vp()},
          {"origin", std::string(to_string(m.origin()))},
          {"rules", rules}};
}

inline json to_json(const ViewpointSpec& spec) {
  json filter = json::array();
  for (const auto& clause : spec.filter) {
    if (const auto* c = std::get_if<KindClause>(&clause))
      filter.push_back({{"kind", std::string(to_string(c->kind))}});
    else if (const auto* c = std::get_if<AttributeClause>(&clause))
      filter.push_back({{"attribute", c->name}, {"equals", c->value}});
    else if (const auto* c = std::get_if<ReachableClause>(&clause))
      filter.push_back({{"reachable_from", c->root}, {"via", std::string(to_string(c->via))}});
  }
  json weights = json::object();
  for (const auto& [k, w] : spec.field_weights) weights[k] = w;
  return {{"id", spec.id},
          {"actor", spec.actor},
          {"context", spec.context},
          {"importance", spec.importance},
          {"filter", filter},
          {"field_weights", weights}};
}

inline json viewpoint_summary(const Viewpoint& vp, std::size_t order) {
  return {{"order", order},
          {"id", vp.id()},
          {"actor", vp.spec().actor},
          {"context", vp.spec().context},
          {"importance", vp.spec().importance},
          {"domain_size", vp.domain().size()}};
}

inline json to_json(const SessionStep& step) {
  json out = {{"seq", step.seq},
              {"timestamp_ms", step.timestamp_ms},
              {"kind", std::string(to_string(step.kind))},
              {"query", to_json(step.query)}};
  if (step.kind == StepKind::Query) {
    json consulted = json::array();
    std::size_t order = 0;
    for (const auto& c : step.consulted)
      consulted.push_back({{"order", ++order}, {"viewpoint_id", c.viewpoint_id},
                           {"translated", to_json(c.translated)}});
    out["consulted"] = consulted;
    if (step.result) out["result"] = to_json(*step.result);
  } else {
    out["target_vp"] = step.target_vp;
    out["anchor"] = step.anchor ? json(*step.anchor) : json(nullptr);
    if (step.translation) out["translation"] = to_json(*step.translation);
  }
  return out;
}

inline json to_json(const Session& s) {
  json history = json::array();
  for (const auto& step : s.history()) history.push_back(to_json(step));
  return {{"session_id", s.id()},
          {"actor", s.actor()},
          {"original_query", s.original_query() ? to_json(*s.original_query()) : json(nullptr)},
          {"active_viewpoints", s.active_viewpoints()},
          {"history", history}};
}

// ---------------------------------------------------------------------------
// Request parsing. Shape errors are InvalidArgument.

inline const json& require(const json& body, const char* key) {
  if (!body.is_object() || !body.contains(key))
    throw Error(ErrorCode::InvalidArgument, std::string("missing field '") + key + "'");
  return body.at(key);
}

inline std::string require_string(const json& body, const char* key) {
  const auto& v = require(body, key);
  if (!v.is_string()) throw Error(ErrorCode::InvalidArgument, std::string("'") + key + "' must be a string");
  return v.get<std::string>();
}

inline std::vector<std::string> require_strings(const json& body, const char* key) {
  const auto& v = require(body, key);
  if (!v.is_array()) throw Error(ErrorCode::InvalidArgument, std::string("'") + key + "' must be an array");
  std::vector<std::string> out;
  for (const auto& e : v) {
    if (!e.is_string())
      throw Error(ErrorCode::InvalidArgument, std::string("'") + key + "' must hold strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

inline std::optional<double> optional_number(const json& body, const char* key) {
  if (!body.contains(key)) return std::nullopt;
  const auto& v = body.at(key);
  if (!v.is_number()) throw Error(ErrorCode::InvalidArgument, std::string("'") + key + "' must be a number");
  return v.get<double>();
}

inline QueryFilters query_filters_from_json(const json& body) {
  QueryFilters f;
  if (!body.contains("filters")) return f;
  const auto& j = body.at("filters");
  if (!j.is_object()) throw Error(ErrorCode::InvalidArgument, "'filters' must be an object");
  if (j.contains("kind")) {
    auto kind = j.at("kind").is_string() ? parse_item_kind(j.at("kind").get<std::string>()) : std::nullopt;
    if (!kind) throw Error(ErrorCode::InvalidArgument, "unknown item kind in filters");
    f.kind = kind;
  }
  if (j.contains("attributes")) {
    const auto& attrs = j.at("attributes");
    if (!attrs.is_object()) throw Error(ErrorCode::InvalidArgument, "'filters.attributes' must be an object");
    for (const auto& [k, v] : attrs.items()) {
      if (!v.is_string()) throw Error(ErrorCode::InvalidArgument, "attribute filter values must be strings");
      f.attributes[k] = v.get<std::string>();
    }
  }
  return f;
}

inline Query query_from_json(const json& body) {
  auto terms = require_strings(body, "terms");
  return Query::from_terms(std::span<const std::string>(terms), query_filters_from_json(body));
}

inline ViewpointSpec viewpoint_spec_from_json(const json& body) {
  ViewpointSpec spec;
  spec.id = require_string(body, "id");
  spec.actor = require_string(body, "actor");
  if (body.contains("context")) spec.context = require_string(body, "context");
  if (auto imp = optional_number(body, "importance")) spec.importance = *imp;
  if (body.contains("filter")) {
    const auto& filter = body.at("filter");
    if (!filter.is_array()) throw Error(ErrorCode::InvalidSpec, "'filter' must be an array");
    for (const auto& c : filter) {
      if (c.contains("kind")) {
        auto kind = parse_item_kind(require_string(c, "kind"));
        if (!kind) throw Error(ErrorCode::InvalidSpec, "unknown item kind in filter");
        spec.filter.push_back(KindClause{*kind});
      } else if (c.contains("attribute")) {
        spec.filter.push_back(AttributeClause{require_string(c, "attribute"), require_string(c, "equals")});
      } else if (c.contains("reachable_from")) {
        auto via = parse_relation_kind(require_string(c, "via"));
        if (!via) throw Error(ErrorCode::InvalidSpec, "unknown relationship kind in filter");
        spec.filter.push_back(ReachableClause{require_string(c, "reachable_from"), *via});
      } else {
        throw Error(ErrorCode::InvalidSpec, "filter clause needs kind, attribute or reachable_from");
      }
    }
  }
  if (body.contains("field_weights")) {
    const auto& w = body.at("field_weights");
    if (!w.is_object()) throw Error(ErrorCode::InvalidSpec, "'field_weights' must be an object");
    for (const auto& [k, v] : w.items()) {
      if (!v.is_number()) throw Error(ErrorCode::InvalidSpec, "field weights must be numbers");
      spec.field_weights[k] = v.get<double>();
    }
  }
  return spec;
}

}  // namespace vlens::json_io
