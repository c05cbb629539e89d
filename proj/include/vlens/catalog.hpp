#pragma once

// The catalog is the only persisted state: one XML file holding the PPCO
// graph, the viewpoint specs and the transition mappings.
//
//   <catalog version="1">
//     <ppco version="1">...</ppco>
//     <viewpoints>
//       <viewpoint id="" actor="" context="" importance="">
//         <filter kind=""/> | <filter attribute="" equals=""/> |
//         <filter reachable_from="" via=""/>
//         <field name="" weight=""/>
//       </viewpoint>
//     </viewpoints>
//     <mappings>
//       <mapping source_vp="" target_vp="" origin="">
//         <rule from="" to="space separated terms" confidence="" origin=""/>
//       </mapping>
//     </mappings>
//   </catalog>
//
// A Catalog value is immutable; the with_* members return an updated copy
// with its viewpoints re-materialized.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <tuple>
#include <vector>

#include "vlens/error.hpp"
#include "vlens/ingest.hpp"
#include "vlens/ppco.hpp"
#include "vlens/transition.hpp"
#include "vlens/viewpoint.hpp"
#include "vlens/xml.hpp"

namespace vlens {

class Catalog {
 public:
  Catalog() = default;

  /// Errors: InvalidSpec (repeated viewpoint id), anything
  /// Viewpoint::materialize throws, UnknownViewpoint for a mapping endpoint,
  /// InvalidArgument for two mappings with the same (source, target, origin).
  static Catalog create(PpcoGraph graph, std::vector<ViewpointSpec> specs,
                        std::vector<TransitionMapping> mappings) {
    Catalog c;
    c.graph_ = std::move(graph);
    std::sort(specs.begin(), specs.end(),
              [](const auto& a, const auto& b) { return a.id < b.id; });
    for (const auto& spec : specs) {
      if (c.viewpoints_.contains(spec.id))
        throw Error(ErrorCode::InvalidSpec, "duplicate viewpoint id '" + spec.id + "'", {spec.id});
      c.viewpoints_.emplace(spec.id, Viewpoint::materialize(spec, c.graph_));
    }
    c.specs_ = std::move(specs);

    auto key = [](const TransitionMapping& m) {
      return std::make_tuple(m.source_vp(), m.target_vp(), m.origin());
    };
    std::sort(mappings.begin(), mappings.end(),
              [&](const auto& a, const auto& b) { return key(a) < key(b); });
    for (std::size_t i = 0; i < mappings.size(); ++i) {
      const auto& m = mappings[i];
      for (const auto* vp : {&m.source_vp(), &m.target_vp()})
        if (!c.viewpoints_.contains(*vp))
          throw Error(ErrorCode::UnknownViewpoint,
                      "mapping references unknown viewpoint '" + *vp + "'", {*vp});
      if (i > 0 && key(mappings[i - 1]) == key(m))
        throw Error(ErrorCode::InvalidArgument,
                    "duplicate " + std::string(to_string(m.origin())) + " mapping " +
                        m.source_vp() + " -> " + m.target_vp(),
                    {m.source_vp(), m.target_vp()});
    }
    c.mappings_ = std::move(mappings);
    return c;
  }

  const PpcoGraph& graph() const noexcept { return graph_; }
  /// Sorted by id.
  const std::vector<ViewpointSpec>& specs() const noexcept { return specs_; }
  /// Sorted by (source, target, origin).
  const std::vector<TransitionMapping>& mappings() const noexcept { return mappings_; }
  const std::map<std::string, Viewpoint, std::less<>>& viewpoints() const noexcept {
    return viewpoints_;
  }

  const Viewpoint* find_viewpoint(std::string_view id) const {
    auto it = viewpoints_.find(id);
    return it == viewpoints_.end() ? nullptr : &it->second;
  }

  const Viewpoint& viewpoint(std::string_view id) const {
    if (const auto* vp = find_viewpoint(id)) return *vp;
    throw Error(ErrorCode::UnknownViewpoint, "no viewpoint '" + std::string(id) + "'",
                {std::string(id)});
  }

  /// The effective mapping from `source` to `target`: manual rules first,
  /// mined rules for any source term the manual rules leave uncovered.
  std::optional<TransitionMapping> mapping_for(std::string_view source,
                                               std::string_view target) const {
    const TransitionMapping* manual = nullptr;
    const TransitionMapping* mined = nullptr;
    for (const auto& m : mappings_) {
      if (m.source_vp() != source || m.target_vp() != target) continue;
      (m.origin() == MappingOrigin::Manual ? manual : mined) = &m;
    }
    if (manual && mined) return combine_mappings(*manual, *mined);
    if (manual) return *manual;
    if (mined) return *mined;
    return std::nullopt;
  }

  /// Replaces the graph; every spec must still materialize.
  Catalog with_graph(PpcoGraph graph) const { return create(std::move(graph), specs_, mappings_); }

  /// Adds or replaces (by id) a viewpoint spec.
  Catalog with_viewpoint(ViewpointSpec spec) const {
    auto specs = specs_;
    auto it = std::find_if(specs.begin(), specs.end(),
                           [&](const auto& s) { return s.id == spec.id; });
    if (it != specs.end())
      *it = std::move(spec);
    else
      specs.push_back(std::move(spec));
    return create(graph_, std::move(specs), mappings_);
  }

  /// Adds or replaces (by source, target and origin) a mapping.
  Catalog with_mapping(TransitionMapping mapping) const {
    auto mappings = mappings_;
    std::erase_if(mappings, [&](const TransitionMapping& m) {
      return m.source_vp() == mapping.source_vp() && m.target_vp() == mapping.target_vp() &&
             m.origin() == mapping.origin();
    });
    mappings.push_back(std::move(mapping));
    return create(graph_, specs_, std::move(mappings));
  }

  friend bool operator==(const Catalog& a, const Catalog& b) {
    return a.graph_ == b.graph_ && a.specs_ == b.specs_ && a.mappings_ == b.mappings_;
  }

 private:
  PpcoGraph graph_;
  std::vector<ViewpointSpec> specs_;
  std::vector<TransitionMapping> mappings_;
  std::map<std::string, Viewpoint, std::less<>> viewpoints_;
};

// ---------------------------------------------------------------------------
// Viewpoint spec XML

inline ViewpointSpec viewpoint_spec_from_xml(const xml::Node& node, const std::string& path) {
  if (node.name != "viewpoint") throw Error::schema_violation(path, "expected <viewpoint>");
  schema::check_attributes(node, path, {"id", "actor"}, {"context", "importance"});
  schema::check_no_text(node, path);

  ViewpointSpec spec;
  spec.id = *node.attribute("id");
  spec.actor = *node.attribute("actor");
  if (const auto* c = node.attribute("context")) spec.context = *c;
  if (const auto* imp = node.attribute("importance"))
    spec.importance = schema::parse_unit_interval(*imp, path, "importance");

  std::size_t filters = 0, fields = 0;
  for (const auto& child : node.children) {
    if (child.name == "filter") {
      auto p = schema::child_path(path, child, ++filters);
      schema::check_leaf(child, p);
      schema::check_no_text(child, p);
      if (child.attribute("kind")) {
        schema::check_attributes(child, p, {"kind"});
        auto kind = parse_item_kind(*child.attribute("kind"));
        if (!kind) throw Error::schema_violation(p, "unknown item kind '" + *child.attribute("kind") + "'");
        spec.filter.push_back(KindClause{*kind});
      } else if (child.attribute("attribute")) {
        schema::check_attributes(child, p, {"attribute", "equals"});
        spec.filter.push_back(AttributeClause{*child.attribute("attribute"), *child.attribute("equals")});
      } else if (child.attribute("reachable_from")) {
        schema::check_attributes(child, p, {"reachable_from", "via"});
        auto via = parse_relation_kind(*child.attribute("via"));
        if (!via) throw Error::schema_violation(p, "unknown relationship kind '" + *child.attribute("via") + "'");
        spec.filter.push_back(ReachableClause{*child.attribute("reachable_from"), *via});
      } else {
        throw Error::schema_violation(p, "filter needs one of kind, attribute, reachable_from");
      }
    } else if (child.name == "field") {
      auto p = schema::child_path(path, child, ++fields);
      schema::check_attributes(child, p, {"name", "weight"});
      schema::check_leaf(child, p);
      schema::check_no_text(child, p);
      double w = schema::parse_non_negative(*child.attribute("weight"), p, "weight");
      if (!spec.field_weights.emplace(*child.attribute("name"), w).second)
        throw Error::schema_violation(p, "duplicate field '" + *child.attribute("name") + "'");
    } else {
      throw Error::schema_violation(path, "unexpected element <" + child.name + ">");
    }
  }
  return spec;
}

inline void append_viewpoint_spec(std::string& out, const ViewpointSpec& spec,
                                  const std::string& indent = "") {
  out += indent + "<viewpoint";
  xml::append_attribute(out, "id", spec.id);
  xml::append_attribute(out, "actor", spec.actor);
  xml::append_attribute(out, "context", spec.context);
  xml::append_attribute(out, "importance", schema::format_decimal(spec.importance));
  if (spec.filter.empty() && spec.field_weights.empty()) {
    out += "/>\n";
    return;
  }
  out += ">\n";
  for (const auto& clause : spec.filter) {
    out += indent + "  <filter";
    if (const auto* c = std::get_if<KindClause>(&clause)) {
      xml::append_attribute(out, "kind", to_string(c->kind));
    } else if (const auto* c = std::get_if<AttributeClause>(&clause)) {
      xml::append_attribute(out, "attribute", c->name);
      xml::append_attribute(out, "equals", c->value);
    } else if (const auto* c = std::get_if<ReachableClause>(&clause)) {
      xml::append_attribute(out, "reachable_from", c->root);
      xml::append_attribute(out, "via", to_string(c->via));
    }
    out += "/>\n";
  }
  for (const auto& [name, weight] : spec.field_weights) {
    out += indent + "  <field";
    xml::append_attribute(out, "name", name);
    xml::append_attribute(out, "weight", schema::format_decimal(weight));
    out += "/>\n";
  }
  out += indent + "</viewpoint>\n";
}

/// Parses a standalone `<viewpoint>` document (the CLI spec-file format).
inline ViewpointSpec parse_viewpoint_spec(std::string_view document) {
  return viewpoint_spec_from_xml(xml::parse(document), "/viewpoint");
}

// ---------------------------------------------------------------------------
// Mapping XML

inline TransitionMapping mapping_from_xml(const xml::Node& node, const std::string& path) {
  schema::check_attributes(node, path, {"source_vp", "target_vp"}, {"origin"});
  schema::check_no_text(node, path);
  MappingOrigin origin = MappingOrigin::Manual;
  if (const auto* o = node.attribute("origin")) {
    auto parsed = parse_mapping_origin(*o);
    if (!parsed) throw Error::schema_violation(path, "unknown origin '" + *o + "'");
    origin = *parsed;
  }

  std::vector<TransitionRule> rules;
  for (const auto& child : node.children) {
    auto p = schema::child_path(path, child, rules.size() + 1);
    if (child.name != "rule") throw Error::schema_violation(path, "unexpected element <" + child.name + ">");
    schema::check_attributes(child, p, {"from", "to"}, {"confidence", "origin"});
    schema::check_leaf(child, p);
    schema::check_no_text(child, p);
    TransitionRule rule;
    rule.from = *child.attribute("from");
    rule.to = tokenize(*child.attribute("to"));
    rule.origin = origin;
    if (const auto* c = child.attribute("confidence"))
      rule.confidence = schema::parse_unit_interval(*c, p, "confidence");
    if (const auto* o = child.attribute("origin")) {
      auto parsed = parse_mapping_origin(*o);
      if (!parsed) throw Error::schema_violation(p, "unknown origin '" + *o + "'");
      rule.origin = *parsed;
    }
    rules.push_back(std::move(rule));
  }
  try {
    return TransitionMapping(*node.attribute("source_vp"), *node.attribute("target_vp"), origin,
                             std::move(rules));
  } catch (const Error& e) {
    throw Error::schema_violation(path, e.what());
  }
}

/// Parses a standalone `<mapping>` document.
inline TransitionMapping parse_mapping(std::string_view document) {
  auto root = xml::parse(document);
  if (root.name != "mapping") throw Error::schema_violation("/" + root.name, "expected <mapping>");
  return mapping_from_xml(root, "/mapping");
}

inline void append_mapping(std::string& out, const TransitionMapping& m,
                           const std::string& indent = "") {
  out += indent + "<mapping";
  xml::append_attribute(out, "source_vp", m.source_vp());
  xml::append_attribute(out, "target_vp", m.target_vp());
  xml::append_attribute(out, "origin", to_string(m.origin()));
  if (m.rules().empty()) {
    out += "/>\n";
    return;
  }
  out += ">\n";
  for (const auto& rule : m.rules()) {
    std::string to;
    for (const auto& t : rule.to) to += (to.empty() ? "" : " ") + t;
    out += indent + "  <rule";
    xml::append_attribute(out, "from", rule.from);
    xml::append_attribute(out, "to", to);
    xml::append_attribute(out, "confidence", schema::format_decimal(rule.confidence));
    xml::append_attribute(out, "origin", to_string(rule.origin));
    out += "/>\n";
  }
  out += indent + "</mapping>\n";
}

// ---------------------------------------------------------------------------
// Catalog XML and files

inline std::string serialize_catalog(const Catalog& catalog) {
  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<catalog version=\"1\">\n";
  append_ppco(out, catalog.graph(), "  ");
  out += "  <viewpoints>\n";
  for (const auto& spec : catalog.specs()) append_viewpoint_spec(out, spec, "    ");
  out += "  </viewpoints>\n  <mappings>\n";
  for (const auto& m : catalog.mappings()) append_mapping(out, m, "    ");
  out += "  </mappings>\n</catalog>\n";
  return out;
}

/// Any inconsistency between the parts (unknown actor, unknown viewpoint in
/// a mapping, ...) is reported as SchemaViolation.
inline Catalog parse_catalog(std::string_view document) {
  auto root = xml::parse(document);
  const std::string path = "/catalog";
  if (root.name != "catalog") throw Error::schema_violation("/" + root.name, "root element must be <catalog>");
  schema::check_attributes(root, path, {"version"});
  if (*root.attribute("version") != "1")
    throw Error::schema_violation(path, "unsupported version '" + *root.attribute("version") + "'");
  schema::check_no_text(root, path);

  std::optional<PpcoGraph> graph;
  std::vector<ViewpointSpec> specs;
  std::vector<TransitionMapping> mappings;
  bool saw_viewpoints = false, saw_mappings = false;
  for (const auto& child : root.children) {
    if (child.name == "ppco" && !graph) {
      graph = graph_from_xml(child, path + "/ppco");
    } else if (child.name == "viewpoints" && !saw_viewpoints) {
      saw_viewpoints = true;
      schema::check_attributes(child, path + "/viewpoints", {});
      schema::check_no_text(child, path + "/viewpoints");
      for (const auto& vp : child.children)
        specs.push_back(viewpoint_spec_from_xml(
            vp, schema::child_path(path + "/viewpoints", vp, specs.size() + 1)));
    } else if (child.name == "mappings" && !saw_mappings) {
      saw_mappings = true;
      schema::check_attributes(child, path + "/mappings", {});
      schema::check_no_text(child, path + "/mappings");
      for (const auto& m : child.children) {
        auto p = schema::child_path(path + "/mappings", m, mappings.size() + 1);
        if (m.name != "mapping") throw Error::schema_violation(path + "/mappings", "unexpected element <" + m.name + ">");
        mappings.push_back(mapping_from_xml(m, p));
      }
    } else {
      throw Error::schema_violation(path, "unexpected element <" + child.name + ">");
    }
  }
  if (!graph) throw Error::schema_violation(path, "missing <ppco>");

  try {
    return Catalog::create(std::move(*graph), std::move(specs), std::move(mappings));
  } catch (const Error& e) {
    auto violation = Error::schema_violation(path, e.what());
    throw violation;
  }
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read '" + path.string() + "'", {path.string()});
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::IoError, "error reading '" + path.string() + "'", {path.string()});
  return buf.str();
}

/// Writes through a sibling temporary file and renames it into place.
inline void write_file_atomically(const std::filesystem::path& path, std::string_view content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write '" + tmp.string() + "'", {path.string()});
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw Error(ErrorCode::IoError, "error writing '" + tmp.string() + "'", {path.string()});
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorCode::IoError, "cannot replace '" + path.string() + "'", {path.string()});
  }
}

inline Catalog load_catalog(const std::filesystem::path& path) {
  return parse_catalog(read_file(path));
}

inline void save_catalog(const Catalog& catalog, const std::filesystem::path& path) {
  write_file_atomically(path, serialize_catalog(catalog));
}

}  // namespace vlens
