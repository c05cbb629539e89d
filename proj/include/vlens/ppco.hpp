#pragma once

/// Typed multigraph of the Product-Process-Collaboration-Organization
/// universe. Product components, process tasks, organization units, actors
/// and documents are nodes; composition, interaction, information flow,
/// collaboration and responsibility are edges.
///
/// A PpcoGraph is immutable once built. Copies share storage, so passing
/// graphs by value is cheap and safe across threads.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "vlens/error.hpp"

namespace vlens {

using ItemId = std::string;

enum class ItemKind { ProductComponent, ProcessTask, OrgUnit, Actor, Document };

enum class RelationKind {
  Composition,
  Interaction,
  InformationFlow,
  CollaborationLink,
  ResponsibleFor,
};

inline constexpr std::array<ItemKind, 5> kAllItemKinds = {
    ItemKind::ProductComponent, ItemKind::ProcessTask, ItemKind::OrgUnit, ItemKind::Actor,
    ItemKind::Document};

inline constexpr std::array<RelationKind, 5> kAllRelationKinds = {
    RelationKind::Composition, RelationKind::Interaction, RelationKind::InformationFlow,
    RelationKind::CollaborationLink, RelationKind::ResponsibleFor};

constexpr std::string_view to_string(ItemKind kind) noexcept {
  switch (kind) {
    case ItemKind::ProductComponent: return "ProductComponent";
    case ItemKind::ProcessTask: return "ProcessTask";
    case ItemKind::OrgUnit: return "OrgUnit";
    case ItemKind::Actor: return "Actor";
    case ItemKind::Document: return "Document";
  }
  return "";
}

constexpr std::string_view to_string(RelationKind kind) noexcept {
  switch (kind) {
    case RelationKind::Composition: return "Composition";
    case RelationKind::Interaction: return "Interaction";
    case RelationKind::InformationFlow: return "InformationFlow";
    case RelationKind::CollaborationLink: return "CollaborationLink";
    case RelationKind::ResponsibleFor: return "ResponsibleFor";
  }
  return "";
}

inline std::optional<ItemKind> parse_item_kind(std::string_view text) noexcept {
  for (auto kind : kAllItemKinds)
    if (to_string(kind) == text) return kind;
  return std::nullopt;
}

inline std::optional<RelationKind> parse_relation_kind(std::string_view text) noexcept {
  for (auto kind : kAllRelationKinds)
    if (to_string(kind) == text) return kind;
  return std::nullopt;
}

/// Interaction and CollaborationLink edges carry no direction.
constexpr bool is_symmetric(RelationKind kind) noexcept {
  return kind == RelationKind::Interaction || kind == RelationKind::CollaborationLink;
}

struct InformationItem {
  ItemId id;
  ItemKind kind = ItemKind::ProductComponent;
  std::string name;
  std::map<std::string, std::string> attributes;  // e.g. material, function, behavior
  std::string description;

  friend bool operator==(const InformationItem&, const InformationItem&) = default;
};

struct Relationship {
  ItemId source;
  ItemId target;
  RelationKind kind = RelationKind::Composition;
  double weight = 0.0;  // interaction frequency, 0 = unspecified

  friend bool operator==(const Relationship&, const Relationship&) = default;
};

namespace detail {

// Text must survive an XML round trip: valid UTF-8, no control characters
// other than tab, newline and carriage return.
inline bool is_xml_safe_text(std::string_view text) noexcept {
  std::size_t i = 0;
  while (i < text.size()) {
    auto c = static_cast<unsigned char>(text[i]);
    if (c < 0x80) {
      if (c < 0x20 && c != '\t' && c != '\n' && c != '\r') return false;
      ++i;
      continue;
    }
    std::size_t len = 0;
    char32_t cp = 0;
    if ((c & 0xE0) == 0xC0) {
      len = 2;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + len > text.size()) return false;
    for (std::size_t k = 1; k < len; ++k) {
      auto cc = static_cast<unsigned char>(text[i + k]);
      if ((cc & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000) ||
        cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF) || cp == 0xFFFE || cp == 0xFFFF)
      return false;
    i += len;
  }
  return true;
}

}  // namespace detail

class PpcoGraph {
 public:
  PpcoGraph() : data_(std::make_shared<const Data>()) {}

  /// Validates and freezes a graph. Symmetric edges are stored once with
  /// source < target.
  static PpcoGraph build(std::vector<InformationItem> items,
                         std::vector<Relationship> relationships);

  /// Sorted by id.
  std::span<const InformationItem> items() const noexcept { return data_->items; }
  /// Sorted by (source, target, kind).
  std::span<const Relationship> relationships() const noexcept { return data_->relationships; }

  std::size_t size() const noexcept { return data_->items.size(); }
  bool empty() const noexcept { return data_->items.empty(); }

  const InformationItem* find(std::string_view id) const {
    auto it = data_->index.find(id);
    return it == data_->index.end() ? nullptr : &data_->items[it->second];
  }

  bool contains(std::string_view id) const { return find(id) != nullptr; }

  const InformationItem& at(std::string_view id) const {
    if (const auto* item = find(id)) return *item;
    throw Error(ErrorCode::UnknownItem, "no item with id '" + std::string(id) + "'",
                {std::string(id)});
  }

  /// Items joined to `id` by an edge of `kind`, in either direction, sorted.
  std::vector<ItemId> neighbors(std::string_view id, RelationKind kind) const {
    std::size_t self = index_of(id);
    std::set<ItemId> out;
    for (std::size_t e : data_->incident[self]) {
      const auto& rel = data_->relationships[e];
      if (rel.kind != kind) continue;
      out.insert(rel.source == id ? rel.target : rel.source);
    }
    return {out.begin(), out.end()};
  }

  /// `start` plus every item reachable from it along `kind` edges. Directed
  /// kinds are followed source to target; symmetric kinds both ways.
  std::vector<ItemId> reachable_from(std::string_view start, RelationKind kind) const {
    std::vector<bool> seen(data_->items.size(), false);
    std::vector<std::size_t> stack{index_of(start)};
    seen[stack.back()] = true;
    while (!stack.empty()) {
      std::size_t node = stack.back();
      stack.pop_back();
      const auto& node_id = data_->items[node].id;
      for (std::size_t e : data_->incident[node]) {
        const auto& rel = data_->relationships[e];
        if (rel.kind != kind) continue;
        const ItemId* next = nullptr;
        if (rel.source == node_id)
          next = &rel.target;
        else if (is_symmetric(kind))
          next = &rel.source;
        if (next == nullptr) continue;
        std::size_t n = data_->index.find(*next)->second;
        if (!seen[n]) {
          seen[n] = true;
          stack.push_back(n);
        }
      }
    }
    std::vector<ItemId> out;
    for (std::size_t i = 0; i < seen.size(); ++i)
      if (seen[i]) out.push_back(data_->items[i].id);
    return out;
  }

  /// Every relationship with `id` as an endpoint, in canonical order.
  std::vector<Relationship> relationships_of(std::string_view id) const {
    std::size_t self = index_of(id);
    std::vector<Relationship> out;
    for (std::size_t e : data_->incident[self]) out.push_back(data_->relationships[e]);
    return out;
  }

  std::size_t count(ItemKind kind) const noexcept {
    return static_cast<std::size_t>(std::count_if(
        data_->items.begin(), data_->items.end(),
        [kind](const InformationItem& item) { return item.kind == kind; }));
  }

  /// True if any item carries an attribute with this name.
  bool has_attribute_name(std::string_view name) const {
    return data_->attribute_names.find(name) != data_->attribute_names.end();
  }

  friend bool operator==(const PpcoGraph& a, const PpcoGraph& b) {
    return a.data_->items == b.data_->items && a.data_->relationships == b.data_->relationships;
  }

 private:
  struct Data {
    std::vector<InformationItem> items;
    std::vector<Relationship> relationships;
    std::map<std::string, std::size_t, std::less<>> index;
    std::vector<std::vector<std::size_t>> incident;  // per item, edge indices
    std::set<std::string, std::less<>> attribute_names;
  };

  explicit PpcoGraph(std::shared_ptr<const Data> data) : data_(std::move(data)) {}

  std::size_t index_of(std::string_view id) const {
    auto it = data_->index.find(id);
    if (it == data_->index.end())
      throw Error(ErrorCode::UnknownItem, "no item with id '" + std::string(id) + "'",
                  {std::string(id)});
    return it->second;
  }

  static void check_composition_acyclic(const Data& data);

  std::shared_ptr<const Data> data_;
};

inline PpcoGraph PpcoGraph::build(std::vector<InformationItem> items,
                                  std::vector<Relationship> relationships) {
  auto data = std::make_shared<Data>();

  std::sort(items.begin(), items.end(),
            [](const auto& a, const auto& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& item = items[i];
    if (item.id.empty()) throw Error(ErrorCode::InvalidItem, "item id is empty");
    if (item.name.empty())
      throw Error(ErrorCode::InvalidItem, "item '" + item.id + "' has an empty name", {item.id});
    if (i > 0 && items[i - 1].id == item.id)
      throw Error(ErrorCode::DuplicateId, "duplicate item id '" + item.id + "'", {item.id});
    bool safe = detail::is_xml_safe_text(item.id) && detail::is_xml_safe_text(item.name) &&
                detail::is_xml_safe_text(item.description);
    for (const auto& [key, value] : item.attributes) {
      if (key.empty())
        throw Error(ErrorCode::InvalidItem, "item '" + item.id + "' has an unnamed attribute",
                    {item.id});
      safe = safe && detail::is_xml_safe_text(key) && detail::is_xml_safe_text(value);
    }
    if (!safe)
      throw Error(ErrorCode::InvalidItem,
                  "item '" + item.id + "' contains text that is not valid UTF-8 XML content",
                  {item.id});
  }

  data->items = std::move(items);
  for (std::size_t i = 0; i < data->items.size(); ++i) {
    data->index.emplace(data->items[i].id, i);
    for (const auto& [key, value] : data->items[i].attributes) data->attribute_names.insert(key);
  }

  for (auto& rel : relationships) {
    std::vector<std::string> missing;
    if (!data->index.contains(rel.source)) missing.push_back(rel.source);
    if (!data->index.contains(rel.target) && rel.target != rel.source)
      missing.push_back(rel.target);
    if (!missing.empty())
      throw Error(ErrorCode::DanglingEndpoint,
                  std::string(to_string(rel.kind)) + " edge " + rel.source + " -> " + rel.target +
                      " references an unknown item",
                  missing);
    if (!(rel.weight >= 0.0) || !std::isfinite(rel.weight))
      throw Error(ErrorCode::InvalidArgument,
                  "edge " + rel.source + " -> " + rel.target + " has an invalid weight",
                  {rel.source, rel.target});
    if (is_symmetric(rel.kind) && rel.target < rel.source) std::swap(rel.source, rel.target);
  }

  auto key = [](const Relationship& r) { return std::tie(r.source, r.target, r.kind); };
  std::sort(relationships.begin(), relationships.end(),
            [&](const auto& a, const auto& b) { return key(a) < key(b); });
  for (std::size_t i = 1; i < relationships.size(); ++i) {
    if (key(relationships[i - 1]) == key(relationships[i])) {
      const auto& r = relationships[i];
      throw Error(ErrorCode::DuplicateRelationship,
                  "duplicate " + std::string(to_string(r.kind)) + " edge " + r.source + " -> " +
                      r.target,
                  {r.source, r.target});
    }
  }

  data->relationships = std::move(relationships);
  data->incident.resize(data->items.size());
  for (std::size_t e = 0; e < data->relationships.size(); ++e) {
    const auto& rel = data->relationships[e];
    std::size_t s = data->index.find(rel.source)->second;
    std::size_t t = data->index.find(rel.target)->second;
    data->incident[s].push_back(e);
    if (t != s) data->incident[t].push_back(e);
  }

  check_composition_acyclic(*data);
  return PpcoGraph(std::move(data));
}

inline void PpcoGraph::check_composition_acyclic(const Data& data) {
  enum class Mark : unsigned char { White, Grey, Black };
  std::vector<Mark> mark(data.items.size(), Mark::White);
  struct Frame {
    std::size_t node;
    std::size_t next_edge;
  };

  for (std::size_t root = 0; root < data.items.size(); ++root) {
    if (mark[root] != Mark::White) continue;
    std::vector<Frame> stack{{root, 0}};
    mark[root] = Mark::Grey;
    while (!stack.empty()) {
      Frame& top = stack.back();
      const auto& edges = data.incident[top.node];
      if (top.next_edge == edges.size()) {
        mark[top.node] = Mark::Black;
        stack.pop_back();
        continue;
      }
      const auto& rel = data.relationships[edges[top.next_edge++]];
      if (rel.kind != RelationKind::Composition || rel.source != data.items[top.node].id)
        continue;
      std::size_t child = data.index.find(rel.target)->second;
      if (mark[child] == Mark::Grey) {
        std::vector<std::string> cycle;
        auto it = std::find_if(stack.begin(), stack.end(),
                               [child](const Frame& f) { return f.node == child; });
        for (; it != stack.end(); ++it) cycle.push_back(data.items[it->node].id);
        std::string path;
        for (const auto& id : cycle) path += id + " -> ";
        path += data.items[child].id;
        throw Error(ErrorCode::CompositionCycle, "composition cycle " + path, cycle);
      }
      if (mark[child] == Mark::White) {
        mark[child] = Mark::Grey;
        stack.push_back({child, 0});
      }
    }
  }
}

inline PpcoGraph build_graph(std::vector<InformationItem> items,
                             std::vector<Relationship> relationships) {
  return PpcoGraph::build(std::move(items), std::move(relationships));
}

inline std::vector<ItemId> neighbors(const PpcoGraph& graph, std::string_view id,
                                     RelationKind kind) {
  return graph.neighbors(id, kind);
}

/// Square collaboration-frequency matrix over the items of one kind.
struct InteractionMatrix {
  std::vector<ItemId> ids;      // row/column order
  std::vector<double> values;   // row-major, ids.size() squared

  std::size_t size() const noexcept { return ids.size(); }
  double at(std::size_t row, std::size_t col) const { return values.at(row * ids.size() + col); }
};

inline InteractionMatrix interaction_matrix(const PpcoGraph& graph, ItemKind unit_kind) {
  InteractionMatrix m;
  std::map<std::string_view, std::size_t> position;
  for (const auto& item : graph.items()) {
    if (item.kind != unit_kind) continue;
    position.emplace(item.id, m.ids.size());
    m.ids.push_back(item.id);
  }
  if (m.ids.empty())
    throw Error(ErrorCode::NoItemsOfKind,
                "graph has no items of kind " + std::string(to_string(unit_kind)));

  const std::size_t n = m.ids.size();
  m.values.assign(n * n, 0.0);
  for (const auto& rel : graph.relationships()) {
    if (rel.kind != RelationKind::CollaborationLink || rel.source == rel.target) continue;
    auto s = position.find(rel.source);
    auto t = position.find(rel.target);
    if (s == position.end() || t == position.end()) continue;
    m.values[s->second * n + t->second] = rel.weight;
    m.values[t->second * n + s->second] = rel.weight;
  }
  return m;
}

}  // namespace vlens
