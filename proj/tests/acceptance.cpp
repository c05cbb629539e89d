// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fixture.hpp"
#include "generators.hpp"
#include "oracles.hpp"
#include "vlens/catalog.hpp"
#include "vlens/fusion.hpp"
#include "vlens/ingest.hpp"
#include "vlens/json_io.hpp"
#include "vlens/orchestrator.hpp"

using namespace vlens;
namespace fs = std::filesystem;

namespace {

class Check {
 public:
  void expect(bool ok, const std::string& what) {
    ++checks_;
    if (ok) return;
    if (failures_.size() < 5) failures_.push_back(what);
    ++failed_;
  }
  bool ok() const { return failed_ == 0; }
  std::size_t checks() const { return checks_; }
  std::string summary() const {
    std::ostringstream out;
    out << failed_ << " of " << checks_ << " checks failed";
    for (const auto& f : failures_) out << "; " << f;
    return out.str();
  }
  std::string note;

 private:
  std::size_t checks_ = 0;
  std::size_t failed_ = 0;
  std::vector<std::string> failures_;
};

int failed_criteria = 0;

void criterion(const char* id, const char* title, double limit_s, const std::function<void(Check&)>& body) {
  Check check;
  auto start = std::chrono::steady_clock::now();
  try {
    body(check);
  } catch (const std::exception& e) {
    check.expect(false, std::string("unexpected exception: ") + e.what());
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  bool in_time = limit_s <= 0 || secs < limit_s;
  bool pass = check.ok() && in_time;
  if (!pass) ++failed_criteria;
  std::printf("%s %s %s: %zu checks, %.3f s", pass ? "PASS" : "FAIL", id, title, check.checks(), secs);
  if (limit_s > 0) std::printf(" (limit %.0f s)", limit_s);
  if (!check.note.empty()) std::printf(", %s", check.note.c_str());
  if (!check.ok()) std::printf(" -- %s", check.summary().c_str());
  if (!in_time) std::printf(" -- over time limit");
  std::printf("\n");
  std::fflush(stdout);
}

std::string str(std::size_t n) { return std::to_string(n); }

// ---------------------------------------------------------------------------

void fixture_fidelity(Check& c) {
  auto g = fixture::cyclone();
  std::size_t components = 0, units = 0;
  for (const auto& item : g.items()) {
    components += item.kind == ItemKind::ProductComponent;
    units += item.kind == ItemKind::OrgUnit;
  }
  c.expect(components == 19, "ProductComponent count " + str(components));
  c.expect(units == 3, "OrgUnit count " + str(units));

  const InformationItem* actor = nullptr;
  for (const auto& item : g.items())
    if (item.kind == ItemKind::Actor && item.name == "ActorX") actor = &item;
  c.expect(actor != nullptr, "no Actor named ActorX");
  if (actor == nullptr) return;
  const auto* team1 = g.find("team-1");
  c.expect(team1 != nullptr && team1->kind == ItemKind::OrgUnit, "team-1 is not an OrgUnit");
  auto members = neighbors(g, "team-1", RelationKind::Composition);
  c.expect(std::find(members.begin(), members.end(), actor->id) != members.end(), "ActorX not linked to team 1");
}

// ---------------------------------------------------------------------------

std::string containment_run(Check& c, std::size_t trials) {
  gen::Rng rng(2024);
  std::string transcript;
  for (std::size_t t = 0; t < trials; ++t) {
    auto raw = gen::random_graph(rng);
    auto spec = gen::random_spec(rng, raw, "v");
    auto vp = materialize_viewpoint(spec, gen::build(raw));
    auto terms = gen::random_terms(rng);
    QueryFilters filters;
    if (gen::coin(rng, 0.2)) filters.kind = kAllItemKinds[gen::pick(rng, kAllItemKinds.size())];
    auto rs = vp.evaluate(Query::from_terms(std::span<const std::string>(terms), filters));

    auto domain = oracle::domain(raw.items, raw.relationships, spec);
    std::set<ItemId> allowed(domain.begin(), domain.end());
    for (const auto& h : rs.hits) {
      c.expect(allowed.count(h.item) == 1, "trial " + str(t) + ": hit " + h.item + " outside the domain");
      if (filters.kind) {
        const auto& item = *std::find_if(raw.items.begin(), raw.items.end(), [&](const auto& i) { return i.id == h.item; });
        c.expect(item.kind == *filters.kind, "trial " + str(t) + ": hit " + h.item + " ignores the kind filter");
      }
    }
    transcript += json_io::to_json(rs).dump();
    transcript += '\n';
  }
  return transcript;
}

void domain_containment(Check& c) {
  constexpr std::size_t kTrials = 1000;
  auto first = containment_run(c, kTrials);
  Check discard;
  auto second = containment_run(discard, kTrials);
  c.expect(first == second, "re-run result sets differ");
  c.note = str(kTrials) + " trials, " + str(first.size()) + " transcript bytes";
}

// ---------------------------------------------------------------------------

std::vector<oracle::FusionSet> as_sets(const std::vector<FusionEntry>& entries) {
  std::vector<oracle::FusionSet> out;
  for (const auto& e : entries) out.push_back({e.results.viewpoint_id, e.results.hits, e.reliability, e.drift});
  return out;
}

std::vector<Hit> sorted_hits(std::vector<Hit> hits) {
  std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
    return a.score != b.score ? a.score > b.score : a.item < b.item;
  });
  return hits;
}

bool same_as_oracle(const std::vector<FusionEntry>& entries) {
  auto got = merge(entries);
  auto want = oracle::fuse(as_sets(entries));
  if (got.ranked.size() != want.size()) return false;
  for (std::size_t i = 0; i < want.size(); ++i) {
    if (got.ranked[i].item != want[i].item || got.ranked[i].score != want[i].score) return false;
    if (got.ranked[i].provenance.size() != want[i].sources.size()) return false;
    for (std::size_t j = 0; j < want[i].sources.size(); ++j)
      if (got.ranked[i].provenance[j].viewpoint_id != want[i].sources[j]) return false;
  }
  return true;
}

double grid(std::size_t k) { return static_cast<double>(k) / 10.0; }

FusionEntry fusion_entry(const std::string& vp, std::vector<Hit> hits, double r, double d) {
  return {{vp, Query::from_text("q"), sorted_hits(std::move(hits))}, r, d};
}

void fusion_oracle(Check& c) {
  std::size_t configs = 0;
  auto run = [&](const std::vector<FusionEntry>& entries, const std::string& label) {
    ++configs;
    c.expect(same_as_oracle(entries), label);
  };

  // One viewpoint, up to two items: every score pattern (absent or 0.1..1.0)
  // with every reliability and drift on the grid.
  for (std::size_t a = 0; a <= 10; ++a)
    for (std::size_t b = 0; b <= 10; ++b)
      for (std::size_t r = 0; r <= 10; ++r)
        for (std::size_t d = 0; d <= 10; ++d) {
          std::vector<Hit> hits;
          if (a) hits.push_back({"i0", grid(a)});
          if (b) hits.push_back({"i1", grid(b)});
          run({fusion_entry("v0", hits, grid(r), grid(d))}, "1vp " + str(a) + "," + str(b));
        }

  // Two viewpoints over one shared item: every combination.
  for (std::size_t s0 = 0; s0 <= 10; ++s0)
    for (std::size_t r0 = 0; r0 <= 10; ++r0)
      for (std::size_t d0 = 0; d0 <= 10; ++d0)
        for (std::size_t s1 = 0; s1 <= 10; ++s1)
          for (std::size_t r1 = 0; r1 <= 10; ++r1)
            for (std::size_t d1 = 0; d1 <= 10; ++d1) {
              std::vector<Hit> h0, h1;
              if (s0) h0.push_back({"i0", grid(s0)});
              if (s1) h1.push_back({"i0", grid(s1)});
              run({fusion_entry("v0", h0, grid(r0), grid(d0)), fusion_entry("v1", h1, grid(r1), grid(d1))},
                  "2vp shared item");
            }

  // Every (viewpoints, items) size up to 5 x 20, sampled on the same grid.
  gen::Rng rng(3);
  for (std::size_t v = 1; v <= 5; ++v)
    for (std::size_t n = 1; n <= 20; ++n)
      for (int trial = 0; trial < 300; ++trial) {
        std::vector<FusionEntry> entries;
        for (std::size_t k = 0; k < v; ++k) {
          std::vector<Hit> hits;
          for (std::size_t i = 0; i < n; ++i)
            if (gen::coin(rng, 0.6)) hits.push_back({"i" + str(i), grid(1 + gen::pick(rng, 10))});
          entries.push_back(fusion_entry("v" + str(k), hits, grid(gen::pick(rng, 11)), grid(gen::pick(rng, 11))));
        }
        std::shuffle(entries.begin(), entries.end(), rng);
        run(entries, str(v) + "vp x " + str(n) + " items");
      }
  c.note = str(configs) + " configurations";
}

// ---------------------------------------------------------------------------

std::vector<FusionEntry> random_fusion_input(gen::Rng& rng) {
  std::size_t v = 1 + gen::pick(rng, 5), n = 1 + gen::pick(rng, 20);
  std::vector<FusionEntry> entries;
  for (std::size_t k = 0; k < v; ++k) {
    std::vector<Hit> hits;
    for (std::size_t i = 0; i < n; ++i)
      if (gen::coin(rng, 0.6)) hits.push_back({"i" + str(i), grid(1 + gen::pick(rng, 10))});
    entries.push_back(fusion_entry("v" + str(k), hits, grid(gen::pick(rng, 11)), grid(gen::pick(rng, 11))));
  }
  return entries;
}

double fused_score(const MergedResult& m, const ItemId& id) {
  for (const auto& r : m.ranked)
    if (r.item == id) return r.score;
  return 0.0;
}

void fusion_properties(Check& c) {
  constexpr int kCases = 500;
  gen::Rng rng(4);
  for (int t = 0; t < kCases; ++t) {
    auto entries = random_fusion_input(rng);
    auto base = merge(entries);
    std::shuffle(entries.begin(), entries.end(), rng);
    c.expect(merge(entries) == base, "permutation case " + std::to_string(t));
  }
  for (int t = 0; t < kCases; ++t) {
    auto entries = random_fusion_input(rng);
    auto base = merge(entries);
    std::vector<Hit> hits;
    for (std::size_t i = 0; i < 20; ++i)
      if (gen::coin(rng, 0.5)) hits.push_back({"i" + str(i), grid(1 + gen::pick(rng, 10))});
    entries.push_back(fusion_entry("v-extra", hits, grid(1 + gen::pick(rng, 10)), grid(1 + gen::pick(rng, 10))));
    auto more = merge(entries);
    for (const auto& h : hits)
      c.expect(fused_score(more, h.item) >= fused_score(base, h.item) &&
                   fused_score(more, h.item) > 0.0,
               "dominance case " + std::to_string(t) + " item " + h.item);
  }
  for (int t = 0; t < kCases; ++t) {
    auto entries = random_fusion_input(rng);
    auto base = merge(entries);
    auto& victim = entries[gen::pick(rng, entries.size())];
    double factor = std::exp(std::uniform_real_distribution<double>(-8.0, 8.0)(rng));
    for (auto& h : victim.results.hits) h.score *= factor;
    auto scaled = merge(entries);
    bool same = scaled.ranked.size() == base.ranked.size();
    for (std::size_t i = 0; same && i < base.ranked.size(); ++i)
      same = scaled.ranked[i].item == base.ranked[i].item && scaled.ranked[i].score == base.ranked[i].score;
    c.expect(same, "scale case " + std::to_string(t));
  }
  c.note = "500 cases per property";
}

// ---------------------------------------------------------------------------

void transition_fidelity(Check& c) {
  gen::Rng rng(5);
  std::size_t trials = 0, unique_cases = 0, all_cases = 0, unindexed = 0;
  while (trials < 300) {
    auto raw = gen::random_graph(rng, {.min_items = 4, .max_items = 30});
    auto sa = gen::random_spec(rng, raw, "a");
    auto sb = gen::random_spec(rng, raw, "b");
    for (auto* s : {&sa, &sb}) {
      if (s->field_weights.empty()) s->field_weights["name"] = 1.0;
      s->field_weights["attr:tag"] = 1.0;
    }
    auto da = oracle::domain(raw.items, raw.relationships, sa);
    auto db = oracle::domain(raw.items, raw.relationships, sb);
    std::vector<ItemId> shared;
    std::set_intersection(da.begin(), da.end(), db.begin(), db.end(), std::back_inserter(shared));
    if (shared.empty()) continue;
    ++trials;

    // Plant a term of its own on some shared items, a common one on others.
    std::set<ItemId> planted;
    for (auto& item : raw.items) {
      if (!std::binary_search(shared.begin(), shared.end(), item.id)) continue;
      if (gen::coin(rng, 0.5)) {
        item.attributes["tag"] = "planted" + str(trials) + "x" + item.id.substr(1);
        planted.insert(item.id);
      } else if (gen::coin(rng, 0.5)) {
        item.attributes["tag"] = "common";
      }
    }
    auto g = gen::build(raw);
    auto a = materialize_viewpoint(sa, g);
    auto b = materialize_viewpoint(sb, g);

    for (const auto& id : shared) {
      if (b.item_terms(id).empty()) {
        ++unindexed;
        continue;
      }
      ++all_cases;
      auto tq = entry_points(a, b, id);
      c.expect(tq.strategy == TranslationStrategy::IntersectionEntry, "strategy for " + id);
      auto hits = b.evaluate(tq.query).hits;
      bool member = std::any_of(hits.begin(), hits.end(), [&](const Hit& h) { return h.item == id; });
      c.expect(member, "trial " + str(trials) + ": " + id + " missing for '" + tq.query.text() + "'");
      if (planted.count(id)) {
        ++unique_cases;
        c.expect(!hits.empty() && hits.front().item == id,
                 "trial " + str(trials) + ": " + id + " not rank 1 for '" + tq.query.text() + "'");
      }
    }
  }
  c.note = str(trials) + " fixtures, " + str(unique_cases) + " unique-term cases, " + str(all_cases) +
           " membership cases, " + str(unindexed) + " shared items with no target terms";
}

// ---------------------------------------------------------------------------

void mining_soundness(Check& c) {
  gen::Rng rng(6);
  std::size_t rules = 0;
  for (int t = 0; t < 300; ++t) {
    auto raw = gen::random_graph(rng, {.min_items = 2, .max_items = 25});
    auto g = gen::build(raw);
    auto sa = gen::random_spec(rng, raw, "a");
    auto sb = gen::random_spec(rng, raw, "b");
    double min_conf = grid(1 + gen::pick(rng, 10));
    auto m = mine_mappings(materialize_viewpoint(sa, g), materialize_viewpoint(sb, g), min_conf);
    auto ca = oracle::Corpus::of(raw.items, raw.relationships, sa);
    auto cb = oracle::Corpus::of(raw.items, raw.relationships, sb);
    for (const auto& rule : m.rules()) {
      ++rules;
      auto co = oracle::cooccurrence(ca, cb, rule.from, rule.to.at(0));
      c.expect(rule.confidence == co.confidence(), "confidence of " + rule.from + " differs from the count");
      c.expect(co.confidence() >= min_conf, "rule " + rule.from + " below min_confidence");
    }

    // Disjoint: split the graph's items by kind.
    ViewpointSpec da{"da", "a0", "", 1.0, {KindClause{ItemKind::ProductComponent}}, {}};
    ViewpointSpec db{"db", "a0", "", 1.0, {KindClause{ItemKind::Document}}, {}};
    auto empty = mine_mappings(materialize_viewpoint(da, g), materialize_viewpoint(db, g), min_conf);
    c.expect(empty.rules().empty(), "disjoint domains produced rules");
  }
  c.note = str(rules) + " mined rules checked";
}

// ---------------------------------------------------------------------------

void round_trip(Check& c) {
  gen::Rng rng(7);
  auto graph_round_trip = [&](const PpcoGraph& g, const std::string& label) {
    auto text = serialize_ppco(g);
    auto back = parse_ppco(text);
    c.expect(back == g, label + ": parse(serialize(g)) != g");
    c.expect(serialize_ppco(back) == text, label + ": serialization not stable");
  };
  for (int t = 0; t < 200; ++t)
    graph_round_trip(gen::build(gen::random_graph(rng, {.min_items = 0, .max_items = 40, .awkward = true})),
                     "random graph " + std::to_string(t));
  graph_round_trip(fixture::cyclone(), "cyclone");

  auto dir = fs::temp_directory_path() / ("vlens-acceptance-" + std::to_string(std::random_device{}()));
  fs::create_directories(dir);
  auto catalog = fixture::catalog();
  catalog = catalog.with_mapping(
      mine_mappings(catalog.viewpoint(fixture::kManufacturing), catalog.viewpoint(fixture::kShape), 0.5));
  save_catalog(catalog, dir / "catalog.xml");
  auto loaded = load_catalog(dir / "catalog.xml");
  c.expect(loaded == catalog, "catalog save/load identity");
  c.expect(serialize_catalog(loaded) == serialize_catalog(catalog), "catalog bytes differ after reload");
  fs::remove_all(dir);
  c.note = "200 random graphs + cyclone + catalog";
}

// ---------------------------------------------------------------------------

void walkthrough(Check& c) {
  auto snapshot = std::make_shared<const Catalog>(fixture::catalog());
  std::vector<std::string> vps = {fixture::kShape, fixture::kManufacturing};
  auto session = open_session("walkthrough", snapshot, "actor-x", vps);

  const auto& merged = session.submit_query(Query::from_text("cylindrical barrel"));
  c.expect(!merged.ranked.empty(), "no results");
  if (merged.ranked.empty()) return;
  std::set<std::string> cited;
  for (const auto& m : merged.ranked)
    for (const auto& p : m.provenance) cited.insert(p.viewpoint_id);
  c.expect(cited.count(fixture::kShape) && cited.count(fixture::kManufacturing), "provenance misses a viewpoint");
  const auto& top = merged.ranked.front();
  c.expect(top.item == "barrel" && top.provenance.size() == 2, "barrel not first with both viewpoints");

  auto tq = session.transition(fixture::kManufacturing, ItemId("barrel"));
  c.expect(tq.strategy == TranslationStrategy::IntersectionEntry, "strategy " + std::string(to_string(tq.strategy)));
  auto hits = snapshot->viewpoint(fixture::kManufacturing).evaluate(tq.query).hits;
  c.expect(!hits.empty() && hits.front().item == "barrel", "anchor not rank 1 in the target viewpoint");
  const auto& after = session.submit_query(tq.query);
  c.expect(!after.ranked.empty() && after.ranked.front().item == "barrel", "anchor not first after the transition");
  c.expect(session.history().size() == 3, "history length " + str(session.history().size()));
}

}  // namespace

int main() {
  criterion("AC1", "fixture fidelity", 1, fixture_fidelity);
  criterion("AC2", "domain containment", 10, domain_containment);
  criterion("AC3", "fusion oracle equivalence", 30, fusion_oracle);
  criterion("AC4", "fusion algebraic properties", 0, fusion_properties);
  criterion("AC5", "transition fidelity", 10, transition_fidelity);
  criterion("AC6", "mining soundness", 0, mining_soundness);
  criterion("AC7", "round-trip", 0, round_trip);
  criterion("AC8", "ActorX walkthrough", 5, walkthrough);
  return failed_criteria == 0 ? 0 : 1;
}
