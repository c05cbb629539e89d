#pragma once

// Weighted-sum fusion of per-viewpoint result sets:
//
//   fused(i) = sum over entries e containing i of
//              reliability(e) * drift(e) * norm(raw(i, e) / max raw(e))
//
// norm() rounds to kScoreQuantum so that rescaling a result set, which
// perturbs raw/max by a few ulps, cannot reorder or alter the output.
// Contributions are summed in ascending viewpoint-id order, which makes the
// result independent of entry order down to the last bit.

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "vlens/error.hpp"
#include "vlens/viewpoint.hpp"

namespace vlens {

inline constexpr double kScoreQuantum = 1e-9;

struct FusionEntry {
  ResultSet results;
  double reliability = 1.0;  // defaults to the viewpoint's importance upstream
  double drift = 1.0;        // similarity of this set's query to the original
};

struct Provenance {
  std::string viewpoint_id;
  double raw_score = 0.0;
  double drift = 0.0;
  double reliability = 0.0;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct MergedItem {
  ItemId item;
  double score = 0.0;
  std::vector<Provenance> provenance;  // ascending viewpoint id

  friend bool operator==(const MergedItem&, const MergedItem&) = default;
};

struct MergedResult {
  std::vector<MergedItem> ranked;  // score descending, ties by ascending id

  friend bool operator==(const MergedResult&, const MergedResult&) = default;
};

inline double normalize_score(double raw, double max_raw) {
  return std::round(raw / max_raw / kScoreQuantum) * kScoreQuantum;
}

/// Jaccard similarity of the two term sets.
inline double drift_similarity(const Query& original, const Query& derived) {
  auto a = original.term_set();
  auto b = derived.term_set();
  std::size_t common = 0;
  for (const auto& t : a) common += b.count(t);
  std::size_t total = a.size() + b.size() - common;
  if (total == 0) return 1.0;
  return static_cast<double>(common) / static_cast<double>(total);
}

/// Throws InvalidArgument for an empty input, a weight outside [0, 1] or a
/// repeated viewpoint id.
inline MergedResult merge(std::span<const FusionEntry> entries) {
  if (entries.empty()) throw Error(ErrorCode::InvalidArgument, "fusion input has no entries");

  std::vector<const FusionEntry*> ordered;
  std::set<std::string> ids;
  for (const auto& e : entries) {
    if (!(e.reliability >= 0.0 && e.reliability <= 1.0) || !(e.drift >= 0.0 && e.drift <= 1.0))
      throw Error(ErrorCode::InvalidArgument,
                  "reliability and drift of '" + e.results.viewpoint_id + "' must lie in [0, 1]",
                  {e.results.viewpoint_id});
    if (!ids.insert(e.results.viewpoint_id).second)
      throw Error(ErrorCode::InvalidArgument,
                  "viewpoint '" + e.results.viewpoint_id + "' appears twice",
                  {e.results.viewpoint_id});
    ordered.push_back(&e);
  }
  std::sort(ordered.begin(), ordered.end(), [](const FusionEntry* x, const FusionEntry* y) {
    return x->results.viewpoint_id < y->results.viewpoint_id;
  });

  std::map<ItemId, MergedItem> fused;
  for (const auto* e : ordered) {
    double max_raw = 0.0;
    for (const auto& hit : e->results.hits) max_raw = std::max(max_raw, hit.score);
    if (!(max_raw > 0.0)) continue;
    for (const auto& hit : e->results.hits) {
      auto& m = fused[hit.item];
      m.item = hit.item;
      m.score += e->reliability * e->drift * normalize_score(hit.score, max_raw);
      m.provenance.push_back({e->results.viewpoint_id, hit.score, e->drift, e->reliability});
    }
  }

  MergedResult out;
  out.ranked.reserve(fused.size());
  for (auto& [id, m] : fused) out.ranked.push_back(std::move(m));
  std::stable_sort(out.ranked.begin(), out.ranked.end(),
                   [](const MergedItem& a, const MergedItem& b) { return a.score > b.score; });
  return out;
}

inline MergedResult merge(const std::vector<FusionEntry>& entries) {
  return merge(std::span<const FusionEntry>(entries));
}

}  // namespace vlens
