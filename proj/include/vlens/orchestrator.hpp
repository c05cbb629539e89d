#pragma once

/// Multi-viewpoint seek sessions. A session binds an actor, an ordered set
/// of active viewpoints (the first is the primary one), the catalog's
/// transition mappings and the fusion function. Every submitted query and
/// every viewpoint switch is appended to an immutable history.
///
/// A Session is single-writer. It holds its own catalog snapshot, so a
/// re-ingest elsewhere never changes a running session.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "vlens/catalog.hpp"
#include "vlens/error.hpp"
#include "vlens/fusion.hpp"
#include "vlens/transition.hpp"
#include "vlens/viewpoint.hpp"

namespace vlens {

/// Sum over query terms of df(t) / |domain|; 0 for an empty domain.
inline double collection_goodness(const Viewpoint& vp, const Query& q) {
  if (vp.domain().empty()) return 0.0;
  double sum = 0.0;
  for (const auto& t : q.terms())
    sum += static_cast<double>(vp.document_frequency(t)) / static_cast<double>(vp.domain().size());
  return sum;
}

/// Top-k viewpoints by goodness, ties by ascending id. Returns all of them,
/// in the same order, when k >= vps.size().
inline std::vector<std::string> select_collections(const Query& q,
                                                   std::span<const Viewpoint* const> vps,
                                                   std::size_t k) {
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "k must be at least 1");
  std::vector<std::pair<double, const Viewpoint*>> scored;
  for (const auto* vp : vps) scored.emplace_back(collection_goodness(*vp, q), vp);
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second->id() < b.second->id();
  });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < scored.size() && i < k; ++i) out.push_back(scored[i].second->id());
  return out;
}

enum class StepKind { Query, Transition };

constexpr std::string_view to_string(StepKind kind) noexcept {
  return kind == StepKind::Query ? "query" : "transition";
}

struct ViewpointQuery {
  std::string viewpoint_id;
  TranslatedQuery translated;
};

struct SessionStep {
  SessionStep(std::size_t seq_, std::int64_t timestamp, StepKind kind_, Query query_)
      : seq(seq_), timestamp_ms(timestamp), kind(kind_), query(std::move(query_)) {}

  std::size_t seq = 0;  // 1-based
  std::int64_t timestamp_ms = 0;
  StepKind kind = StepKind::Query;
  Query query;  // submitted query, or the translated query of a transition

  // Query steps.
  std::vector<ViewpointQuery> consulted;
  std::shared_ptr<const MergedResult> result;

  // Transition steps.
  std::string target_vp;
  std::optional<ItemId> anchor;
  std::optional<TranslatedQuery> translation;
};

using Clock = std::function<std::int64_t()>;

inline std::int64_t system_clock_ms() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

class Session {
 public:
  /// Errors: UnknownActor, UnknownViewpoint, InvalidArgument (no viewpoints).
  Session(std::string id, std::shared_ptr<const Catalog> snapshot, ItemId actor,
          std::span<const std::string> viewpoints, Clock clock = system_clock_ms)
      : id_(std::move(id)), snapshot_(std::move(snapshot)), actor_(std::move(actor)),
        clock_(std::move(clock)) {
    const auto* item = snapshot_->graph().find(actor_);
    if (item == nullptr || item->kind != ItemKind::Actor)
      throw Error(ErrorCode::UnknownActor, "'" + actor_ + "' is not an Actor", {actor_});
    if (viewpoints.empty())
      throw Error(ErrorCode::InvalidArgument, "a session needs at least one viewpoint");
    for (const auto& vp : viewpoints) {
      snapshot_->viewpoint(vp);
      if (std::find(active_.begin(), active_.end(), vp) == active_.end()) active_.push_back(vp);
    }
  }

  const std::string& id() const noexcept { return id_; }
  const ItemId& actor() const noexcept { return actor_; }
  const Catalog& catalog() const noexcept { return *snapshot_; }
  const std::optional<Query>& original_query() const noexcept { return original_; }
  const std::vector<std::string>& active_viewpoints() const noexcept { return active_; }
  std::span<const SessionStep> history() const noexcept { return history_; }

  /// Result of the most recent query step, if any.
  const MergedResult* latest_result() const {
    for (auto it = history_.rbegin(); it != history_.rend(); ++it)
      if (it->result) return it->result.get();
    return nullptr;
  }

  /// Query of the most recent step, if any.
  std::optional<Query> last_query() const {
    if (history_.empty()) return std::nullopt;
    return history_.back().query;
  }

  /// Translates `q` for each selected viewpoint (via the mapping from the
  /// primary viewpoint when one exists), evaluates, and fuses with
  /// reliability = importance and drift = similarity to the session's first
  /// query. `k` limits how many active viewpoints are consulted.
  const MergedResult& submit_query(const Query& q, std::optional<std::size_t> k = std::nullopt) {
    std::vector<const Viewpoint*> active;
    for (const auto& id : active_) active.push_back(&snapshot_->viewpoint(id));
    auto selected = select_collections(q, active, k.value_or(active.size()));

    Query original = original_.value_or(q);
    const std::string& primary = active_.front();

    std::vector<ViewpointQuery> consulted;
    std::vector<FusionEntry> entries;
    for (const auto& vp_id : selected) {
      const auto& vp = snapshot_->viewpoint(vp_id);
      TranslatedQuery tq = identity_fallback(q);
      if (vp_id != primary)
        if (auto mapping = snapshot_->mapping_for(primary, vp_id)) tq = translate(*mapping, q);
      double drift = drift_similarity(original, tq.query);
      entries.push_back({vp.evaluate(tq.query), vp.spec().importance, drift});
      consulted.push_back({vp_id, std::move(tq)});
    }

    auto merged = std::make_shared<const MergedResult>(merge(entries));
    if (!original_) original_ = q;

    SessionStep step(next_seq(), clock_(), StepKind::Query, q);
    step.consulted = std::move(consulted);
    step.result = merged;
    history_.push_back(std::move(step));
    return *history_.back().result;
  }

  /// Switches to `target_vp`, carrying the seek context. With an anchor that
  /// lies in the target domain, the entry-point query for it is used;
  /// otherwise the last query is rewritten through the mapping from the
  /// primary viewpoint, or passed unchanged. The target becomes primary.
  ///
  /// Errors: UnknownViewpoint, AnchorNotInLastResult, NoQueryInSession.
  TranslatedQuery transition(const std::string& target_vp,
                             const std::optional<ItemId>& anchor = std::nullopt) {
    const auto& target = snapshot_->viewpoint(target_vp);
    const MergedItem* anchored = nullptr;
    if (anchor) {
      const auto* latest = latest_result();
      if (latest != nullptr)
        for (const auto& m : latest->ranked)
          if (m.item == *anchor) anchored = &m;
      if (anchored == nullptr)
        throw Error(ErrorCode::AnchorNotInLastResult,
                    "'" + *anchor + "' is not in the session's latest result", {*anchor});
    }
    auto last = last_query();
    if (!last)
      throw Error(ErrorCode::NoQueryInSession, "session '" + id_ + "' has no query to carry over");

    const std::string& primary = active_.front();
    std::optional<TranslatedQuery> tq;
    if (anchored != nullptr && target.in_domain(*anchor)) {
      const Viewpoint* source = &snapshot_->viewpoint(primary);
      if (!source->in_domain(*anchor))
        for (const auto& p : anchored->provenance) {
          const auto& candidate = snapshot_->viewpoint(p.viewpoint_id);
          if (candidate.in_domain(*anchor)) {
            source = &candidate;
            break;
          }
        }
      try {
        tq = entry_points(*source, target, *anchor, last);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NotInIntersection) throw;
      }
    }
    if (!tq) {
      if (auto mapping = snapshot_->mapping_for(primary, target_vp))
        tq = translate(*mapping, *last);
      else
        tq = identity_fallback(*last);
    }

    std::erase(active_, target_vp);
    active_.insert(active_.begin(), target_vp);

    SessionStep step(next_seq(), clock_(), StepKind::Transition, tq->query);
    step.target_vp = target_vp;
    step.anchor = anchor;
    step.translation = tq;
    history_.push_back(std::move(step));
    return *tq;
  }

 private:
  std::size_t next_seq() const { return history_.size() + 1; }

  std::string id_;
  std::shared_ptr<const Catalog> snapshot_;
  ItemId actor_;
  Clock clock_;
  std::optional<Query> original_;
  std::vector<std::string> active_;
  std::vector<SessionStep> history_;
};

inline Session open_session(std::string id, std::shared_ptr<const Catalog> snapshot, ItemId actor,
                            std::span<const std::string> viewpoints,
                            Clock clock = system_clock_ms) {
  return Session(std::move(id), std::move(snapshot), std::move(actor), viewpoints,
                 std::move(clock));
}

}  // namespace vlens
