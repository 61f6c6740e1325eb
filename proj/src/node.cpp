#include "countchain/node.hpp"

#include <algorithm>

#include "countchain/hash.hpp"

namespace countchain {
namespace {

bool earlier(const EventRecord& e, SimTime t) { return e.timestamp < t; }
bool later(SimTime t, const EventRecord& e) { return t < e.timestamp; }

}  // namespace

void EventStore::insert(EventRecord event) {
    if (events_.empty() || events_.back().timestamp <= event.timestamp) {
        events_.push_back(std::move(event));
        return;
    }
    auto pos = std::upper_bound(events_.begin(), events_.end(), event.timestamp, later);
    events_.insert(pos, std::move(event));
}

std::span<const EventRecord> EventStore::window(SimTime t_a, SimTime t_b) const {
    if (t_b < t_a) return {};
    auto lo = std::lower_bound(events_.begin(), events_.end(), t_a, earlier);
    auto hi = std::upper_bound(lo, events_.end(), t_b, later);
    return {lo, hi};
}

void EventStore::evict_before(SimTime cutoff) {
    auto pos = std::lower_bound(events_.begin(), events_.end(), cutoff, earlier);
    events_.erase(events_.begin(), pos);
}

NodeBehavior make_node(PlayerId id, double honesty_rate, bool corrupted, DishonestAction action) {
    if (!(honesty_rate >= 0.0 && honesty_rate <= 1.0)) throw CountChainError("honesty_rate must be in [0, 1]");
    NodeBehavior n;
    n.player_id = id;
    n.corrupted = corrupted;
    n.honesty_rate = corrupted ? 0.0 : honesty_rate;
    n.dishonest_action = action;
    return n;
}

void ingest_event(NodeBehavior& node, EventRecord event) { node.local_store.insert(std::move(event)); }

std::optional<PropositionRequest> maybe_submit(const NodeBehavior& node, const EventRecord& event, Rng& rng) {
    if (!rng.bernoulli(node.effective_honesty())) return std::nullopt;
    return PropositionRequest{node.player_id, event.input_id, event.timestamp, hash_input_id(event.input_id)};
}

std::optional<Vote> produce_vote(NodeBehavior& node, const Proposition& prop, SimTime now, Rng& rng) {
    if (!rng.bernoulli(node.effective_honesty())) {
        if (node.dishonest_action == DishonestAction::Abstain) return std::nullopt;
        return Vote{node.player_id, VoteValue::False, std::nullopt, now};
    }

    Vote vote{node.player_id, VoteValue::False, std::nullopt, now};
    for (const auto& rec : node.local_store.window(prop.t_a, prop.t_b)) {
        ++node.hash_evaluations;
        if (hash_input_id(rec.input_id) == prop.digest && !vote.claimed_input_id) {
            vote.value = VoteValue::True;
            vote.claimed_input_id = rec.input_id;
        }
    }
    return vote;
}

}  // namespace countchain
