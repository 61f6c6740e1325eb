#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "countchain/proposition.hpp"
#include "countchain/rng.hpp"
#include "countchain/types.hpp"

namespace countchain {

// What a node does on a dishonest action. Either way the host tallies False.
enum class DishonestAction { VoteFalse, Abstain };

// Time-ordered local copy of every event delivered to one node.
class EventStore {
public:
    void insert(EventRecord event);
    /// Events with t_a <= timestamp <= t_b, in time order.
    std::span<const EventRecord> window(SimTime t_a, SimTime t_b) const;
    /// Drops events older than `cutoff`.
    void evict_before(SimTime cutoff);
    std::size_t size() const { return events_.size(); }

private:
    std::vector<EventRecord> events_;
};

struct NodeBehavior {
    PlayerId player_id;
    double honesty_rate = 1.0;
    bool corrupted = false;
    DishonestAction dishonest_action = DishonestAction::VoteFalse;
    EventStore local_store;
    std::uint64_t hash_evaluations = 0;

    /// Corrupted nodes always act with honesty 0.
    double effective_honesty() const { return corrupted ? 0.0 : honesty_rate; }
};

NodeBehavior make_node(PlayerId id, double honesty_rate, bool corrupted,
                       DishonestAction action = DishonestAction::VoteFalse);

void ingest_event(NodeBehavior& node, EventRecord event);

/// With probability equal to the node's honesty, a well-formed request for `event`.
std::optional<PropositionRequest> maybe_submit(const NodeBehavior& node, const EventRecord& event, Rng& rng);

/// An assigned verifier's response. An honest action scans the local store
/// over the proposition window and votes True only with a matching preimage.
/// A dishonest action votes False (or stays silent, per the node's setting).
std::optional<Vote> produce_vote(NodeBehavior& node, const Proposition& prop, SimTime now, Rng& rng);

}  // namespace countchain
