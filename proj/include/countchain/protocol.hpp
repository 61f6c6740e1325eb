#pragma once

#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "countchain/hash.hpp"
#include "countchain/ledger.hpp"
#include "countchain/proposition.hpp"
#include "countchain/rng.hpp"
#include "countchain/types.hpp"

namespace countchain {

enum class SubmitStatus {
    Accepted,
    InvalidDigest,
    Duplicate,
    BannedSubmitter,
    InsufficientStake,
    InsufficientActivePlayers,
};

enum class VoteStatus {
    Accepted,
    NotAssigned,
    AlreadyVoted,
    ClosedProposition,
    InvalidProof,
    Late,
    InsufficientStake,
};

const char* to_string(SubmitStatus s);
const char* to_string(VoteStatus s);

struct SubmitResult {
    SubmitStatus status = SubmitStatus::Accepted;
    std::optional<PropId> prop_id;

    bool accepted() const { return status == SubmitStatus::Accepted; }
};

/// Builds the host-side proposition for a validated request. The window is
/// centred on the request timestamp and the raw input ID is dropped.
Proposition create_proposition(const PropositionRequest& req, const SystemConfig& cfg, SimTime now, PropId id);

/// Draws `n` distinct players uniformly without replacement from `active`
/// (sorted, duplicate-free) excluding the submitter. Result is in draw order.
/// Throws CountChainError when fewer than `n` candidates remain.
std::vector<PlayerId> assign_verifiers(std::span<const PlayerId> active, PlayerId submitter, int n, Rng& rng);

// Host state machine: proposition pool, verifier assignment, vote intake,
// resolution and the event counter. Single owner; callers serialise commands.
class Host {
public:
    explicit Host(const SystemConfig& cfg);

    const SystemConfig& config() const { return cfg_; }

    void register_player(PlayerId id, StakeUnits initial_stake);

    SubmitResult submit_request(const PropositionRequest& req, SimTime now);
    VoteStatus cast_vote(PropId prop_id, const Vote& vote, SimTime now);

    /// Throws CountChainError if the proposition is unknown, already resolved
    /// or its deadline has not passed.
    Outcome resolve_proposition(PropId prop_id, SimTime now);

    /// Resolves every open proposition with deadline <= now, earliest
    /// deadline first (ties by id). Each one is resolved at its own deadline.
    std::vector<Outcome> resolve_due(SimTime now);
    /// Resolves only the earliest open proposition with deadline <= now, if any.
    std::optional<Outcome> resolve_next(SimTime now);
    std::vector<Outcome> resolve_all();

    std::vector<Payout> distribute_prizes();

    std::uint64_t counter() const { return counter_; }
    const Ledger& ledger() const { return ledger_; }
    const Proposition& proposition(PropId id) const;
    const std::vector<Proposition>& propositions() const { return props_; }
    std::size_t open_count() const { return open_.size(); }
    /// Sorted ids of players that are neither banned nor unknown.
    std::span<const PlayerId> active_players() const { return active_; }
    bool is_active(PlayerId id) const;
    /// Delta produced by the most recent resolution or penalty.
    const ResolutionDelta& last_delta() const { return last_delta_; }

private:
    Proposition& mutable_proposition(PropId id);
    bool is_duplicate(const Digest& digest, SimTime t_a, SimTime t_b) const;
    void sync_bans();

    SystemConfig cfg_;
    Ledger ledger_;
    Rng rng_;
    std::vector<Proposition> props_;  // index = id - 1
    std::vector<PropId> open_;        // ordered by (deadline, id)
    std::vector<PlayerId> active_;
    std::unordered_map<Digest, std::vector<PropId>, DigestHash> by_digest_;
    std::uint64_t counter_ = 0;
    ResolutionDelta last_delta_;
};

}  // namespace countchain
