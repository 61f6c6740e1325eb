#pragma once

#include <iosfwd>
#include <map>
#include <unordered_set>
#include <vector>

#include "countchain/proposition.hpp"
#include "countchain/types.hpp"

namespace countchain {

enum class PlayerStatus { Active, Banned };

struct PlayerAccount {
    PlayerId player_id;
    Points points = 0;
    StakeUnits stake_balance = 0;
    StakeUnits escrowed = 0;
    PlayerStatus status = PlayerStatus::Active;
    StakeUnits paid_out = 0;
};

enum class DeltaReason {
    SubmitterTrue,
    SubmitterFalse,
    VoterTrueMajority,
    VoterFalseMinority,
    VoterFalseMajority,
    VoterTrueMinority,
    InvalidFormat,
};

const char* to_string(DeltaReason r);

struct DeltaEntry {
    PlayerId player_id;
    Points point_delta = 0;
    StakeUnits stake_delta = 0;  // negative: forfeited to the prize pool
    DeltaReason reason = DeltaReason::InvalidFormat;
};

struct ResolutionDelta {
    std::vector<DeltaEntry> entries;

    /// Total stake moved into the prize pool by this delta.
    StakeUnits forfeited() const;
    const DeltaEntry* find(PlayerId p) const;
};

struct PrizePool {
    StakeUnits balance = 0;
};

struct Payout {
    PlayerId player_id;
    StakeUnits amount = 0;
};

/// Inclusive: a balance equal to the threshold is banned.
PlayerStatus ban_check(const PlayerAccount& account, Points ban_threshold);

// Point balances, stake escrow and the prize pool. All mutation goes through
// the owning host; bans are evaluated eagerly after every point change and
// are permanent.
class Ledger {
public:
    explicit Ledger(const SystemConfig& cfg);

    void open_account(PlayerId id, StakeUnits initial_stake);
    bool has_account(PlayerId id) const { return accounts_.contains(id); }
    const PlayerAccount& account(PlayerId id) const;
    const std::map<PlayerId, PlayerAccount>& accounts() const { return accounts_; }

    /// Moves `amount` from the free balance into escrow. False if the balance is short.
    bool escrow(PlayerId id, StakeUnits amount);
    /// Returns escrowed stake to the free balance.
    void release(PlayerId id, StakeUnits amount);

    ResolutionDelta apply_resolution(const Proposition& prop, const Outcome& outcome);
    ResolutionDelta penalize_invalid_submission(PlayerId id, StakeUnits staked_amount);

    /// Pro-rata payout of the whole pool over strictly positive point balances.
    /// Integer largest-remainder apportionment: each payout is within one unit
    /// of its exact share and the pool is emptied.
    std::vector<Payout> distribute_prizes();

    PlayerStatus ban_check(PlayerId id);
    /// Players banned since the last call, in the order they were banned.
    std::vector<PlayerId> take_newly_banned();

    const PrizePool& pool() const { return pool_; }
    StakeUnits total_paid_out() const { return paid_out_; }
    StakeUnits initial_total() const { return initial_total_; }
    /// stakes + escrows + pool + payouts == initial stakes + initial fund
    bool stake_conserved() const;
    Points ban_threshold() const { return ban_threshold_; }

    /// CSV snapshot: player_id,points,stake_balance,escrowed,status
    void write_csv(std::ostream& os) const;

private:
    PlayerAccount& mutable_account(PlayerId id);
    void add_points(PlayerAccount& acct, Points delta);
    void forfeit_escrow(PlayerAccount& acct, StakeUnits amount);
    StakeUnits forfeit_balance(PlayerAccount& acct, StakeUnits amount);

    Points ban_threshold_;
    StakeUnits price_;
    std::map<PlayerId, PlayerAccount> accounts_;
    PrizePool pool_;
    StakeUnits paid_out_ = 0;
    StakeUnits initial_total_ = 0;
    std::unordered_set<PropId> applied_;
    std::vector<PlayerId> newly_banned_;
};

}  // namespace countchain
