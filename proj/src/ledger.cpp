#include "countchain/ledger.hpp"

#include <algorithm>
#include <ostream>
#include <string>

namespace countchain {
namespace {

constexpr Points kSubmitterTruePoints = 4;
constexpr Points kSubmitterFalsePoints = -2;
constexpr Points kInvalidFormatPoints = -2;
constexpr Points kMajorityTruePoints = 1;
constexpr Points kMinorityFalsePoints = -1;

}  // namespace

const char* to_string(DeltaReason r) {
    switch (r) {
        case DeltaReason::SubmitterTrue: return "SubmitterTrue";
        case DeltaReason::SubmitterFalse: return "SubmitterFalse";
        case DeltaReason::VoterTrueMajority: return "VoterTrueMajority";
        case DeltaReason::VoterFalseMinority: return "VoterFalseMinority";
        case DeltaReason::VoterFalseMajority: return "VoterFalseMajority";
        case DeltaReason::VoterTrueMinority: return "VoterTrueMinority";
        case DeltaReason::InvalidFormat: return "InvalidFormat";
    }
    return "?";
}

StakeUnits ResolutionDelta::forfeited() const {
    StakeUnits total = 0;
    for (const auto& e : entries)
        if (e.stake_delta < 0) total -= e.stake_delta;
    return total;
}

const DeltaEntry* ResolutionDelta::find(PlayerId p) const {
    auto it = std::find_if(entries.begin(), entries.end(),
                           [p](const DeltaEntry& e) { return e.player_id == p; });
    return it == entries.end() ? nullptr : &*it;
}

PlayerStatus ban_check(const PlayerAccount& account, Points ban_threshold) {
    if (account.status == PlayerStatus::Banned) return PlayerStatus::Banned;
    return account.points <= ban_threshold ? PlayerStatus::Banned : PlayerStatus::Active;
}

Ledger::Ledger(const SystemConfig& cfg)
    : ban_threshold_(cfg.ban_threshold), price_(cfg.proposition_price) {
    if (cfg.initial_prize_fund < 0) throw CountChainError("initial_prize_fund must be non-negative");
    pool_.balance = cfg.initial_prize_fund;
    initial_total_ = cfg.initial_prize_fund;
}

void Ledger::open_account(PlayerId id, StakeUnits initial_stake) {
    if (initial_stake < 0) throw CountChainError("initial stake must be non-negative");
    auto [it, inserted] = accounts_.try_emplace(id);
    if (!inserted) throw CountChainError("player " + std::to_string(id.value) + " already registered");
    it->second.player_id = id;
    it->second.stake_balance = initial_stake;
    initial_total_ += initial_stake;
}

const PlayerAccount& Ledger::account(PlayerId id) const {
    auto it = accounts_.find(id);
    if (it == accounts_.end()) throw CountChainError("unknown player " + std::to_string(id.value));
    return it->second;
}

PlayerAccount& Ledger::mutable_account(PlayerId id) {
    auto it = accounts_.find(id);
    if (it == accounts_.end()) throw CountChainError("unknown player " + std::to_string(id.value));
    return it->second;
}

bool Ledger::escrow(PlayerId id, StakeUnits amount) {
    auto& acct = mutable_account(id);
    if (amount < 0 || acct.stake_balance < amount) return false;
    acct.stake_balance -= amount;
    acct.escrowed += amount;
    return true;
}

void Ledger::release(PlayerId id, StakeUnits amount) {
    auto& acct = mutable_account(id);
    if (amount < 0 || acct.escrowed < amount) throw CountChainError("release exceeds escrow");
    acct.escrowed -= amount;
    acct.stake_balance += amount;
}

void Ledger::add_points(PlayerAccount& acct, Points delta) {
    acct.points += delta;
    if (acct.status == PlayerStatus::Active &&
        countchain::ban_check(acct, ban_threshold_) == PlayerStatus::Banned) {
        acct.status = PlayerStatus::Banned;
        newly_banned_.push_back(acct.player_id);
    }
}

void Ledger::forfeit_escrow(PlayerAccount& acct, StakeUnits amount) {
    if (amount < 0 || acct.escrowed < amount) throw CountChainError("forfeit exceeds escrow");
    acct.escrowed -= amount;
    pool_.balance += amount;
}

StakeUnits Ledger::forfeit_balance(PlayerAccount& acct, StakeUnits amount) {
    const StakeUnits taken = std::min(acct.stake_balance, amount);
    acct.stake_balance -= taken;
    pool_.balance += taken;
    return taken;
}

ResolutionDelta Ledger::apply_resolution(const Proposition& prop, const Outcome& outcome) {
    if (prop.id != outcome.prop_id) throw CountChainError("outcome does not belong to proposition");
    if (prop.status == PropositionStatus::Open) throw CountChainError("proposition is not resolved");
    if (!applied_.insert(prop.id).second)
        throw CountChainError("resolution already applied for proposition " + std::to_string(prop.id.value));

    // Validate every participant before touching any balance.
    (void)account(prop.submitter_id);
    for (PlayerId v : prop.verifier_ids) (void)account(v);

    ResolutionDelta delta;
    delta.entries.reserve(prop.verifier_ids.size() + 1);
    auto& submitter = mutable_account(prop.submitter_id);

    if (outcome.decided) {
        release(prop.submitter_id, prop.submitter_escrow);
        add_points(submitter, kSubmitterTruePoints);
        delta.entries.push_back({prop.submitter_id, kSubmitterTruePoints, 0, DeltaReason::SubmitterTrue});
    } else {
        forfeit_escrow(submitter, prop.submitter_escrow);
        add_points(submitter, kSubmitterFalsePoints);
        delta.entries.push_back(
            {prop.submitter_id, kSubmitterFalsePoints, -prop.submitter_escrow, DeltaReason::SubmitterFalse});
    }

    for (PlayerId v : prop.verifier_ids) {
        auto& acct = mutable_account(v);
        auto it = prop.votes.find(v);
        if (it != prop.votes.end() && it->second.tally == Tally::InvalidProof) continue;  // charged at vote time

        const bool silent = it == prop.votes.end();
        const bool voted_true = !silent && it->second.tally == Tally::True;
        const StakeUnits escrowed = silent ? 0 : it->second.escrowed;

        if (outcome.decided) {
            if (voted_true) {
                release(v, escrowed);
                add_points(acct, kMajorityTruePoints);
                delta.entries.push_back({v, kMajorityTruePoints, 0, DeltaReason::VoterTrueMajority});
            } else {
                // Silence counts as a False vote, stake included.
                const StakeUnits lost = silent ? forfeit_balance(acct, price_) : escrowed;
                if (!silent) forfeit_escrow(acct, escrowed);
                add_points(acct, kMinorityFalsePoints);
                delta.entries.push_back({v, kMinorityFalsePoints, -lost, DeltaReason::VoterFalseMinority});
            }
        } else {
            release(v, escrowed);
            delta.entries.push_back(
                {v, 0, 0, voted_true ? DeltaReason::VoterTrueMinority : DeltaReason::VoterFalseMajority});
        }
    }
    return delta;
}

ResolutionDelta Ledger::penalize_invalid_submission(PlayerId id, StakeUnits staked_amount) {
    auto& acct = mutable_account(id);
    forfeit_escrow(acct, staked_amount);
    add_points(acct, kInvalidFormatPoints);
    ResolutionDelta delta;
    delta.entries.push_back({id, kInvalidFormatPoints, -staked_amount, DeltaReason::InvalidFormat});
    return delta;
}

std::vector<Payout> Ledger::distribute_prizes() {
    __int128 positive_sum = 0;
    for (const auto& [id, acct] : accounts_)
        if (acct.points > 0) positive_sum += acct.points;
    if (positive_sum == 0) return {};

    // Largest-remainder apportionment: floor shares first, then the leftover
    // units go one each to the largest fractional parts (ties by player id).
    struct Share {
        PlayerAccount* acct;
        StakeUnits amount;
        __int128 remainder;
    };
    const __int128 pool_at_start = pool_.balance;
    std::vector<Share> shares;
    StakeUnits assigned = 0;
    for (auto& [id, acct] : accounts_) {
        if (acct.points <= 0) continue;
        const __int128 num = pool_at_start * acct.points;
        const auto amount = static_cast<StakeUnits>(num / positive_sum);
        shares.push_back({&acct, amount, num % positive_sum});
        assigned += amount;
    }
    auto leftover = static_cast<std::size_t>(pool_.balance - assigned);
    std::vector<std::size_t> order(shares.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return shares[a].remainder > shares[b].remainder; });
    for (std::size_t i = 0; i < leftover && i < order.size(); ++i) ++shares[order[i]].amount;

    std::vector<Payout> payouts;
    payouts.reserve(shares.size());
    for (auto& s : shares) {
        payouts.push_back({s.acct->player_id, s.amount});
        s.acct->paid_out += s.amount;
        paid_out_ += s.amount;
        pool_.balance -= s.amount;
        add_points(*s.acct, -s.acct->points);
    }
    return payouts;
}

PlayerStatus Ledger::ban_check(PlayerId id) {
    auto& acct = mutable_account(id);
    if (acct.status == PlayerStatus::Active &&
        countchain::ban_check(acct, ban_threshold_) == PlayerStatus::Banned) {
        acct.status = PlayerStatus::Banned;
        newly_banned_.push_back(id);
    }
    return acct.status;
}

std::vector<PlayerId> Ledger::take_newly_banned() {
    std::vector<PlayerId> out;
    out.swap(newly_banned_);
    return out;
}

bool Ledger::stake_conserved() const {
    StakeUnits held = pool_.balance + paid_out_;
    for (const auto& [id, acct] : accounts_) {
        if (acct.stake_balance < 0 || acct.escrowed < 0) return false;
        held += acct.stake_balance + acct.escrowed;
    }
    return pool_.balance >= 0 && held == initial_total_;
}

void Ledger::write_csv(std::ostream& os) const {
    os << "player_id,points,stake_balance,escrowed,status\n";
    for (const auto& [id, acct] : accounts_) {
        os << id.value << ',' << acct.points << ',' << acct.stake_balance << ',' << acct.escrowed << ','
           << (acct.status == PlayerStatus::Active ? "Active" : "Banned") << '\n';
    }
}

}  // namespace countchain
