#include "countchain/protocol.hpp"

#include <algorithm>
#include <string>

namespace countchain {

const char* to_string(SubmitStatus s) {
    switch (s) {
        case SubmitStatus::Accepted: return "accepted";
        case SubmitStatus::InvalidDigest: return "invalid_digest";
        case SubmitStatus::Duplicate: return "duplicate";
        case SubmitStatus::BannedSubmitter: return "banned_submitter";
        case SubmitStatus::InsufficientStake: return "insufficient_stake";
        case SubmitStatus::InsufficientActivePlayers: return "insufficient_active_players";
    }
    return "?";
}

const char* to_string(VoteStatus s) {
    switch (s) {
        case VoteStatus::Accepted: return "accepted";
        case VoteStatus::NotAssigned: return "not_assigned";
        case VoteStatus::AlreadyVoted: return "already_voted";
        case VoteStatus::ClosedProposition: return "closed_proposition";
        case VoteStatus::InvalidProof: return "invalid_proof";
        case VoteStatus::Late: return "late";
        case VoteStatus::InsufficientStake: return "insufficient_stake";
    }
    return "?";
}

void validate(const SystemConfig& cfg) {
    if (cfg.total_nodes < 1) throw CountChainError("total_nodes must be positive");
    if (cfg.num_verifiers < 1) throw CountChainError("num_verifiers must be positive");
    if (cfg.num_verifiers > cfg.total_nodes - 1) throw CountChainError("verifiers must be < nodes");
    if (cfg.proposition_price < 0) throw CountChainError("proposition_price must be non-negative");
    if (cfg.proposition_deadline <= SimDuration::zero()) throw CountChainError("proposition_deadline must be positive");
    if (cfg.window_half_width <= SimDuration::zero()) throw CountChainError("window_half_width must be positive");
    if (cfg.ban_threshold > 0) throw CountChainError("ban_threshold must be <= 0");
    if (cfg.initial_prize_fund < 0) throw CountChainError("initial_prize_fund must be non-negative");
}

bool Proposition::is_verifier(PlayerId p) const {
    return std::find(verifier_ids.begin(), verifier_ids.end(), p) != verifier_ids.end();
}

Proposition create_proposition(const PropositionRequest& req, const SystemConfig& cfg, SimTime now, PropId id) {
    Proposition p;
    p.id = id;
    p.digest = req.digest;
    p.t_a = req.timestamp - cfg.window_half_width;
    p.t_b = req.timestamp + cfg.window_half_width;
    p.deadline = now + cfg.proposition_deadline;
    p.submitter_id = req.submitter_id;
    p.status = PropositionStatus::Open;
    return p;
}

std::vector<PlayerId> assign_verifiers(std::span<const PlayerId> active, PlayerId submitter, int n, Rng& rng) {
    if (n < 0) throw CountChainError("verifier count must be non-negative");
    std::vector<PlayerId> pool;
    pool.reserve(active.size());
    for (PlayerId p : active)
        if (p != submitter) pool.push_back(p);
    if (pool.size() < static_cast<std::size_t>(n)) throw CountChainError("insufficient active players");

    // Partial Fisher-Yates: the first n slots end up a uniform n-subset in draw order.
    for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i) {
        const std::size_t j = i + rng.uniform_index(pool.size() - i);
        std::swap(pool[i], pool[j]);
    }
    pool.resize(static_cast<std::size_t>(n));
    return pool;
}

Host::Host(const SystemConfig& cfg) : cfg_(cfg), ledger_(cfg), rng_(derive_seed(cfg.rng_seed, 0x486f7374)) {
    validate(cfg_);
}

void Host::register_player(PlayerId id, StakeUnits initial_stake) {
    ledger_.open_account(id, initial_stake);
    active_.insert(std::upper_bound(active_.begin(), active_.end(), id), id);
}

bool Host::is_active(PlayerId id) const { return std::binary_search(active_.begin(), active_.end(), id); }

const Proposition& Host::proposition(PropId id) const {
    if (id.value == 0 || id.value > props_.size())
        throw CountChainError("unknown proposition " + std::to_string(id.value));
    return props_[id.value - 1];
}

Proposition& Host::mutable_proposition(PropId id) { return const_cast<Proposition&>(std::as_const(*this).proposition(id)); }

bool Host::is_duplicate(const Digest& digest, SimTime t_a, SimTime t_b) const {
    auto it = by_digest_.find(digest);
    if (it == by_digest_.end()) return false;
    return std::any_of(it->second.begin(), it->second.end(), [&](PropId id) {
        const auto& p = props_[id.value - 1];
        return p.t_a <= t_b && t_a <= p.t_b;
    });
}

void Host::sync_bans() {
    for (PlayerId id : ledger_.take_newly_banned()) {
        auto it = std::lower_bound(active_.begin(), active_.end(), id);
        if (it != active_.end() && *it == id) active_.erase(it);
    }
}

SubmitResult Host::submit_request(const PropositionRequest& req, SimTime now) {
    const auto& acct = ledger_.account(req.submitter_id);
    if (acct.status == PlayerStatus::Banned) return {SubmitStatus::BannedSubmitter, std::nullopt};
    if (!ledger_.escrow(req.submitter_id, cfg_.proposition_price))
        return {SubmitStatus::InsufficientStake, std::nullopt};

    if (req.input_id.empty() || hash_input_id(req.input_id) != req.digest) {
        last_delta_ = ledger_.penalize_invalid_submission(req.submitter_id, cfg_.proposition_price);
        sync_bans();
        return {SubmitStatus::InvalidDigest, std::nullopt};
    }

    const SimTime t_a = req.timestamp - cfg_.window_half_width;
    const SimTime t_b = req.timestamp + cfg_.window_half_width;
    if (is_duplicate(req.digest, t_a, t_b)) {
        ledger_.release(req.submitter_id, cfg_.proposition_price);
        return {SubmitStatus::Duplicate, std::nullopt};
    }

    const std::size_t candidates = active_.size() - (is_active(req.submitter_id) ? 1 : 0);
    if (candidates < static_cast<std::size_t>(cfg_.num_verifiers)) {
        ledger_.release(req.submitter_id, cfg_.proposition_price);
        return {SubmitStatus::InsufficientActivePlayers, std::nullopt};
    }

    const PropId id{props_.size() + 1};
    Proposition prop = create_proposition(req, cfg_, now, id);
    prop.submitter_escrow = cfg_.proposition_price;
    prop.verifier_ids = assign_verifiers(active_, req.submitter_id, cfg_.num_verifiers, rng_);
    by_digest_[prop.digest].push_back(id);

    const auto pos = std::upper_bound(open_.begin(), open_.end(), prop.deadline, [this](SimTime d, PropId o) {
        return d < props_[o.value - 1].deadline;
    });
    open_.insert(pos, id);
    props_.push_back(std::move(prop));
    return {SubmitStatus::Accepted, id};
}

VoteStatus Host::cast_vote(PropId prop_id, const Vote& vote, SimTime now) {
    auto& prop = mutable_proposition(prop_id);
    if (prop.status != PropositionStatus::Open) return VoteStatus::ClosedProposition;
    if (!prop.is_verifier(vote.verifier_id)) return VoteStatus::NotAssigned;
    if (prop.votes.contains(vote.verifier_id)) return VoteStatus::AlreadyVoted;
    if (now > prop.deadline) return VoteStatus::Late;
    if (!ledger_.escrow(vote.verifier_id, cfg_.proposition_price)) return VoteStatus::InsufficientStake;

    if (vote.value == VoteValue::True) {
        const bool proof_ok = vote.claimed_input_id && !vote.claimed_input_id->empty() &&
                              hash_input_id(*vote.claimed_input_id) == prop.digest;
        if (!proof_ok) {
            last_delta_ = ledger_.penalize_invalid_submission(vote.verifier_id, cfg_.proposition_price);
            sync_bans();
            prop.votes.emplace(vote.verifier_id, RecordedVote{Tally::InvalidProof, 0, now});
            return VoteStatus::InvalidProof;
        }
    }
    const Tally tally = vote.value == VoteValue::True ? Tally::True : Tally::False;
    prop.votes.emplace(vote.verifier_id, RecordedVote{tally, cfg_.proposition_price, now});
    return VoteStatus::Accepted;
}

Outcome Host::resolve_proposition(PropId prop_id, SimTime now) {
    auto& prop = mutable_proposition(prop_id);
    if (prop.status != PropositionStatus::Open)
        throw CountChainError("proposition " + std::to_string(prop_id.value) + " already resolved");
    if (now < prop.deadline)
        throw CountChainError("proposition " + std::to_string(prop_id.value) + " resolved before its deadline");

    Outcome out;
    out.prop_id = prop_id;
    for (const auto& [voter, rec] : prop.votes)
        if (rec.tally == Tally::True) ++out.true_count;
    out.false_count = static_cast<int>(prop.verifier_ids.size()) - out.true_count;
    // An even committee can tie; the submitter's implicit True vote breaks it.
    out.tie_broken_by_submitter = out.true_count == out.false_count;
    out.decided = out.true_count > out.false_count || out.tie_broken_by_submitter;

    prop.status = out.decided ? PropositionStatus::ResolvedTrue : PropositionStatus::ResolvedFalse;
    if (out.decided) ++counter_;
    last_delta_ = ledger_.apply_resolution(prop, out);
    sync_bans();

    open_.erase(std::find(open_.begin(), open_.end(), prop_id));
    return out;
}

std::optional<Outcome> Host::resolve_next(SimTime now) {
    if (open_.empty()) return std::nullopt;
    const auto& next = props_[open_.front().value - 1];
    if (next.deadline > now) return std::nullopt;
    return resolve_proposition(next.id, next.deadline);
}

std::vector<Outcome> Host::resolve_due(SimTime now) {
    std::vector<Outcome> outcomes;
    while (auto out = resolve_next(now)) outcomes.push_back(*out);
    return outcomes;
}

std::vector<Outcome> Host::resolve_all() { return resolve_due(SimTime::max()); }

std::vector<Payout> Host::distribute_prizes() {
    auto payouts = ledger_.distribute_prizes();
    sync_bans();
    return payouts;
}

}  // namespace countchain
