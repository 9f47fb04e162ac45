#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace matchsim::core {

// The two market sides. "Foods" propose to "colors" in food-proposing DA and
// vice versa; the names are arbitrary labels for the two disjoint agent sets.
enum class Side : std::uint8_t { Food = 0, Color = 1 };

inline Side opposite(Side s) { return s == Side::Food ? Side::Color : Side::Food; }
inline char side_tag(Side s) { return s == Side::Food ? 'f' : 'c'; }

struct AgentId {
    Side side;
    int idx;

    friend bool operator==(const AgentId&, const AgentId&) = default;
};

struct DuplicatePayoffError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct EnumerationCapExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InternalInconsistency : std::logic_error {
    using std::logic_error::logic_error;
};

// A two-sided market with integer cardinal payoffs (cents). payoff_food[f][c]
// is what food f earns when matched with color c; payoff_color[f][c] is what
// color c earns when matched with food f. All payoffs are strictly positive
// (an unmatched agent earns 0, so every partner beats staying single), and
// each agent's payoffs over potential partners are pairwise distinct, which
// makes the derived ordinal preferences strict.
class Market {
public:
    Market(std::vector<std::vector<int>> payoff_food,
           std::vector<std::vector<int>> payoff_color,
           std::vector<std::string> food_labels = {},
           std::vector<std::string> color_labels = {});

    int n_food() const { return n_f_; }
    int n_color() const { return n_c_; }
    bool balanced() const { return n_f_ == n_c_; }

    int payoff_food(int f, int c) const { return payoff_f_[f][c]; }
    int payoff_color(int f, int c) const { return payoff_c_[f][c]; }

    // Payoff of `a` when matched with the opposite-side agent `partner_idx`.
    int payoff(AgentId a, int partner_idx) const {
        return a.side == Side::Food ? payoff_f_[a.idx][partner_idx]
                                    : payoff_c_[partner_idx][a.idx];
    }

    // Preference list of `a`: opposite-side indices, most preferred first.
    const std::vector<int>& pref(AgentId a) const {
        return a.side == Side::Food ? pref_f_[a.idx] : pref_c_[a.idx];
    }

    // Rank of opposite-side agent `b` in `a`'s list; 1 = most preferred.
    int rank(AgentId a, int b) const {
        return a.side == Side::Food ? rank_f_[a.idx][b] : rank_c_[a.idx][b];
    }

    const std::vector<std::vector<int>>& payoff_food_matrix() const { return payoff_f_; }
    const std::vector<std::vector<int>>& payoff_color_matrix() const { return payoff_c_; }
    const std::vector<std::string>& food_labels() const { return food_labels_; }
    const std::vector<std::string>& color_labels() const { return color_labels_; }

    // Mean payoff of `a` over all n possible partners: the expected payoff
    // under a uniformly random complete matching.
    double mean_partner_payoff(AgentId a) const;

private:
    int n_f_ = 0;
    int n_c_ = 0;
    std::vector<std::vector<int>> payoff_f_;
    std::vector<std::vector<int>> payoff_c_;
    std::vector<std::vector<int>> pref_f_, pref_c_;  // rank lists, best first
    std::vector<std::vector<int>> rank_f_, rank_c_;  // inverse: agent -> rank (1-based)
    std::vector<std::string> food_labels_, color_labels_;
};

// Ordinal view of a market: per-agent rank lists (most preferred first).
struct Preferences {
    std::vector<std::vector<int>> food;   // food f -> ordered color indices
    std::vector<std::vector<int>> color;  // color c -> ordered food indices
};

Preferences derive_preferences(const Market& m);

// A partial one-to-one pairing between the two sides. The involution
// invariant (f = mu(c) iff c = mu(f)) is maintained by construction.
class Matching {
public:
    Matching() = default;
    Matching(int n_food, int n_color) : food_to_color_(n_food, -1), color_to_food_(n_color, -1) {}

    int n_food() const { return static_cast<int>(food_to_color_.size()); }
    int n_color() const { return static_cast<int>(color_to_food_.size()); }

    int partner_of_food(int f) const { return food_to_color_[f]; }
    int partner_of_color(int c) const { return color_to_food_[c]; }
    int partner(AgentId a) const {
        return a.side == Side::Food ? food_to_color_[a.idx] : color_to_food_[a.idx];
    }
    bool matched(AgentId a) const { return partner(a) >= 0; }

    // Pairs f with c, severing any prior partnerships of either.
    void match(int f, int c) {
        unmatch_food(f);
        unmatch_color(c);
        food_to_color_[f] = c;
        color_to_food_[c] = f;
    }

    void unmatch_food(int f) {
        if (int c = food_to_color_[f]; c >= 0) {
            color_to_food_[c] = -1;
            food_to_color_[f] = -1;
        }
    }
    void unmatch_color(int c) {
        if (int f = color_to_food_[c]; f >= 0) {
            food_to_color_[f] = -1;
            color_to_food_[c] = -1;
        }
    }

    int n_matched_pairs() const;
    bool complete() const;

    // Canonical text form "c0|c1|-|c3": partner of each food in index order.
    std::string canonical_key() const;
    std::uint64_t digest() const;

    friend bool operator==(const Matching&, const Matching&) = default;

private:
    std::vector<int> food_to_color_;
    std::vector<int> color_to_food_;
};

// All (f, c) pairs in which both agents strictly prefer each other to their
// current assignment (an unmatched agent's status is worth 0 cents).
std::vector<std::pair<int, int>> blocking_pairs(const Market& m, const Matching& mu);

inline bool is_stable(const Market& m, const Matching& mu) {
    return blocking_pairs(m, mu).empty();
}

struct DaResult {
    Matching matching;
    long offers_made = 0;     // every proposal event
    long matches_formed = 0;  // every tentative acceptance
};

// Gale-Shapley deferred acceptance. Returns the proposing side's optimal
// stable matching: mu_F when foods propose, mu_C when colors propose.
DaResult deferred_acceptance(const Market& m, Side proposing);

// The complete set of stable matchings together with the per-agent stable
// partner lists. matchings[0] is mu_F and matchings.back() is mu_C; the list
// is ordered by decreasing total food payoff (ties broken lexicographically).
struct StableSet {
    std::vector<Matching> matchings;
    std::vector<std::vector<int>> food_partners;   // food f -> stable partners, best first
    std::vector<std::vector<int>> color_partners;  // color c -> stable partners, best first

    int size() const { return static_cast<int>(matchings.size()); }
    const Matching& food_optimal() const { return matchings.front(); }
    const Matching& color_optimal() const { return matchings.back(); }
    bool contains(const Matching& mu) const;

    // True when f and c are matched in at least one stable matching.
    bool is_stable_pair(int f, int c) const;

    const std::vector<int>& partners(AgentId a) const {
        return a.side == Side::Food ? food_partners[a.idx] : color_partners[a.idx];
    }
};

// Enumerates S(P) via recursive breakmarriage seeded at mu_F (McVitie-Wilson
// style). Throws EnumerationCapExceeded when the side size exceeds `cap`.
StableSet enumerate_stable_matchings(const Market& m, int cap = 20);

// Generalized median stable matchings (Teo-Sethuraman). For odd K the single
// matching assigning every agent the ((K+1)/2)-th best of its K stable
// partners counted with multiplicity; for even K the (K/2)-th and (K/2+1)-th
// generalized assignments. Every returned matching is verified to be an
// element of `ss`; an assignment that fails that check signals an enumeration
// bug and throws InternalInconsistency.
std::vector<Matching> median_stable_matchings(const StableSet& ss, const Market& m);

enum class MatchingLabel {
    FoodOptimal,
    ColorOptimal,
    Median,
    OtherStable,
    UniqueStable,
    Unstable,
};

std::string to_string(MatchingLabel label);

// Per-agent classification of a single matched pair.
enum class PairLabel { FoodOptimal, ColorOptimal, Median, OtherStable, NonStable, Unmatched };

struct Classification {
    MatchingLabel label = MatchingLabel::Unstable;
    // Set when `label` names an extremal matching that is also a (generalized)
    // median, or when several labels coincide for other reasons.
    bool is_median = false;
    bool is_food_optimal = false;
    bool is_color_optimal = false;
    std::vector<PairLabel> food_pair;   // per food
    std::vector<PairLabel> color_pair;  // per color
};

Classification classify_matching(const StableSet& ss, const Market& m, const Matching& mu);

// Welfare and dispersion statistics over all n_f + n_c agents; unmatched
// agents contribute payoff 0. coefficient_of_variation and gini are absent
// for degenerate inputs (mean 0).
struct PayoffStats {
    long total_welfare = 0;  // cents
    long food_welfare = 0;
    long color_welfare = 0;
    double mean = 0.0;
    std::optional<double> coefficient_of_variation;  // population sd / mean
    std::optional<double> gini;                      // in [0,1]; display scale is x100
};

PayoffStats payoff_stats(const Market& m, const Matching& mu);

}  // namespace matchsim::core
