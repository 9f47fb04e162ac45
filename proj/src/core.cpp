#include "matchsim/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "matchsim/rng.hpp"

namespace matchsim::core {

namespace {

// Sorts partner indices by strictly decreasing payoff; throws on ties.
std::vector<int> rank_row(const std::vector<int>& payoffs, const std::string& who) {
    std::vector<int> order(payoffs.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return payoffs[a] > payoffs[b]; });
    for (std::size_t k = 1; k < order.size(); ++k) {
        if (payoffs[order[k - 1]] == payoffs[order[k]]) {
            throw DuplicatePayoffError("duplicate payoff " + std::to_string(payoffs[order[k]]) +
                                       " in preference row of " + who);
        }
    }
    return order;
}

}  // namespace

Market::Market(std::vector<std::vector<int>> payoff_food,
               std::vector<std::vector<int>> payoff_color,
               std::vector<std::string> food_labels,
               std::vector<std::string> color_labels)
    : payoff_f_(std::move(payoff_food)),
      payoff_c_(std::move(payoff_color)),
      food_labels_(std::move(food_labels)),
      color_labels_(std::move(color_labels)) {
    n_f_ = static_cast<int>(payoff_f_.size());
    n_c_ = n_f_ > 0 ? static_cast<int>(payoff_f_[0].size()) : 0;
    if (static_cast<int>(payoff_c_.size()) != n_f_) {
        throw std::invalid_argument("payoff matrices disagree on food count");
    }
    for (const auto& row : payoff_f_) {
        if (static_cast<int>(row.size()) != n_c_) throw std::invalid_argument("ragged payoff_food");
    }
    for (const auto& row : payoff_c_) {
        if (static_cast<int>(row.size()) != n_c_) throw std::invalid_argument("ragged payoff_color");
    }
    for (int f = 0; f < n_f_; ++f) {
        for (int c = 0; c < n_c_; ++c) {
            if (payoff_f_[f][c] <= 0 || payoff_c_[f][c] <= 0) {
                throw std::invalid_argument("all payoffs must be strictly positive cents");
            }
        }
    }

    pref_f_.resize(n_f_);
    rank_f_.assign(n_f_, std::vector<int>(n_c_, 0));
    for (int f = 0; f < n_f_; ++f) {
        pref_f_[f] = rank_row(payoff_f_[f], "food " + std::to_string(f));
        for (int k = 0; k < n_c_; ++k) rank_f_[f][pref_f_[f][k]] = k + 1;
    }
    pref_c_.resize(n_c_);
    rank_c_.assign(n_c_, std::vector<int>(n_f_, 0));
    for (int c = 0; c < n_c_; ++c) {
        std::vector<int> col(n_f_);
        for (int f = 0; f < n_f_; ++f) col[f] = payoff_c_[f][c];
        pref_c_[c] = rank_row(col, "color " + std::to_string(c));
        for (int k = 0; k < n_f_; ++k) rank_c_[c][pref_c_[c][k]] = k + 1;
    }
}

double Market::mean_partner_payoff(AgentId a) const {
    const int n = a.side == Side::Food ? n_c_ : n_f_;
    long sum = 0;
    for (int b = 0; b < n; ++b) sum += payoff(a, b);
    return static_cast<double>(sum) / n;
}

Preferences derive_preferences(const Market& m) {
    Preferences p;
    p.food.reserve(m.n_food());
    p.color.reserve(m.n_color());
    for (int f = 0; f < m.n_food(); ++f) p.food.push_back(m.pref({Side::Food, f}));
    for (int c = 0; c < m.n_color(); ++c) p.color.push_back(m.pref({Side::Color, c}));
    return p;
}

int Matching::n_matched_pairs() const {
    int k = 0;
    for (int c : food_to_color_) k += (c >= 0);
    return k;
}

bool Matching::complete() const {
    const int pairs = n_matched_pairs();
    return pairs == std::min(n_food(), n_color());
}

std::string Matching::canonical_key() const {
    std::string s;
    s.reserve(food_to_color_.size() * 3);
    for (std::size_t f = 0; f < food_to_color_.size(); ++f) {
        if (f) s.push_back('|');
        if (food_to_color_[f] < 0) {
            s.push_back('-');
        } else {
            s += std::to_string(food_to_color_[f]);
        }
    }
    return s;
}

std::uint64_t Matching::digest() const {
    std::uint64_t h = 0x9ae16a3b2f90404fULL;
    for (int c : food_to_color_) h = hash_combine(h, static_cast<std::uint64_t>(c + 2));
    return h;
}

std::vector<std::pair<int, int>> blocking_pairs(const Market& m, const Matching& mu) {
    std::vector<std::pair<int, int>> out;
    for (int f = 0; f < m.n_food(); ++f) {
        const int cf = mu.partner_of_food(f);
        const int uf = cf >= 0 ? m.payoff_food(f, cf) : 0;
        for (int c = 0; c < m.n_color(); ++c) {
            if (c == cf) continue;
            if (m.payoff_food(f, c) <= uf) continue;
            const int fc = mu.partner_of_color(c);
            const int uc = fc >= 0 ? m.payoff_color(fc, c) : 0;
            if (m.payoff_color(f, c) > uc) out.emplace_back(f, c);
        }
    }
    return out;
}

DaResult deferred_acceptance(const Market& m, Side proposing) {
    const int n_prop = proposing == Side::Food ? m.n_food() : m.n_color();
    DaResult res;
    res.matching = Matching(m.n_food(), m.n_color());

    std::vector<int> next_rank(n_prop, 0);  // index into pref list of next proposal
    std::vector<int> free_agents(n_prop);
    std::iota(free_agents.begin(), free_agents.end(), 0);

    while (!free_agents.empty()) {
        const int p = free_agents.back();
        const AgentId prop{proposing, p};
        const auto& list = m.pref(prop);
        if (next_rank[p] >= static_cast<int>(list.size())) {
            free_agents.pop_back();  // exhausted: stays unmatched
            continue;
        }
        const int r = list[next_rank[p]++];
        const AgentId recv{opposite(proposing), r};
        ++res.offers_made;

        const int cur = res.matching.partner(recv);
        if (cur >= 0 && m.rank(recv, cur) < m.rank(recv, p)) continue;  // keeps current

        ++res.matches_formed;
        free_agents.pop_back();
        if (cur >= 0) free_agents.push_back(cur);
        if (proposing == Side::Food) {
            res.matching.match(p, r);
        } else {
            res.matching.match(r, p);
        }
    }
    return res;
}

namespace {

// One breakmarriage step (McVitie-Wilson): sever (f0, mu(f0)) and let f0
// propose down its list. The jilted color w0 treats f0 as its reservation
// partner, accepting only proposals it strictly prefers to f0; every other
// color accepts any improvement over its current partner. Succeeds exactly
// when w0 re-matches, which yields the next stable matching below `mu` in
// the food-lattice along this branch.
std::optional<Matching> breakmarriage(const Market& m, const Matching& mu, int f0) {
    const int n = m.n_food();
    Matching cur = mu;
    const int w0 = mu.partner_of_food(f0);

    std::vector<int> next_rank(n);
    for (int f = 0; f < n; ++f) {
        next_rank[f] = m.rank({Side::Food, f}, cur.partner_of_food(f));  // 1-based rank => next index
    }

    cur.unmatch_food(f0);
    int free_food = f0;
    while (true) {
        if (next_rank[free_food] >= n) return std::nullopt;  // list exhausted
        const int c = m.pref({Side::Food, free_food})[next_rank[free_food]++];
        const AgentId color{Side::Color, c};
        if (c == w0) {
            // Reservation: only a strict improvement over f0 ends the walk.
            if (m.rank(color, free_food) < m.rank(color, f0)) {
                cur.match(free_food, c);
                return cur;
            }
            continue;
        }
        const int held = cur.partner_of_color(c);
        if (held >= 0 && m.rank(color, held) < m.rank(color, free_food)) continue;
        cur.match(free_food, c);
        if (held < 0) {
            // Only w0 is ever single mid-walk, so this cannot happen for a
            // balanced market; guard anyway.
            return cur;
        }
        free_food = held;
    }
}

long total_food_payoff(const Market& m, const Matching& mu) {
    long s = 0;
    for (int f = 0; f < m.n_food(); ++f) {
        if (int c = mu.partner_of_food(f); c >= 0) s += m.payoff_food(f, c);
    }
    return s;
}

// Fallback enumerator for unbalanced markets: backtracking over each food's
// stable-partner interval [mu_F(f), mu_C(f)] with incremental blocking-pair
// pruning, then an exact stability filter.
void enumerate_by_backtracking(const Market& m, const Matching& mu_f, const Matching& mu_c,
                               int f, Matching& partial, std::vector<bool>& color_used,
                               std::vector<Matching>& out) {
    const int n_f = m.n_food();
    if (f == n_f) {
        if (is_stable(m, partial)) out.push_back(partial);
        return;
    }
    const AgentId food{Side::Food, f};
    if (mu_f.partner_of_food(f) < 0) {
        // Unmatched under mu_F stays unmatched in every stable matching.
        enumerate_by_backtracking(m, mu_f, mu_c, f + 1, partial, color_used, out);
        return;
    }
    const int lo = m.rank(food, mu_f.partner_of_food(f));
    const int hi = m.rank(food, mu_c.partner_of_food(f));
    const auto& list = m.pref(food);
    for (int r = lo; r <= hi; ++r) {
        const int c = list[r - 1];
        if (color_used[c]) continue;
        bool pruned = false;
        // Check blocks among finalized pairs only.
        for (int f2 = 0; f2 < f && !pruned; ++f2) {
            const int c2 = partial.partner_of_food(f2);
            if (c2 < 0) continue;
            if (m.payoff_food(f, c2) > m.payoff_food(f, c) &&
                m.payoff_color(f, c2) > m.payoff_color(f2, c2)) {
                pruned = true;  // (f, c2) would block
            }
            if (m.payoff_food(f2, c) > m.payoff_food(f2, c2) &&
                m.payoff_color(f2, c) > m.payoff_color(f, c)) {
                pruned = true;  // (f2, c) would block
            }
        }
        if (pruned) continue;
        partial.match(f, c);
        color_used[c] = true;
        enumerate_by_backtracking(m, mu_f, mu_c, f + 1, partial, color_used, out);
        color_used[c] = false;
        partial.unmatch_food(f);
    }
}

}  // namespace

bool StableSet::contains(const Matching& mu) const {
    return std::find(matchings.begin(), matchings.end(), mu) != matchings.end();
}

bool StableSet::is_stable_pair(int f, int c) const {
    const auto& ps = food_partners[f];
    return std::find(ps.begin(), ps.end(), c) != ps.end();
}

StableSet enumerate_stable_matchings(const Market& m, int cap) {
    if (m.n_food() > cap || m.n_color() > cap) {
        throw EnumerationCapExceeded("market side size exceeds enumeration cap " +
                                     std::to_string(cap));
    }
    const Matching mu_f = deferred_acceptance(m, Side::Food).matching;
    const Matching mu_c = deferred_acceptance(m, Side::Color).matching;

    std::vector<Matching> found;
    if (m.balanced()) {
        std::set<std::string> seen;
        std::vector<Matching> stack{mu_f};
        seen.insert(mu_f.canonical_key());
        found.push_back(mu_f);
        while (!stack.empty()) {
            Matching mu = std::move(stack.back());
            stack.pop_back();
            for (int f = 0; f < m.n_food(); ++f) {
                auto next = breakmarriage(m, mu, f);
                if (!next) continue;
                if (seen.insert(next->canonical_key()).second) {
                    found.push_back(*next);
                    stack.push_back(std::move(*next));
                }
            }
        }
    } else {
        Matching partial(m.n_food(), m.n_color());
        std::vector<bool> used(m.n_color(), false);
        enumerate_by_backtracking(m, mu_f, mu_c, 0, partial, used, found);
    }

    // mu_F first, mu_C last: decreasing food welfare, lexicographic on ties.
    std::sort(found.begin(), found.end(), [&](const Matching& a, const Matching& b) {
        const long wa = total_food_payoff(m, a);
        const long wb = total_food_payoff(m, b);
        if (wa != wb) return wa > wb;
        return a.canonical_key() < b.canonical_key();
    });

    StableSet ss;
    ss.matchings = std::move(found);
    if (ss.matchings.empty() || !(ss.matchings.front() == mu_f) || !(ss.matchings.back() == mu_c)) {
        throw InternalInconsistency("stable-set enumeration lost an extremal matching");
    }

    ss.food_partners.resize(m.n_food());
    ss.color_partners.resize(m.n_color());
    for (int f = 0; f < m.n_food(); ++f) {
        std::vector<int> ps;
        for (const auto& mu : ss.matchings) {
            if (int c = mu.partner_of_food(f); c >= 0) ps.push_back(c);
        }
        std::sort(ps.begin(), ps.end(),
                  [&](int a, int b) { return m.payoff_food(f, a) > m.payoff_food(f, b); });
        ps.erase(std::unique(ps.begin(), ps.end()), ps.end());
        ss.food_partners[f] = std::move(ps);
    }
    for (int c = 0; c < m.n_color(); ++c) {
        std::vector<int> ps;
        for (const auto& mu : ss.matchings) {
            if (int f = mu.partner_of_color(c); f >= 0) ps.push_back(f);
        }
        std::sort(ps.begin(), ps.end(),
                  [&](int a, int b) { return m.payoff_color(a, c) > m.payoff_color(b, c); });
        ps.erase(std::unique(ps.begin(), ps.end()), ps.end());
        ss.color_partners[c] = std::move(ps);
    }
    return ss;
}

namespace {

// The generalized assignment giving every food the partner at 1-based
// position `pos` of its multiset of stable partners, sorted best first.
// By Teo-Sethuraman this is a stable matching (colors receive position
// K + 1 - pos of theirs).
Matching generalized_assignment(const StableSet& ss, const Market& m, int pos) {
    const int n_f = m.n_food();
    const int n_c = m.n_color();
    Matching mu(n_f, n_c);
    for (int f = 0; f < n_f; ++f) {
        std::vector<int> multiset;
        for (const auto& s : ss.matchings) {
            if (int c = s.partner_of_food(f); c >= 0) multiset.push_back(c);
        }
        if (multiset.empty()) continue;
        std::sort(multiset.begin(), multiset.end(),
                  [&](int a, int b) { return m.payoff_food(f, a) > m.payoff_food(f, b); });
        mu.match(f, multiset[pos - 1]);
    }
    return mu;
}

}  // namespace

std::vector<Matching> median_stable_matchings(const StableSet& ss, const Market& m) {
    const int k = ss.size();
    if (k == 0) throw InternalInconsistency("median of an empty stable set");
    std::vector<std::pair<int, Matching>> built;  // (food-side position, assignment)
    if (k % 2 == 1) {
        built.emplace_back((k + 1) / 2, generalized_assignment(ss, m, (k + 1) / 2));
    } else {
        built.emplace_back(k / 2, generalized_assignment(ss, m, k / 2));
        built.emplace_back(k / 2 + 1, generalized_assignment(ss, m, k / 2 + 1));
    }
    std::vector<Matching> out;
    for (auto& [pos, mu] : built) {
        if (!ss.contains(mu)) {
            throw InternalInconsistency(
                "generalized median assignment is not in the enumerated stable set");
        }
        // Teo-Sethuraman symmetry: colors must land at position K + 1 - pos
        // of their own (best-first) multisets.
        for (int c = 0; c < m.n_color(); ++c) {
            std::vector<int> multiset;
            for (const auto& s : ss.matchings) {
                if (int f = s.partner_of_color(c); f >= 0) multiset.push_back(f);
            }
            if (multiset.empty()) continue;
            std::sort(multiset.begin(), multiset.end(), [&](int a, int b) {
                return m.payoff_color(a, c) > m.payoff_color(b, c);
            });
            if (mu.partner_of_color(c) != multiset[k - pos]) {
                throw InternalInconsistency("median assignment breaks color-side symmetry");
            }
        }
        out.push_back(std::move(mu));
    }
    return out;
}

std::string to_string(MatchingLabel label) {
    switch (label) {
        case MatchingLabel::FoodOptimal: return "food_optimal";
        case MatchingLabel::ColorOptimal: return "color_optimal";
        case MatchingLabel::Median: return "median";
        case MatchingLabel::OtherStable: return "other_stable";
        case MatchingLabel::UniqueStable: return "unique_stable";
        case MatchingLabel::Unstable: return "unstable";
    }
    return "?";
}

Classification classify_matching(const StableSet& ss, const Market& m, const Matching& mu) {
    Classification res;
    const auto medians = median_stable_matchings(ss, m);
    const auto is_median_mu = [&](const Matching& x) {
        return std::find(medians.begin(), medians.end(), x) != medians.end();
    };

    res.is_food_optimal = mu == ss.food_optimal();
    res.is_color_optimal = mu == ss.color_optimal();
    res.is_median = is_median_mu(mu);

    if (!ss.contains(mu)) {
        res.label = MatchingLabel::Unstable;
        res.is_median = res.is_food_optimal = res.is_color_optimal = false;
    } else if (ss.size() == 1) {
        res.label = MatchingLabel::UniqueStable;
    } else if (res.is_food_optimal) {
        res.label = MatchingLabel::FoodOptimal;
    } else if (res.is_color_optimal) {
        res.label = MatchingLabel::ColorOptimal;
    } else if (res.is_median) {
        res.label = MatchingLabel::Median;
    } else {
        res.label = MatchingLabel::OtherStable;
    }

    const Matching& mu_f = ss.food_optimal();
    const Matching& mu_c = ss.color_optimal();
    auto pair_label = [&](int f, int c) {
        if (mu_f.partner_of_food(f) == c) return PairLabel::FoodOptimal;
        if (mu_c.partner_of_food(f) == c) return PairLabel::ColorOptimal;
        for (const auto& med : medians) {
            if (med.partner_of_food(f) == c) return PairLabel::Median;
        }
        return ss.is_stable_pair(f, c) ? PairLabel::OtherStable : PairLabel::NonStable;
    };
    res.food_pair.assign(m.n_food(), PairLabel::Unmatched);
    res.color_pair.assign(m.n_color(), PairLabel::Unmatched);
    for (int f = 0; f < m.n_food(); ++f) {
        if (int c = mu.partner_of_food(f); c >= 0) {
            const PairLabel pl = pair_label(f, c);
            res.food_pair[f] = pl;
            res.color_pair[c] = pl;
        }
    }
    return res;
}

PayoffStats payoff_stats(const Market& m, const Matching& mu) {
    PayoffStats st;
    std::vector<long> payoffs;
    payoffs.reserve(m.n_food() + m.n_color());
    for (int f = 0; f < m.n_food(); ++f) {
        const int c = mu.partner_of_food(f);
        const long u = c >= 0 ? m.payoff_food(f, c) : 0;
        st.food_welfare += u;
        payoffs.push_back(u);
    }
    for (int c = 0; c < m.n_color(); ++c) {
        const int f = mu.partner_of_color(c);
        const long u = f >= 0 ? m.payoff_color(f, c) : 0;
        st.color_welfare += u;
        payoffs.push_back(u);
    }
    st.total_welfare = st.food_welfare + st.color_welfare;
    const auto n = static_cast<double>(payoffs.size());
    st.mean = static_cast<double>(st.total_welfare) / n;
    if (st.total_welfare > 0) {
        double ss = 0;
        for (long u : payoffs) ss += (u - st.mean) * (u - st.mean);
        st.coefficient_of_variation = std::sqrt(ss / n) / st.mean;
        // Gini via the sorted-rank identity.
        std::sort(payoffs.begin(), payoffs.end());
        double weighted = 0;
        for (std::size_t i = 0; i < payoffs.size(); ++i) {
            weighted += (2.0 * (i + 1) - n - 1.0) * static_cast<double>(payoffs[i]);
        }
        st.gini = weighted / (n * static_cast<double>(st.total_welfare));
    }
    return st;
}

}  // namespace matchsim::core
