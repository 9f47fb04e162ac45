#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "matchsim/core.hpp"

namespace matchsim::markets {

// The treatment classes. The three paper-scale families are the n = 8 main
// classes (unique stable matching in several flavors, two embedded 4x4
// submarkets, five stable matchings with three stable partners each) and the
// n = 15 large classes.
enum class MarketClass {
    Assortative,
    OneSidedAssortative,
    EgalitarianUnstable,
    GenericUnique,
    Embedded4x4,
    FiveSmThreeSp,
    LargeUnique,
    LargeThreeSm,
};

std::string to_string(MarketClass c);
MarketClass market_class_from_string(const std::string& s);

struct MarketSpec {
    MarketClass cls = MarketClass::GenericUnique;
    int n = 8;              // agents per side
    int marginal_food = 20; // cents between adjacent ranks, food side
    int marginal_color = 20;
    int color_shift = 0;    // cents added to every color payoff
    int base = 100;         // payoff of the least preferred partner
    double target_corr = 0.9;  // GenericUnique: alignment correlation target
    double dispersion = 0.0;   // Embedded4x4: payoff jitter knob in [0, 1)
    std::uint64_t seed = 0;
    long budget = 100000;   // ordinal samples per generation call
};

struct GenerationBudgetExhausted : std::runtime_error {
    GenerationBudgetExhausted(const std::string& what, long attempts_)
        : std::runtime_error(what), attempts(attempts_) {}
    long attempts;
};

// Turns ordinal rank lists into integer cent payoffs: an agent's k-th choice
// (1-based) is worth base + (n - k) * marginal, with color_shift added on the
// color side. Ordinals are preserved exactly.
core::Market cardinalize(const core::Preferences& ordinals, const MarketSpec& spec);

// Produces a market satisfying the class contract of `spec`, searching over
// seeded ordinal profiles where the class requires it. Deterministic in spec
// (including the seed). Throws GenerationBudgetExhausted when the search
// budget runs out.
core::Market generate(const MarketSpec& spec);

// The designated all-equal-payoff matching of EgalitarianUnstable markets:
// food i with color n-1-i.
core::Matching egalitarian_target(int n);

struct ValidationClause {
    std::string name;
    bool pass = false;
    std::string measured;
};

struct ValidationReport {
    bool pass = true;
    std::vector<ValidationClause> clauses;

    void add(const std::string& name, bool ok, std::string measured = "");
};

// Machine-checks every structural claim the class makes about the market.
// Failures are data, not exceptions.
ValidationReport validate(const MarketSpec& spec, const core::Market& m);

// Alignment correlation: Pearson correlation of (u_f(mu), u_{mu(f)}(mu))
// over matched foods. Absent when either payoff vector is constant.
std::optional<double> alignment_correlation(const core::Market& m, const core::Matching& mu);

// --- market files -----------------------------------------------------------
//
// Markets travel as canonical JSON documents (sorted keys, two-space indent,
// trailing newline) so identical markets produce byte-identical files.

struct LoadedMarket {
    core::Market market;
    std::optional<MarketSpec> spec;
    std::string id;  // digest of the payoff matrices
};

std::string market_id(const core::Market& m);
std::string market_to_json(const core::Market& m, const std::optional<MarketSpec>& spec);
void write_market_file(const std::string& path, const core::Market& m,
                       const std::optional<MarketSpec>& spec);
LoadedMarket market_from_json(const std::string& text);
LoadedMarket read_market_file(const std::string& path);

std::string spec_to_json(const MarketSpec& spec);
MarketSpec spec_from_json_text(const std::string& text);

}  // namespace matchsim::markets
