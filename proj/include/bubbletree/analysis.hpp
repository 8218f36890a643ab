#pragma once

#include <string>
#include <vector>

#include "bubbletree/claims.hpp"
#include "bubbletree/fixtures.hpp"
#include "bubbletree/report.hpp"

namespace bubbletree {

/// The file's pricing family, or the maximal risk-neutral family when the
/// file has none (Errc::arbitrage if no such family exists).
MeasureFamily pricing_family(const Instance& instance);

/// Leaf payoff of a European-style claim: its value at the time-T ancestor.
std::vector<double> claim_leaf_payoff(const Market& market, const Claim& claim);

/// Reads "<leaf id> <value>" lines; every leaf must appear once.
std::vector<double> read_leaf_payoff_file(const std::string& path, const EventTree& tree);

Report run_analyze(const Instance& instance, double tol = kDefaultTolerance);

struct PriceRequest {
    ClaimKind kind = ClaimKind::euro_call;
    double strike = 0.0;
    int maturity = -1;       // -1 selects the horizon
    bool no_dominance = false;
};

Report run_price(const Instance& instance, const PriceRequest& request, double tol = kDefaultTolerance);

Report run_hedge(const Instance& instance, const std::vector<double>& leaf_payoff,
                 const std::string& description, double tol = kDefaultTolerance);

/// `process` is one of S, W, Wstar, beta.
Report run_classify(const Instance& instance, const std::string& process, double tol = kDefaultTolerance);

/// Requires no arbitrage (Errc::arbitrage otherwise).
Report run_dominance(const Instance& instance, double tol = kDefaultTolerance);

}  // namespace bubbletree
