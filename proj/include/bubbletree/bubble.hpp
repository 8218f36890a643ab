#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bubbletree/ambiguity.hpp"
#include "bubbletree/lattice.hpp"
#include "bubbletree/noarb.hpp"

namespace bubbletree {

/// Discounted cash flows received up to the node: dividends up to t ^ tau
/// and the payoff once tau has occurred. W = S^ 1{t<tau} + Z.
AdaptedProcess cash_flow_process(const Market& market);

/// S* = sup E[sum_{u=t+1}^{tau} D^_u + X^_tau 1{tau within horizon} | F_t]
/// before tau, X^_tau at tau and 0 afterwards. Nodes that are polar under an
/// explicit family hold NaN and are left out of the domain.
AdaptedProcess fundamental_price(const Market& market, const MeasureFamily& pricing);

struct FundamentalWealth {
    AdaptedProcess w_star;
    Classification classification;
    bool is_g_martingale = false;
};

FundamentalWealth fundamental_wealth(const Market& market, const MeasureFamily& pricing,
                                     double tol = kDefaultTolerance);

/// beta = S^ - S* with domain {t < tau}; values at and after tau are 0.
AdaptedProcess bubble_process(const Market& market, const MeasureFamily& pricing);

/// Largest |beta - (W - W*)| over {t < tau}.
double bubble_identity_error(const Market& market, const MeasureFamily& pricing);

/// Some node charged by `actual` carries beta > tol.
bool bubble_exists(const Market& market, const AdaptedProcess& beta, const MeasureFamily& actual,
                   double tol = kDefaultTolerance);

struct Check {
    bool applicable = false;
    bool holds = true;
    std::string note;
    std::vector<NodeId> nodes;  // offending nodes
};

struct BubbleClassification {
    Classification bubble_class;  // beta on {t < tau}
    Classification price_class;   // S^ on {t < tau}
    bool exists = false;
    Check beta_type;              // bounded: G-super; otherwise infi-super
    Check price_level;            // bounded: S G-super; otherwise S infi-super
    Check sufficiency;            // no dividends, S G-super, not G-martingale => bubble
};

BubbleClassification classify_bubble(const Market& market, const MeasureFamily& pricing,
                                     const MeasureFamily& actual, const AdaptedProcess& beta,
                                     double tol = kDefaultTolerance);

struct CorollaryReport {
    Check nonneg_under_noarb;
    Check vanishes_at_tau;
    Check persistence;
};

/// `no_arbitrage` is the verdict of verify_ftap on the same market.
CorollaryReport check_bubble_properties(const Market& market, const MeasureFamily& actual,
                                        const AdaptedProcess& beta, bool no_arbitrage,
                                        double tol = kDefaultTolerance);

struct Dominance {
    double hedge_cost = 0.0;           // x', superhedge price of the asset cash flows
    double root_price = 0.0;           // S^_0
    double fundamental_root = 0.0;     // S*_0 under the pricing family
    HedgeSolution hedge;
    Strategy comparison;               // buy and hold one unit
    std::vector<double> hedge_gains;   // leaf order, NaN on uncharged leaves
    std::vector<double> comparison_gains;
    double min_gap = 0.0;              // min over charged leaves of hedge - comparison
    NodeId strict_leaf = 0;
};

/// Root-level dominance test: when the cash flows of the asset superhedge
/// for less than S^_0, the hedge dominates buy-and-hold.
std::optional<Dominance> find_dominating_strategy(const Market& market, const MeasureFamily& pricing,
                                                  const MeasureFamily& actual,
                                                  double tol = kDefaultTolerance);

}  // namespace bubbletree
