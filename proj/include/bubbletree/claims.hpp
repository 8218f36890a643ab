#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bubbletree/ambiguity.hpp"
#include "bubbletree/lattice.hpp"

namespace bubbletree {

enum class ClaimKind { forward, euro_call, euro_put, amer_call, amer_put, custom_terminal };

const char* to_string(ClaimKind kind);
std::optional<ClaimKind> parse_claim_kind(std::string_view text);

/// Strikes are monetary and discounted as K / B at the exercise or maturity
/// node. Custom payoffs are discounted values keyed by time-`maturity` node.
struct Claim {
    ClaimKind kind = ClaimKind::euro_call;
    double strike = 0.0;
    int maturity = 0;
    std::map<NodeId, double> custom;
};

/// Discounted payoff of the claim if it is settled at node n.
double claim_payoff(const Market& market, const Claim& claim, NodeId n);

/// Throws Errc::invalid_input for a malformed claim and
/// Errc::assumption_violation when a node with t <= T charged by `pricing`
/// pays a dividend or is not strictly before tau.
void check_claim_assumptions(const Market& market, const MeasureFamily& pricing, const Claim& claim);

/// Upper conditional expectation of the terminal payoff at every node with
/// t <= T (other nodes are outside the domain).
AdaptedProcess fundamental_claim_price(const Market& market, const MeasureFamily& pricing,
                                       const Claim& claim);

struct ParityRow {
    NodeId node = 0;
    double lower = 0.0;   // inf E[S_T - K^]
    double spread = 0.0;  // C* - P*
    double upper = 0.0;   // sup E[S_T - K^] = F*
    bool holds = true;
};

struct ParityBounds {
    std::vector<ParityRow> rows;  // every node with t <= T
    bool holds = true;
};

ParityBounds parity_bounds(const Market& market, const MeasureFamily& pricing, double strike,
                           int maturity, double tol = kDefaultTolerance);

enum class QuoteKind { call, put, forward, asset, amer_call, amer_put };

const char* to_string(QuoteKind kind);
std::optional<QuoteKind> parse_quote_kind(std::string_view text);

/// Observed market prices in nominal units at the quoted node.
struct MarketQuotes {
    std::map<QuoteKind, std::map<NodeId, double>> values;
    std::optional<double> strike;
    std::optional<int> maturity;

    bool empty() const { return values.empty(); }
    std::optional<double> get(QuoteKind kind, NodeId n) const;
};

/// Discounted asset price at a node: the asset quote if present, else S^.
double market_asset_price(const Market& market, const MarketQuotes& quotes, NodeId n);

/// Forward quote if present, else S^ - K E[1/B_T]. Needs a deterministic
/// discount expectation when derived; throws Errc::assumption_violation otherwise.
double market_forward_price(const Market& market, const MeasureFamily& pricing,
                            const MarketQuotes& quotes, double strike, int maturity, NodeId n);

struct NodeVerdict {
    NodeId node = 0;
    double deviation = 0.0;
    bool holds = true;
};

struct MarketParity {
    std::vector<NodeVerdict> rows;  // quoted nodes with both C and P
    bool enforced = false;          // no_dominance flag
    bool holds = true;              // always true when not enforced
};

/// C - P = F at every node with both quotes. Throws Errc::invalid_input when
/// no node carries both a call and a put quote.
MarketParity market_parity(const Market& market, const MeasureFamily& pricing,
                           const MarketQuotes& quotes, double strike, int maturity,
                           bool no_dominance, double tol = kDefaultTolerance);

struct ClaimBubbleRow {
    NodeId node = 0;
    double delta_s = 0.0;   // S^ - sup E[S^_T]
    double delta_f = 0.0;
    double delta_ec = 0.0;
    double delta_ep = 0.0;
    bool holds = true;      // delta_f = delta_s and delta_s <= delta_ec - delta_ep
};

struct ClaimBubbles {
    std::vector<ClaimBubbleRow> rows;
    bool holds = true;
};

/// Rows for nodes quoting both a call and a put.
ClaimBubbles claim_bubbles(const Market& market, const MeasureFamily& pricing,
                           const MarketQuotes& quotes, double strike, int maturity,
                           double tol = kDefaultTolerance);

/// S^ - sup E[S^_T | F_t] at every node with t <= T.
AdaptedProcess asset_claim_bubble(const Market& market, const MeasureFamily& pricing,
                                  const MarketQuotes& quotes, int maturity);

struct AmericanPrice {
    AdaptedProcess value;
    AdaptedProcess continuation;  // NaN at maturity
    std::vector<char> exercise;   // payoff >= continuation, ties exercise
};

/// Backward induction; requires a rectangular pricing family
/// (Errc::rectangularity_required otherwise).
AmericanPrice american_fundamental_price(const Market& market, const MeasureFamily& pricing,
                                         const Claim& claim);

inline constexpr std::size_t kStoppingRuleCap = 1000000;

/// Root value by brute force over every stopping rule on [0, T].
/// Throws Errc::cap_exceeded when the rule count exceeds `cap`.
double american_oracle(const Market& market, const MeasureFamily& pricing, const Claim& claim,
                       std::size_t cap = kStoppingRuleCap);

/// Number of stopping rules on [0, T] from the root.
double stopping_rule_count(const EventTree& tree, int maturity);

struct AmericanBoundRow {
    NodeId node = 0;
    double euro = 0.0;
    double amer = 0.0;
    double delta_s = 0.0;
    bool lower_holds = true;   // C^E* <= C^A*
    bool upper_holds = true;   // C^A* <= C^E* + delta_S
};

struct AmericanBounds {
    std::vector<AmericanBoundRow> rows;
    bool fundamental_holds = true;
    std::vector<NodeVerdict> market_rows;  // nodes quoting C^E, C^A and P^E
    bool market_checked = false;
    bool market_holds = true;
};

AmericanBounds american_bounds(const Market& market, const MeasureFamily& pricing,
                               const MarketQuotes& quotes, double strike, int maturity,
                               double tol = kDefaultTolerance);

}  // namespace bubbletree
