#include "bubbletree/noarb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "bubbletree/lp.hpp"

namespace bubbletree {

namespace {

constexpr double kArbitrageThreshold = 1e-6;
constexpr double kMeasureThreshold = 1e-9;
constexpr double kZeroDrift = 1e-12;
const double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Charged non-leaf nodes get one trading variable each.
struct TradingVars {
    std::vector<NodeId> nodes;
    std::vector<std::size_t> index;  // node -> variable, SIZE_MAX when untraded
};

TradingVars trading_vars(const EventTree& tree, const SublinearExpectation& expect) {
    TradingVars vars;
    vars.index.assign(tree.size(), SIZE_MAX);
    for (NodeId n = 0; n < tree.size(); ++n) {
        if (tree.is_leaf(n) || !expect.charged(n)) continue;
        vars.index[n] = vars.nodes.size();
        vars.nodes.push_back(n);
    }
    return vars;
}

/// Adds the per-leaf gain coefficients sum_n pi_n dW_n(leaf) at `offset`.
void add_gain_coeffs(const EventTree& tree, const AdaptedProcess& w, const TradingVars& vars,
                     NodeId leaf, std::vector<double>& coeffs, std::size_t offset) {
    for (NodeId cur = leaf; tree.parent(cur); cur = *tree.parent(cur)) {
        const NodeId p = *tree.parent(cur);
        if (vars.index[p] != SIZE_MAX) coeffs[offset + vars.index[p]] += w[cur] - w[p];
    }
}

Strategy strategy_from(const EventTree& tree, const TradingVars& vars, const std::vector<double>& x,
                       std::size_t offset) {
    Strategy s;
    s.holding.assign(tree.size(), 0.0);
    for (std::size_t i = 0; i < vars.nodes.size(); ++i) {
        s.holding[vars.nodes[i]] = std::max(0.0, x[offset + i]);
    }
    return s;
}

}  // namespace

std::optional<ArbitrageCertificate> find_arbitrage(const Market& market, const MeasureFamily& actual) {
    const EventTree& tree = market.tree();
    const SublinearExpectation expect(tree, actual);
    const AdaptedProcess w = wealth_process(market);
    const TradingVars vars = trading_vars(tree, expect);
    if (vars.nodes.empty()) return std::nullopt;

    lp::Problem problem(vars.nodes.size());
    problem.maximize = true;
    problem.upper.assign(vars.nodes.size(), 1.0);
    for (NodeId leaf : tree.leaves()) {
        if (!expect.charged(leaf)) continue;
        auto& row = problem.add_row(lp::Sense::ge, 0.0);
        add_gain_coeffs(tree, w, vars, leaf, row.coeffs, 0);
        for (std::size_t j = 0; j < row.coeffs.size(); ++j) problem.objective[j] += row.coeffs[j];
    }
    const lp::Result result = lp::solve(problem);
    if (result.status != lp::Status::optimal || result.objective <= kArbitrageThreshold) {
        return std::nullopt;
    }

    ArbitrageCertificate cert;
    cert.strategy = strategy_from(tree, vars, result.x, 0);
    const std::vector<double> gains = terminal_gains(market, cert.strategy);
    cert.leaf_gains.assign(gains.size(), kNaN);
    cert.witness_gain = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < gains.size(); ++i) {
        const NodeId leaf = tree.leaves()[i];
        if (!expect.charged(leaf)) continue;
        cert.leaf_gains[i] = gains[i];
        cert.total_gain += gains[i];
        if (gains[i] > cert.witness_gain) {
            cert.witness_gain = gains[i];
            cert.witness_leaf = leaf;
        }
    }
    if (!certificate_valid(market, actual, cert)) return std::nullopt;
    return cert;
}

bool certificate_valid(const Market& market, const MeasureFamily& actual,
                       const ArbitrageCertificate& cert, double tol) {
    const EventTree& tree = market.tree();
    const SublinearExpectation expect(tree, actual);
    if (cert.strategy.holding.size() != tree.size()) return false;
    for (double h : cert.strategy.holding) {
        if (!(h >= 0.0)) return false;
    }
    const std::vector<double> gains = terminal_gains(market, cert.strategy);
    bool witnessed = false;
    for (std::size_t i = 0; i < gains.size(); ++i) {
        const NodeId leaf = tree.leaves()[i];
        if (!expect.charged(leaf)) continue;
        if (gains[i] < -tol) return false;
        if (gains[i] > kArbitrageThreshold) witnessed = true;
    }
    return witnessed && expect.charged(cert.witness_leaf) &&
           gains[tree.leaf_index(cert.witness_leaf)] > kArbitrageThreshold;
}

FtapReport verify_ftap(const Market& market, const MeasureFamily& actual, double tol) {
    const EventTree& tree = market.tree();
    const SublinearExpectation expect(tree, actual);
    const AdaptedProcess w = wealth_process(market);
    const auto& leaves = tree.leaves();

    FtapReport report;
    report.arbitrage = find_arbitrage(market, actual);
    report.certificate_valid = report.arbitrage && certificate_valid(market, actual, *report.arbitrage, tol);

    std::vector<std::size_t> var_of_leaf(leaves.size(), SIZE_MAX);
    std::vector<NodeId> charged_leaves;
    for (std::size_t i = 0; i < leaves.size(); ++i) {
        if (!expect.charged(leaves[i])) continue;
        var_of_leaf[i] = charged_leaves.size();
        charged_leaves.push_back(leaves[i]);
    }
    const std::size_t k = charged_leaves.size();

    // Shared constraints: sum q = 1 and sum_{leaf >= n} q (W(child) - W(n)) <= 0.
    lp::Problem base(k);
    base.maximize = true;
    auto& total = base.add_row(lp::Sense::eq, 1.0);
    std::fill(total.coeffs.begin(), total.coeffs.end(), 1.0);
    for (NodeId n = 0; n < tree.size(); ++n) {
        if (tree.is_leaf(n) || !expect.charged(n)) continue;
        lp::Row row{std::vector<double>(k, 0.0), lp::Sense::le, 0.0};
        bool any = false;
        for (NodeId leaf : tree.leaves_below(n)) {
            const std::size_t v = var_of_leaf[tree.leaf_index(leaf)];
            if (v == SIZE_MAX) continue;
            const NodeId child = tree.ancestor_at(leaf, tree.time(n) + 1);
            row.coeffs[v] = w[child] - w[n];
            any = any || row.coeffs[v] != 0.0;
        }
        if (any) base.rows.push_back(std::move(row));
    }

    std::vector<std::vector<double>> measures;
    std::vector<char> covered(k, 0);
    for (std::size_t target = 0; target < k; ++target) {
        if (covered[target]) continue;
        lp::Problem problem = base;
        problem.objective[target] = 1.0;
        const lp::Result result = lp::solve(problem);
        if (result.status != lp::Status::optimal || result.objective <= kMeasureThreshold) continue;
        std::vector<double> q(leaves.size(), 0.0);
        double sum = 0.0;
        for (std::size_t v = 0; v < k; ++v) {
            const double p = result.x[v] < 1e-12 ? 0.0 : result.x[v];
            q[tree.leaf_index(charged_leaves[v])] = p;
            sum += p;
        }
        for (std::size_t v = 0; v < k; ++v) {
            double& p = q[tree.leaf_index(charged_leaves[v])];
            p /= sum;
            if (p > kMeasureThreshold) covered[v] = 1;
        }
        measures.push_back(std::move(q));
    }
    for (std::size_t v = 0; v < k; ++v) {
        if (!covered[v]) report.uncovered_leaves.push_back(charged_leaves[v]);
    }
    if (!measures.empty()) {
        report.family = MeasureFamily(ExplicitFamily{std::move(measures)}, FamilyRole::pricing);
        report.family_supermartingale =
            classify_process(tree, *report.family, w, tree.horizon(), tol).at_least(MartingaleClass::g_supermartingale);
    }
    const bool covering = report.family && report.uncovered_leaves.empty() && report.family_supermartingale;
    report.dichotomy_holds = report.arbitrage.has_value() != covering;
    return report;
}

MeasureFamily risk_neutral_family(const Market& market, const MeasureFamily& actual) {
    const EventTree& tree = market.tree();
    const SublinearExpectation expect(tree, actual);
    const AdaptedProcess w = wealth_process(market);

    auto drift = [&](NodeId n, NodeId c) {
        const double d = w[c] - w[n];
        return std::abs(d) <= kZeroDrift ? 0.0 : d;
    };

    std::vector<char> viable(tree.size(), 0);
    RectangularFamily rect;
    rect.transitions.resize(tree.size());
    for (NodeId n : tree.backward_order()) {
        auto kids = tree.children(n);
        if (kids.empty()) {
            viable[n] = expect.charged(n);
            continue;
        }
        std::vector<std::vector<double>> vertices;
        const std::size_t m = kids.size();
        for (std::size_t i = 0; i < m; ++i) {
            if (!viable[kids[i]] || drift(n, kids[i]) > 0.0) continue;
            std::vector<double> e(m, 0.0);
            e[i] = 1.0;
            vertices.push_back(std::move(e));
        }
        for (std::size_t i = 0; i < m; ++i) {
            const double di = drift(n, kids[i]);
            if (!viable[kids[i]] || di >= 0.0) continue;
            for (std::size_t j = 0; j < m; ++j) {
                const double dj = drift(n, kids[j]);
                if (!viable[kids[j]] || dj <= 0.0) continue;
                std::vector<double> p(m, 0.0);
                p[i] = dj / (dj - di);
                p[j] = -di / (dj - di);
                vertices.push_back(std::move(p));
            }
        }
        if (vertices.empty()) {
            // Unreachable under the family; any transition set will do.
            for (std::size_t i = 0; i < m; ++i) {
                std::vector<double> e(m, 0.0);
                e[i] = 1.0;
                vertices.push_back(std::move(e));
            }
        } else {
            viable[n] = 1;
        }
        rect.transitions[n] = TransitionVertices{std::move(vertices)};
    }
    if (!viable[tree.root()]) {
        throw Error(Errc::arbitrage, "no measure makes the wealth process a supermartingale");
    }
    return MeasureFamily(std::move(rect), FamilyRole::pricing);
}

HedgeSolution superhedge(const Market& market, const MeasureFamily& actual,
                         const std::vector<double>& leaf_payoff) {
    const EventTree& tree = market.tree();
    if (leaf_payoff.size() != tree.leaves().size()) {
        throw Error(Errc::invalid_input, "payoff length must equal leaf count");
    }
    for (double v : leaf_payoff) {
        if (!std::isfinite(v)) throw Error(Errc::invalid_input, "payoff must be finite");
    }
    const SublinearExpectation expect(tree, actual);
    const AdaptedProcess w = wealth_process(market);
    const TradingVars vars = trading_vars(tree, expect);

    // Variable 0 is the free initial capital, then one holding per traded node.
    lp::Problem problem(vars.nodes.size() + 1);
    problem.objective[0] = 1.0;
    problem.lower.assign(problem.vars(), 0.0);
    problem.lower[0] = -lp::kInf;
    for (std::size_t i = 0; i < tree.leaves().size(); ++i) {
        const NodeId leaf = tree.leaves()[i];
        if (!expect.charged(leaf)) continue;
        auto& row = problem.add_row(lp::Sense::ge, leaf_payoff[i]);
        row.coeffs[0] = 1.0;
        add_gain_coeffs(tree, w, vars, leaf, row.coeffs, 1);
    }
    const lp::Result result = lp::solve(problem);
    if (result.status == lp::Status::unbounded) {
        throw Error(Errc::unbounded, "superhedging price is unbounded below");
    }
    if (result.status != lp::Status::optimal) {
        throw Error(Errc::infeasible, "superhedging problem is infeasible");
    }

    HedgeSolution out;
    out.price = result.x[0];
    out.strategy = strategy_from(tree, vars, result.x, 1);
    const std::vector<double> gains = terminal_gains(market, out.strategy);
    out.leaf_slack.assign(gains.size(), kNaN);
    for (std::size_t i = 0; i < gains.size(); ++i) {
        if (expect.charged(tree.leaves()[i])) out.leaf_slack[i] = out.price + gains[i] - leaf_payoff[i];
    }
    return out;
}

RobustPrice robust_price(const Market& market, const MeasureFamily& pricing,
                         const MeasureFamily& actual, const std::vector<double>& leaf_payoff,
                         double tol) {
    const EventTree& tree = market.tree();
    const Classification wealth =
        classify_process(tree, pricing, wealth_process(market), tree.horizon(), tol);
    if (!wealth.at_least(MartingaleClass::g_supermartingale)) {
        throw Error(Errc::not_risk_neutral, "wealth is not a G-supermartingale under the pricing family (slack " +
                                                std::to_string(wealth.worst_upper_slack) + " at node '" +
                                                tree.label(wealth.worst_node) + "')");
    }
    const SublinearExpectation expect(tree, pricing);
    RobustPrice out;
    out.value = expect.root_value(leaf_payoff, Bound::upper);
    out.hedge_price = superhedge(market, actual, leaf_payoff).price;
    out.duality_gap = std::abs(out.hedge_price - out.value);
    return out;
}

}  // namespace bubbletree
