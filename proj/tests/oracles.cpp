#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace oracle {

using namespace bubbletree;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double pick(Bound bound, double a, double b) { return bound == Bound::upper ? std::max(a, b) : std::min(a, b); }
double worst(Bound bound) { return bound == Bound::upper ? -kInf : kInf; }

double step(const std::vector<std::vector<double>>& verts, const std::vector<double>& vals, Bound bound) {
    double best = worst(bound);
    for (const auto& v : verts) {
        double s = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) s += v[i] * vals[i];
        best = pick(bound, best, s);
    }
    return best;
}

std::vector<std::vector<double>> node_vertices(const EventTree& tree, const MeasureFamily& family, NodeId n) {
    if (tree.children(n).size() == 1) return {{1.0}};
    return vertices(family.rectangular_form().transitions[n]);
}

}  // namespace

std::vector<std::vector<double>> box_vertices(const std::vector<double>& lo, const std::vector<double>& hi) {
    const std::size_t k = lo.size();
    std::vector<std::vector<double>> out;
    for (std::size_t free = 0; free < k; ++free) {
        for (std::size_t mask = 0; mask < (std::size_t{1} << (k - 1)); ++mask) {
            std::vector<double> p(k);
            double sum = 0.0;
            std::size_t bit = 0;
            for (std::size_t i = 0; i < k; ++i) {
                if (i == free) continue;
                p[i] = (mask >> bit++) & 1 ? hi[i] : lo[i];
                sum += p[i];
            }
            p[free] = 1.0 - sum;
            if (p[free] >= lo[free] - 1e-12 && p[free] <= hi[free] + 1e-12) out.push_back(p);
        }
    }
    return out;
}

std::vector<std::vector<double>> vertices(const TransitionSet& set) {
    if (const auto* box = std::get_if<TransitionBox>(&set)) return box_vertices(box->lower, box->upper);
    return std::get<TransitionVertices>(set).vertices;
}

std::vector<double> conditional(const EventTree& tree, const MeasureFamily& family,
                                const std::vector<double>& node_values, int T, Bound bound) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> out(tree.size(), nan);
    if (family.is_rectangular()) {
        for (NodeId n : tree.backward_order()) {
            if (tree.time(n) > T) continue;
            if (tree.time(n) == T) {
                out[n] = node_values[n];
                continue;
            }
            std::vector<double> vals;
            for (NodeId c : tree.children(n)) vals.push_back(out[c]);
            out[n] = step(node_vertices(tree, family, n), vals, bound);
        }
        return out;
    }
    const auto& measures = family.explicit_form().measures;
    for (NodeId n = 0; n < tree.size(); ++n) {
        if (tree.time(n) > T) continue;
        double best = worst(bound);
        for (const auto& m : measures) {
            double mass = 0.0, weighted = 0.0;
            for (NodeId leaf : tree.leaves_below(n)) {
                const double p = m[tree.leaf_index(leaf)];
                mass += p;
                weighted += p * node_values[tree.ancestor_at(leaf, T)];
            }
            if (mass > 1e-14) best = pick(bound, best, weighted / mass);
        }
        if (std::isfinite(best)) out[n] = best;
    }
    return out;
}

double root_value(const EventTree& tree, const MeasureFamily& family, const std::vector<double>& leaf_payoff,
                  Bound bound) {
    std::vector<double> vals(tree.size(), 0.0);
    for (NodeId leaf : tree.leaves()) vals[leaf] = leaf_payoff[tree.leaf_index(leaf)];
    return conditional(tree, family, vals, tree.horizon(), bound)[tree.root()];
}

std::vector<double> reach(const EventTree& tree, const MeasureFamily& family) {
    std::vector<double> out(tree.size(), 0.0);
    out[tree.root()] = 1.0;
    if (family.is_rectangular()) {
        for (auto it = tree.backward_order().rbegin(); it != tree.backward_order().rend(); ++it) {
            const NodeId n = *it;
            if (tree.is_leaf(n)) continue;
            const auto verts = node_vertices(tree, family, n);
            const auto kids = tree.children(n);
            for (std::size_t i = 0; i < kids.size(); ++i) {
                double best = 0.0;
                for (const auto& v : verts) best = std::max(best, v[i]);
                out[kids[i]] = out[n] * best;
            }
        }
        return out;
    }
    for (const auto& m : family.explicit_form().measures) {
        for (NodeId n = 0; n < tree.size(); ++n) {
            double mass = 0.0;
            for (NodeId leaf : tree.leaves_below(n)) mass += m[tree.leaf_index(leaf)];
            out[n] = std::max(out[n], mass);
        }
    }
    return out;
}

namespace {

struct Raw {
    std::vector<double> B;
    std::vector<int> phase;  // 0 before, 1 at, 2 after
};

Raw raw(const Market& market) {
    const MarketSpec& s = market.spec();
    const EventTree& tree = s.tree;
    Raw r{std::vector<double>(tree.size(), 1.0), std::vector<int>(tree.size(), 0)};
    std::vector<char> is_tau(tree.size(), 0);
    for (NodeId n : s.tau.nodes) is_tau[n] = 1;
    for (auto it = tree.backward_order().rbegin(); it != tree.backward_order().rend(); ++it) {
        const NodeId n = *it;
        if (auto p = tree.parent(n)) {
            r.B[n] = r.B[*p] * (1.0 + s.rate[*p]);
            r.phase[n] = r.phase[*p] >= 1 ? 2 : 0;
        }
        if (r.phase[n] == 0 && is_tau[n]) r.phase[n] = 1;
    }
    return r;
}

}  // namespace

std::vector<double> cash_flows(const Market& market) {
    const MarketSpec& s = market.spec();
    const EventTree& tree = s.tree;
    const Raw r = raw(market);
    std::vector<double> z(tree.size(), 0.0);
    for (auto it = tree.backward_order().rbegin(); it != tree.backward_order().rend(); ++it) {
        const NodeId n = *it;
        double prev = 0.0;
        if (auto p = tree.parent(n)) prev = z[*p];
        if (r.phase[n] == 2) {
            z[n] = prev;
            continue;
        }
        z[n] = prev + s.dividend[n] / r.B[n];
        if (r.phase[n] == 1) z[n] += s.payoff.at(n) / r.B[n];
    }
    return z;
}

std::vector<double> wealth(const Market& market) {
    const MarketSpec& s = market.spec();
    const Raw r = raw(market);
    std::vector<double> w = cash_flows(market);
    for (NodeId n = 0; n < w.size(); ++n) {
        if (r.phase[n] == 0) w[n] += s.price[n] / r.B[n];
    }
    return w;
}

bool local_arbitrage(const Market& market, const MeasureFamily& actual, double eps) {
    const EventTree& tree = market.tree();
    const auto w = wealth(market);
    const auto mass = reach(tree, actual);
    for (NodeId n = 0; n < tree.size(); ++n) {
        if (tree.is_leaf(n) || mass[n] <= 1e-14) continue;
        bool any_up = false, any_down = false;
        for (NodeId c : tree.children(n)) {
            if (mass[c] <= 1e-14) continue;
            const double d = w[c] - w[n];
            if (d > eps) any_up = true;
            if (d < -eps) any_down = true;
        }
        if (any_up && !any_down) return true;
    }
    return false;
}

std::optional<double> superhedge_value(const Market& market, const MeasureFamily& actual,
                                       const std::vector<double>& leaf_payoff) {
    const EventTree& tree = market.tree();
    const auto w = wealth(market);
    const auto mass = reach(tree, actual);
    std::vector<double> v(tree.size(), 0.0);
    for (NodeId n : tree.backward_order()) {
        if (mass[n] <= 1e-14) continue;
        if (tree.is_leaf(n)) {
            v[n] = leaf_payoff[tree.leaf_index(n)];
            continue;
        }
        std::vector<NodeId> kids;
        for (NodeId c : tree.children(n)) {
            if (mass[c] > 1e-14) kids.push_back(c);
        }
        double best = -kInf;
        for (NodeId a : kids) {
            const double da = w[a] - w[n];
            if (da <= 1e-12) best = std::max(best, v[a]);
            for (NodeId b : kids) {
                const double db = w[b] - w[n];
                if (da < -1e-12 && db > 1e-12) {
                    const double qa = db / (db - da);
                    best = std::max(best, qa * v[a] + (1.0 - qa) * v[b]);
                }
            }
        }
        if (!std::isfinite(best)) return std::nullopt;
        v[n] = best;
    }
    return v[tree.root()];
}

std::vector<double> path_gains(const Market& market, const std::vector<double>& holding) {
    const EventTree& tree = market.tree();
    const auto w = wealth(market);
    std::vector<double> out;
    for (NodeId leaf : tree.leaves()) {
        const auto path = tree.path_to(leaf);
        double g = 0.0;
        for (std::size_t i = 1; i < path.size(); ++i) g += holding[path[i - 1]] * (w[path[i]] - w[path[i - 1]]);
        out.push_back(g);
    }
    return out;
}

double american_value(const EventTree& tree, const MeasureFamily& rect,
                      const std::function<double(NodeId)>& payoff, int T) {
    // values[n]: value of every stopping rule started at n
    std::vector<std::vector<double>> values(tree.size());
    for (NodeId n : tree.backward_order()) {
        if (tree.time(n) > T) continue;
        values[n].push_back(payoff(n));
        if (tree.time(n) == T) continue;
        const auto kids = tree.children(n);
        const auto verts = node_vertices(tree, rect, n);
        std::vector<std::size_t> idx(kids.size(), 0);
        while (true) {
            std::vector<double> vals;
            for (std::size_t i = 0; i < kids.size(); ++i) vals.push_back(values[kids[i]][idx[i]]);
            values[n].push_back(step(verts, vals, Bound::upper));
            std::size_t i = 0;
            while (i < kids.size() && ++idx[i] == values[kids[i]].size()) idx[i++] = 0;
            if (i == kids.size()) break;
        }
    }
    const auto& root = values[tree.root()];
    return *std::max_element(root.begin(), root.end());
}

std::vector<double> random_payoff(std::mt19937_64& rng, std::size_t n, double lo, double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> out(n);
    for (double& x : out) x = u(rng);
    return out;
}

}  // namespace oracle
