#include "bubbletree/ambiguity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace bubbletree {

namespace {

constexpr double kSumTolerance = 1e-12;
const double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<double> indicator(std::size_t size, std::size_t at) {
    std::vector<double> e(size, 0.0);
    e[at] = 1.0;
    return e;
}

}  // namespace

const char* to_string(MartingaleClass cls) {
    switch (cls) {
        case MartingaleClass::g_martingale: return "G_martingale";
        case MartingaleClass::g_supermartingale: return "G_supermartingale";
        case MartingaleClass::infi_supermartingale: return "infi_supermartingale";
        case MartingaleClass::none: return "none";
    }
    return "unknown";
}

bool Classification::at_least(MartingaleClass wanted) const {
    // Enumerators are ordered strongest first.
    return static_cast<int>(cls) <= static_cast<int>(wanted);
}

MeasureFamily uniform_box_family(const EventTree& tree, std::span<const double> lower,
                                 std::span<const double> upper, FamilyRole role) {
    RectangularFamily rect;
    rect.transitions.resize(tree.size());
    for (NodeId n = 0; n < tree.size(); ++n) {
        const std::size_t k = tree.children(n).size();
        TransitionBox box;
        if (k == 1) {
            box.lower = {1.0};
            box.upper = {1.0};
        } else if (k == lower.size()) {
            box.lower.assign(lower.begin(), lower.end());
            box.upper.assign(upper.begin(), upper.end());
        } else if (k > 0) {
            throw Error(Errc::invalid_input, "uniform box family: arity mismatch at node '" +
                                                 tree.label(n) + "'");
        }
        rect.transitions[n] = std::move(box);
    }
    return MeasureFamily(std::move(rect), role);
}

ValidationReport validate_family(const EventTree& tree, const MeasureFamily& family) {
    ValidationReport report;
    auto add = [&](const std::string& what, const std::string& node = {}) {
        for (auto& issue : report.issues) {
            if (issue.invariant == what) {
                if (!node.empty()) issue.nodes.push_back(node);
                return;
            }
        }
        report.issues.push_back({what, node.empty() ? std::vector<std::string>{}
                                                    : std::vector<std::string>{node}});
    };
    auto check_vector = [&](std::span<const double> p) {
        double sum = 0.0;
        for (double x : p) {
            if (!(x >= 0.0) || !std::isfinite(x)) return false;
            sum += x;
        }
        return std::abs(sum - 1.0) <= kSumTolerance;
    };

    if (!family.is_rectangular()) {
        const auto& measures = family.explicit_form().measures;
        if (measures.empty()) add("family is empty");
        for (std::size_t m = 0; m < measures.size(); ++m) {
            if (measures[m].size() != tree.leaves().size()) {
                add("measure length must equal leaf count", "measure " + std::to_string(m));
            } else if (!check_vector(measures[m])) {
                add("measure must be nonnegative and sum to 1", "measure " + std::to_string(m));
            }
        }
        return report;
    }

    const auto& transitions = family.rectangular_form().transitions;
    if (transitions.size() != tree.size()) {
        add("rectangular family must cover every node");
        return report;
    }
    for (NodeId n = 0; n < tree.size(); ++n) {
        if (tree.is_leaf(n)) continue;
        const std::size_t k = tree.children(n).size();
        const std::string& label = tree.label(n);
        if (const auto* box = std::get_if<TransitionBox>(&transitions[n])) {
            if (box->lower.size() != k || box->upper.size() != k) {
                add("transition arity must equal child count", label);
                continue;
            }
            double lo = 0.0, hi = 0.0;
            bool ordered = true;
            for (std::size_t i = 0; i < k; ++i) {
                if (!std::isfinite(box->lower[i]) || !std::isfinite(box->upper[i]) ||
                    box->lower[i] < 0.0 || box->upper[i] > 1.0 + kSumTolerance ||
                    box->lower[i] > box->upper[i]) {
                    ordered = false;
                }
                lo += box->lower[i];
                hi += box->upper[i];
            }
            if (!ordered) add("box bounds must satisfy 0 <= lower <= upper <= 1", label);
            if (lo > 1.0 + kSumTolerance || hi < 1.0 - kSumTolerance) {
                add("box does not intersect the simplex", label);
            }
        } else {
            const auto& vertices = std::get<TransitionVertices>(transitions[n]).vertices;
            if (vertices.empty()) add("vertex list is empty", label);
            for (const auto& v : vertices) {
                if (v.size() != k) {
                    add("transition arity must equal child count", label);
                } else if (!check_vector(v)) {
                    add("vertex must be nonnegative and sum to 1", label);
                }
            }
        }
    }
    return report;
}

StepOptimum optimize_transition(const TransitionSet& set, std::span<const double> child_values,
                                Bound bound) {
    StepOptimum out;
    if (const auto* box = std::get_if<TransitionBox>(&set)) {
        const std::size_t k = box->lower.size();
        out.weights = box->lower;
        double remaining = 1.0 - std::accumulate(box->lower.begin(), box->lower.end(), 0.0);
        std::vector<std::size_t> order(k);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return bound == Bound::upper ? child_values[a] > child_values[b]
                                         : child_values[a] < child_values[b];
        });
        for (std::size_t i : order) {
            if (remaining <= 0.0) break;
            const double add = std::min(box->upper[i] - box->lower[i], remaining);
            out.weights[i] += add;
            remaining -= add;
        }
        out.value = 0.0;
        for (std::size_t i = 0; i < k; ++i) out.value += out.weights[i] * child_values[i];
        return out;
    }
    const auto& vertices = std::get<TransitionVertices>(set).vertices;
    bool first = true;
    for (const auto& v : vertices) {
        double value = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) value += v[i] * child_values[i];
        const bool better = bound == Bound::upper ? value > out.value : value < out.value;
        if (first || better) {
            out.value = value;
            out.weights = v;
            first = false;
        }
    }
    return out;
}

std::vector<std::vector<double>> transition_vertices(const TransitionSet& set) {
    if (const auto* vs = std::get_if<TransitionVertices>(&set)) return vs->vertices;
    const auto& box = std::get<TransitionBox>(set);
    const std::size_t k = box.lower.size();
    std::vector<std::vector<double>> out;
    if (k == 0) return out;
    if (k > 20) throw Error(Errc::cap_exceeded, "box vertex enumeration limited to 20 children");
    auto push_unique = [&](std::vector<double> p) {
        for (const auto& q : out) {
            bool same = true;
            for (std::size_t i = 0; i < k && same; ++i) same = std::abs(p[i] - q[i]) <= kSumTolerance;
            if (same) return;
        }
        out.push_back(std::move(p));
    };
    for (std::size_t free = 0; free < k; ++free) {
        const std::size_t combos = std::size_t{1} << (k - 1);
        for (std::size_t mask = 0; mask < combos; ++mask) {
            std::vector<double> p(k, 0.0);
            double used = 0.0;
            std::size_t bit = 0;
            for (std::size_t i = 0; i < k; ++i) {
                if (i == free) continue;
                p[i] = (mask >> bit++) & 1 ? box.upper[i] : box.lower[i];
                used += p[i];
            }
            p[free] = 1.0 - used;
            if (p[free] >= box.lower[free] - kSumTolerance && p[free] <= box.upper[free] + kSumTolerance) {
                p[free] = std::clamp(p[free], box.lower[free], box.upper[free]);
                push_unique(std::move(p));
            }
        }
    }
    return out;
}

AdaptedProcess leaf_process(const EventTree& tree, std::span<const double> leaf_payoff) {
    if (leaf_payoff.size() != tree.leaves().size()) {
        throw Error(Errc::invalid_input, "leaf payoff length must equal leaf count");
    }
    AdaptedProcess x(tree.size());
    for (std::size_t i = 0; i < tree.leaves().size(); ++i) x[tree.leaves()[i]] = leaf_payoff[i];
    return x;
}

std::vector<double> node_masses(const EventTree& tree, std::span<const double> leaf_measure) {
    std::vector<double> mass(tree.size(), 0.0);
    for (std::size_t i = 0; i < tree.leaves().size(); ++i) mass[tree.leaves()[i]] = leaf_measure[i];
    for (NodeId n : tree.backward_order()) {
        if (auto p = tree.parent(n)) mass[*p] += mass[n];
    }
    return mass;
}

// ---------------------------------------------------------------------------
// SublinearExpectation

SublinearExpectation::SublinearExpectation(const EventTree& tree, const MeasureFamily& family)
    : tree_(tree), family_(family) {
    if (auto report = validate_family(tree, family); !report.ok()) {
        throw Error(Errc::invalid_input, "invalid measure family: " + report.summary());
    }
    reach_upper_.assign(tree.size(), 0.0);
    if (family.is_rectangular()) {
        const auto& transitions = family.rectangular_form().transitions;
        const auto& order = tree.backward_order();
        reach_upper_[tree.root()] = 1.0;
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            NodeId n = *it;
            auto kids = tree.children(n);
            for (std::size_t i = 0; i < kids.size(); ++i) {
                const double p = optimize_transition(transitions[n], indicator(kids.size(), i),
                                                     Bound::upper).value;
                reach_upper_[kids[i]] = reach_upper_[n] * p;
            }
        }
        return;
    }
    for (const auto& measure : family.explicit_form().measures) {
        node_mass_.push_back(node_masses(tree, measure));
        for (NodeId n = 0; n < tree.size(); ++n) {
            reach_upper_[n] = std::max(reach_upper_[n], node_mass_.back()[n]);
        }
    }
}

std::vector<double> SublinearExpectation::conditional(const AdaptedProcess& x, int target,
                                                      Bound bound) const {
    if (!family_.is_rectangular()) return conditional_explicit(x, target, bound);
    const auto& transitions = family_.rectangular_form().transitions;
    std::vector<double> out(tree_.size(), kNaN);
    std::vector<double> child_values;
    for (NodeId n : tree_.backward_order()) {
        const int t = tree_.time(n);
        if (t > target) continue;
        if (t == target) {
            out[n] = x[n];
            continue;
        }
        auto kids = tree_.children(n);
        child_values.resize(kids.size());
        for (std::size_t i = 0; i < kids.size(); ++i) child_values[i] = out[kids[i]];
        out[n] = optimize_transition(transitions[n], child_values, bound).value;
    }
    return out;
}

std::vector<double> SublinearExpectation::conditional_explicit(const AdaptedProcess& x, int target,
                                                               Bound bound) const {
    std::vector<double> out(tree_.size(), kNaN);
    std::vector<double> weighted(tree_.size());
    for (const auto& mass : node_mass_) {
        std::fill(weighted.begin(), weighted.end(), 0.0);
        for (NodeId n : tree_.backward_order()) {
            const int t = tree_.time(n);
            if (t > target) continue;
            if (t == target) weighted[n] = mass[n] * x[n];
            if (auto p = tree_.parent(n)) weighted[*p] += weighted[n];
        }
        for (NodeId n = 0; n < tree_.size(); ++n) {
            if (tree_.time(n) > target || mass[n] <= kMassEpsilon) continue;
            const double value = weighted[n] / mass[n];
            if (std::isnan(out[n]) || (bound == Bound::upper ? value > out[n] : value < out[n])) {
                out[n] = value;
            }
        }
    }
    return out;
}

double SublinearExpectation::at(const AdaptedProcess& x, int target, NodeId node, Bound bound) const {
    if (tree_.time(node) > target) {
        throw Error(Errc::invalid_input, "conditioning node '" + tree_.label(node) +
                                             "' lies after the target time");
    }
    const double value = conditional(x, target, bound)[node];
    if (std::isnan(value)) {
        throw Error(Errc::polar_node, "no measure of the family charges node '" + tree_.label(node) + "'");
    }
    return value;
}

double SublinearExpectation::root_value(std::span<const double> leaf_payoff, Bound bound) const {
    return at(leaf_process(tree_, leaf_payoff), tree_.horizon(), tree_.root(), bound);
}

std::vector<double> SublinearExpectation::maximizing_measure(std::span<const double> leaf_payoff) const {
    const auto& leaves = tree_.leaves();
    if (!family_.is_rectangular()) {
        const auto& measures = family_.explicit_form().measures;
        std::size_t best = 0;
        double best_value = -std::numeric_limits<double>::infinity();
        for (std::size_t m = 0; m < measures.size(); ++m) {
            double value = 0.0;
            for (std::size_t i = 0; i < leaves.size(); ++i) value += measures[m][i] * leaf_payoff[i];
            if (value > best_value) {
                best_value = value;
                best = m;
            }
        }
        return measures[best];
    }
    const auto& transitions = family_.rectangular_form().transitions;
    const AdaptedProcess x = leaf_process(tree_, leaf_payoff);
    std::vector<double> value(tree_.size(), 0.0);
    std::vector<std::vector<double>> weights(tree_.size());
    std::vector<double> child_values;
    for (NodeId n : tree_.backward_order()) {
        if (tree_.is_leaf(n)) {
            value[n] = x[n];
            continue;
        }
        auto kids = tree_.children(n);
        child_values.resize(kids.size());
        for (std::size_t i = 0; i < kids.size(); ++i) child_values[i] = value[kids[i]];
        StepOptimum step = optimize_transition(transitions[n], child_values, Bound::upper);
        value[n] = step.value;
        weights[n] = std::move(step.weights);
    }
    std::vector<double> mass(tree_.size(), 0.0);
    mass[tree_.root()] = 1.0;
    const auto& order = tree_.backward_order();
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        auto kids = tree_.children(*it);
        for (std::size_t i = 0; i < kids.size(); ++i) mass[kids[i]] = mass[*it] * weights[*it][i];
    }
    std::vector<double> out(leaves.size());
    for (std::size_t i = 0; i < leaves.size(); ++i) out[i] = mass[leaves[i]];
    return out;
}

// ---------------------------------------------------------------------------
// Enumeration

std::vector<std::vector<double>> enumerate_extreme_measures(const EventTree& tree,
                                                            const MeasureFamily& family,
                                                            std::size_t cap) {
    if (auto report = validate_family(tree, family); !report.ok()) {
        throw Error(Errc::invalid_input, "invalid measure family: " + report.summary());
    }
    if (!family.is_rectangular()) return family.explicit_form().measures;

    const auto& transitions = family.rectangular_form().transitions;
    std::vector<std::vector<std::vector<double>>> vertices(tree.size());
    std::vector<double> count(tree.size(), 1.0);
    for (NodeId n : tree.backward_order()) {
        if (tree.is_leaf(n)) continue;
        vertices[n] = transition_vertices(transitions[n]);
        double c = static_cast<double>(vertices[n].size());
        for (NodeId kid : tree.children(n)) c *= count[kid];
        count[n] = c;
    }
    const NodeId root = tree.root();
    if (count[root] > static_cast<double>(cap)) {
        throw Error(Errc::cap_exceeded, "extreme measure count " + std::to_string(count[root]) +
                                            " exceeds cap " + std::to_string(cap));
    }

    // Per node: list of measures over leaves_below(node), in DFS leaf order.
    std::vector<std::vector<std::vector<double>>> lists(tree.size());
    for (NodeId n : tree.backward_order()) {
        if (tree.is_leaf(n)) {
            lists[n] = {{1.0}};
            continue;
        }
        auto kids = tree.children(n);
        std::vector<std::vector<double>> result;
        for (const auto& v : vertices[n]) {
            std::vector<std::size_t> pick(kids.size(), 0);
            while (true) {
                std::vector<double> combined;
                for (std::size_t i = 0; i < kids.size(); ++i) {
                    for (double q : lists[kids[i]][pick[i]]) combined.push_back(v[i] * q);
                }
                result.push_back(std::move(combined));
                std::size_t i = 0;
                while (i < kids.size() && ++pick[i] == lists[kids[i]].size()) pick[i++] = 0;
                if (i == kids.size()) break;
            }
        }
        for (NodeId kid : kids) std::vector<std::vector<double>>().swap(lists[kid]);
        lists[n] = std::move(result);
    }

    const std::vector<NodeId> dfs_leaves = tree.leaves_below(root);
    std::vector<std::vector<double>> out;
    out.reserve(lists[root].size());
    for (const auto& dfs_measure : lists[root]) {
        std::vector<double> measure(tree.leaves().size(), 0.0);
        for (std::size_t i = 0; i < dfs_leaves.size(); ++i) {
            measure[tree.leaf_index(dfs_leaves[i])] = dfs_measure[i];
        }
        out.push_back(std::move(measure));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Classification

Classification classify_process(const EventTree& tree, const MeasureFamily& family,
                                const AdaptedProcess& process, int horizon, double tol) {
    const SublinearExpectation expect(tree, family);
    Classification out;
    out.node_upper_slack.assign(tree.size(), kNaN);
    out.node_lower_slack.assign(tree.size(), kNaN);
    out.worst_upper_slack = std::numeric_limits<double>::infinity();
    out.worst_lower_slack = std::numeric_limits<double>::infinity();

    AdaptedProcess cleaned(tree.size());
    for (NodeId n = 0; n < tree.size(); ++n) cleaned[n] = process.defined(n) ? process[n] : 0.0;

    std::vector<char> covered(tree.size());
    for (int target = 1; target <= horizon; ++target) {
        for (NodeId n : tree.backward_order()) {
            const int t = tree.time(n);
            if (t > target) continue;
            if (t == target) {
                covered[n] = process.defined(n);
                continue;
            }
            bool all = true;
            for (NodeId kid : tree.children(n)) all = all && covered[kid];
            covered[n] = all;
        }
        const std::vector<double> upper = expect.conditional(cleaned, target, Bound::upper);
        const std::vector<double> lower = expect.conditional(cleaned, target, Bound::lower);
        for (NodeId n = 0; n < tree.size(); ++n) {
            if (tree.time(n) >= target || !covered[n] || !process.defined(n) || !expect.charged(n)) continue;
            if (std::isnan(upper[n]) || std::isnan(lower[n])) continue;
            const double up_slack = process[n] - upper[n];
            const double lo_slack = process[n] - lower[n];
            ++out.checks;
            if (up_slack < out.worst_upper_slack) {
                out.worst_upper_slack = up_slack;
                out.worst_node = n;
            }
            out.worst_lower_slack = std::min(out.worst_lower_slack, lo_slack);
            out.martingale_gap = std::max(out.martingale_gap, std::abs(up_slack));
            auto& nu = out.node_upper_slack[n];
            auto& nl = out.node_lower_slack[n];
            nu = std::isnan(nu) ? up_slack : std::min(nu, up_slack);
            nl = std::isnan(nl) ? lo_slack : std::min(nl, lo_slack);
        }
    }
    if (out.checks == 0) {
        out.worst_upper_slack = 0.0;
        out.worst_lower_slack = 0.0;
        out.cls = MartingaleClass::g_martingale;
        return out;
    }
    if (out.martingale_gap <= tol) {
        out.cls = MartingaleClass::g_martingale;
    } else if (out.worst_upper_slack >= -tol) {
        out.cls = MartingaleClass::g_supermartingale;
    } else if (out.worst_lower_slack >= -tol) {
        out.cls = MartingaleClass::infi_supermartingale;
    } else {
        out.cls = MartingaleClass::none;
    }
    return out;
}

bool check_full_support(const EventTree& tree, const MeasureFamily& family) {
    const SublinearExpectation expect(tree, family);
    for (NodeId leaf : tree.leaves()) {
        if (!expect.charged(leaf)) return false;
    }
    return true;
}

bool check_absolute_continuity(const EventTree& tree, const MeasureFamily& pricing,
                               const MeasureFamily& actual,
                               const std::vector<std::vector<double>>& leaf_payoffs) {
    const SublinearExpectation pricing_expect(tree, pricing);
    const SublinearExpectation actual_expect(tree, actual);
    const auto& leaves = tree.leaves();
    for (const auto& payoff : leaf_payoffs) {
        const std::vector<double> q = pricing_expect.maximizing_measure(payoff);
        if (!actual.is_rectangular()) {
            bool dominated = false;
            for (const auto& p : actual.explicit_form().measures) {
                bool ok = true;
                for (std::size_t i = 0; i < leaves.size() && ok; ++i) {
                    ok = q[i] <= kMassEpsilon || p[i] > kMassEpsilon;
                }
                if (ok) {
                    dominated = true;
                    break;
                }
            }
            if (!dominated) return false;
            continue;
        }
        // A rectangular family dominates q iff every transition q uses is
        // individually attainable; averaging the per-child maximizers then
        // gives one dominating measure.
        const std::vector<double> mass = node_masses(tree, q);
        const auto& transitions = actual.rectangular_form().transitions;
        for (NodeId n = 0; n < tree.size(); ++n) {
            if (tree.is_leaf(n) || mass[n] <= kMassEpsilon) continue;
            auto kids = tree.children(n);
            for (std::size_t i = 0; i < kids.size(); ++i) {
                if (mass[kids[i]] <= kMassEpsilon) continue;
                const double reach = optimize_transition(transitions[n], indicator(kids.size(), i),
                                                         Bound::upper).value;
                if (reach <= kMassEpsilon) return false;
            }
        }
    }
    return true;
}

}  // namespace bubbletree
