#include "bubbletree/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace bubbletree::fixtures {

namespace {

MarketSpec blank_spec(std::vector<NodeSpec> nodes, int horizon) {
    MarketSpec spec;
    spec.tree = EventTree(std::move(nodes), horizon);
    const std::size_t n = spec.tree.size();
    spec.rate.assign(n, 0.0);
    spec.price.assign(n, 0.0);
    spec.dividend.assign(n, 0.0);
    return spec;
}

NodeId id(const MarketSpec& spec, const char* label) { return *spec.tree.find(label); }

MeasureFamily root_box(const EventTree& tree, double lo, double hi, FamilyRole role) {
    const double lower[] = {lo, 1.0 - hi};
    const double upper[] = {hi, 1.0 - lo};
    return uniform_box_family(tree, lower, upper, role);
}

double round_to(double v, double tick) { return tick > 0.0 ? std::round(v / tick) * tick : v; }

}  // namespace

Instance ex1(double lo, double hi) {
    MarketSpec spec = blank_spec({{"root", "", 0}, {"u", "root", 1}, {"d", "root", 1},
                                  {"uu", "u", 2}, {"dd", "d", 2}},
                                 2);
    spec.price[id(spec, "root")] = 1.0;
    spec.price[id(spec, "u")] = 1.5;
    spec.price[id(spec, "d")] = 0.5;
    for (const char* leaf : {"uu", "dd"}) {
        spec.tau.nodes.push_back(id(spec, leaf));
        spec.payoff[id(spec, leaf)] = 1.0;
    }
    spec.tau_kind = TauKind::unbounded_finite;
    Market market(std::move(spec));
    MeasureFamily actual = root_box(market.tree(), lo, hi, FamilyRole::actual);
    MeasureFamily pricing = root_box(market.tree(), lo, hi, FamilyRole::pricing);
    return Instance{"ex1", std::move(market), std::move(actual), std::move(pricing), {}};
}

Instance ex2() {
    Instance inst = ex1(0.5, 0.7);
    inst.name = "ex2";
    return inst;
}

Instance ex3(double hi) {
    Instance base = ex1(0.2, hi);
    MarketSpec spec = base.market.spec();
    spec.tau_kind = TauKind::bounded;
    return Instance{"ex3", Market(std::move(spec)), std::move(base.actual), std::move(base.pricing), {}};
}

Instance ex1_one_period(double lo, double hi) {
    MarketSpec spec = blank_spec({{"root", "", 0}, {"u", "root", 1}, {"d", "root", 1}}, 1);
    spec.price[id(spec, "root")] = 1.0;
    spec.price[id(spec, "u")] = 1.5;
    spec.price[id(spec, "d")] = 0.5;
    spec.tau_kind = TauKind::possibly_infinite;
    Market market(std::move(spec));
    MeasureFamily actual = root_box(market.tree(), lo, hi, FamilyRole::actual);
    MeasureFamily pricing = root_box(market.tree(), lo, hi, FamilyRole::pricing);
    return Instance{"ex1geom", std::move(market), std::move(actual), std::move(pricing), {}};
}

Instance fiat(int periods, double y_lo, double y_hi) {
    std::vector<NodeSpec> nodes{{"root", "", 0}};
    std::vector<double> inflation{1.0};
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i].time == periods) continue;
        const std::string parent = nodes[i].id;
        const int t = nodes[i].time + 1;
        nodes.push_back({parent + "l", parent, t});
        inflation.push_back(inflation[i] * y_lo);
        nodes.push_back({parent + "h", parent, t});
        inflation.push_back(inflation[i] * y_hi);
    }
    MarketSpec spec = blank_spec(nodes, periods);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        spec.price[*spec.tree.find(nodes[i].id)] = 1.0 / inflation[i];
    }
    spec.tau_kind = TauKind::possibly_infinite;
    Market market(std::move(spec));
    const double lower[] = {0.0, 0.0};
    const double upper[] = {1.0, 1.0};
    MeasureFamily actual = uniform_box_family(market.tree(), lower, upper, FamilyRole::actual);
    MeasureFamily pricing = uniform_box_family(market.tree(), lower, upper, FamilyRole::pricing);
    return Instance{"fiat", std::move(market), std::move(actual), std::move(pricing), {}};
}

Instance overpriced() {
    MarketSpec spec = blank_spec({{"root", "", 0}, {"u", "root", 1}, {"d", "root", 1}}, 1);
    spec.price[id(spec, "root")] = 1.2;
    spec.tau.nodes = {id(spec, "u"), id(spec, "d")};
    spec.payoff[id(spec, "u")] = 0.9;
    spec.payoff[id(spec, "d")] = 0.6;
    spec.tau_kind = TauKind::bounded;
    Market market(std::move(spec));
    MeasureFamily actual = root_box(market.tree(), 0.3, 0.6, FamilyRole::actual);
    return Instance{"overpriced", std::move(market), std::move(actual), std::nullopt, {}};
}

MeasureFamily random_box_family(const EventTree& tree, std::uint64_t seed, FamilyRole role,
                                double max_width) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    RectangularFamily rect;
    rect.transitions.resize(tree.size());
    for (NodeId n = 0; n < tree.size(); ++n) {
        const std::size_t k = tree.children(n).size();
        TransitionBox box;
        if (k == 1) {
            box.lower = box.upper = {1.0};
        } else if (k > 1) {
            std::vector<double> p(k);
            for (double& v : p) v = 0.2 + 0.8 * unit(rng);
            const double sum = std::accumulate(p.begin(), p.end(), 0.0);
            const double width = max_width * unit(rng);
            for (std::size_t i = 0; i < k; ++i) {
                p[i] /= sum;
                box.lower.push_back(std::max(0.0, std::floor((p[i] - width * unit(rng)) * 1e4) / 1e4));
                box.upper.push_back(std::min(1.0, std::ceil((p[i] + width * unit(rng)) * 1e4) / 1e4));
            }
        }
        rect.transitions[n] = std::move(box);
    }
    return MeasureFamily(std::move(rect), role);
}

MeasureFamily random_point_family(const EventTree& tree, std::uint64_t seed, FamilyRole role) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.2, 1.0);
    RectangularFamily rect;
    rect.transitions.resize(tree.size());
    for (NodeId n = 0; n < tree.size(); ++n) {
        const std::size_t k = tree.children(n).size();
        if (k == 0) {
            rect.transitions[n] = TransitionBox{};
            continue;
        }
        std::vector<double> p(k);
        for (double& v : p) v = unit(rng);
        const double sum = std::accumulate(p.begin(), p.end(), 0.0);
        for (double& v : p) v /= sum;
        rect.transitions[n] = TransitionVertices{{p}};
    }
    return MeasureFamily(std::move(rect), role);
}

Instance random_instance(std::uint64_t seed, const RandomOptions& opt) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto uniform_int = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    const double tick = opt.price_tick;

    const int depth = uniform_int(1, std::max(1, opt.max_depth));
    std::vector<NodeSpec> nodes{{"n0", "", 0}};
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i].time == depth) continue;
        int k = opt.max_branching <= 1 ? 1 : uniform_int(2, opt.max_branching);
        if (opt.max_branching > 1 && unit(rng) < 0.1) k = 1;
        for (int c = 0; c < k; ++c) {
            nodes.push_back({"n" + std::to_string(nodes.size()), nodes[i].id, nodes[i].time + 1});
        }
    }
    MarketSpec spec = blank_spec(nodes, depth);
    const EventTree& tree = spec.tree;
    const std::size_t size = tree.size();

    // Phase per node: 0 before tau, 1 at tau, 2 after.
    std::vector<int> phase(size, 0);
    for (NodeId n = 0; n < size; ++n) {  // parents precede children in generation order
        auto p = tree.parent(n);
        if (!p) continue;
        if (phase[*p] != 0) {
            phase[n] = 2;
            continue;
        }
        bool stop = false;
        if (opt.tau == TauMode::leaves) stop = tree.is_leaf(n);
        if (opt.tau == TauMode::random) stop = unit(rng) < (tree.is_leaf(n) ? 0.7 : 0.25);
        if (stop) {
            phase[n] = 1;
            spec.tau.nodes.push_back(n);
        }
    }
    bool all_stopped = true;
    for (NodeId leaf : tree.leaves()) all_stopped = all_stopped && phase[leaf] != 0;
    if (!all_stopped) {
        spec.tau_kind = TauKind::possibly_infinite;
    } else if (opt.tau == TauMode::random && unit(rng) < 0.3) {
        spec.tau_kind = TauKind::unbounded_finite;
    } else {
        spec.tau_kind = TauKind::bounded;
    }

    std::vector<double> discount(size, 1.0);
    for (NodeId n = 0; n < size; ++n) {
        if (opt.rates && !tree.is_leaf(n)) spec.rate[n] = std::round(0.05 * unit(rng) * 1000.0) / 1000.0;
        if (auto p = tree.parent(n)) discount[n] = discount[*p] * (1.0 + spec.rate[*p]);
    }

    // Discounted wealth, generated top-down.
    std::vector<double> w(size, 0.0);
    w[tree.root()] = round_to(0.5 + unit(rng), tick);
    for (NodeId n = 0; n < size; ++n) {
        auto kids = tree.children(n);
        if (kids.empty()) continue;
        if (phase[n] != 0) {
            for (NodeId c : kids) w[c] = w[n];
            continue;
        }
        for (NodeId c : kids) w[c] = round_to(w[n] * (0.6 + 0.8 * unit(rng)), tick);
        if (opt.no_arbitrage) {
            const NodeId down = kids[uniform_int(0, static_cast<int>(kids.size()) - 1)];
            w[down] = round_to(w[n] * (0.6 + 0.39 * unit(rng)), tick);
            if (w[down] >= w[n]) w[down] = w[n] - std::max(tick, 1e-3);
        }
    }

    // Split wealth into price, dividends and payoff.
    std::vector<double> cum(size, 0.0);
    for (NodeId n = 0; n < size; ++n) {
        const double before = tree.parent(n) ? cum[*tree.parent(n)] : 0.0;
        cum[n] = before;
        if (phase[n] == 2) continue;
        double d = 0.0;
        if (opt.dividends && unit(rng) < 0.6) {
            d = std::min(round_to(0.05 * unit(rng) * w[n], tick), w[n] - before);
            d = std::max(d, 0.0);
        }
        cum[n] = before + d;
        spec.dividend[n] = d * discount[n];
        const double rest = std::max(0.0, w[n] - cum[n]);
        if (phase[n] == 0) {
            spec.price[n] = rest * discount[n];
        } else {
            spec.payoff[n] = rest * discount[n];
        }
    }

    Market market(std::move(spec));
    MeasureFamily actual = random_box_family(market.tree(), seed ^ 0x9e3779b97f4a7c15ULL, FamilyRole::actual);
    return Instance{"rand-" + std::to_string(seed), std::move(market), std::move(actual), std::nullopt, {}};
}

}  // namespace bubbletree::fixtures
