#include "bubbletree/market_file.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace bubbletree {

namespace {

struct Line {
    int number = 0;
    std::vector<std::string> tokens;
};

std::vector<Line> tokenize(std::string_view text) {
    std::vector<Line> lines;
    int number = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view raw = text.substr(pos, end - pos);
        ++number;
        if (auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
        std::istringstream in{std::string(raw)};
        Line line{number, {}};
        for (std::string tok; in >> tok;) line.tokens.push_back(tok);
        if (!line.tokens.empty()) lines.push_back(std::move(line));
        pos = end + 1;
    }
    return lines;
}

class Parser {
public:
    Parser(std::string_view text, std::string source) : source_(std::move(source)), lines_(tokenize(text)) {}

    Instance run();

private:
    [[noreturn]] void fail(const Line& line, const std::string& message) const {
        throw Error(Errc::invalid_input, source_ + ":" + std::to_string(line.number) + ": " + message);
    }
    void expect_args(const Line& line, std::size_t count) const {
        if (line.tokens.size() != count + 1) {
            fail(line, "'" + line.tokens[0] + "' expects " + std::to_string(count) + " argument(s)");
        }
    }
    double number(const Line& line, const std::string& tok) const {
        char* end = nullptr;
        const double v = std::strtod(tok.c_str(), &end);
        if (tok.empty() || *end != '\0' || !std::isfinite(v)) fail(line, "invalid number '" + tok + "'");
        return v;
    }
    int integer(const Line& line, const std::string& tok) const {
        const double v = number(line, tok);
        if (v != std::floor(v)) fail(line, "expected an integer, got '" + tok + "'");
        return static_cast<int>(v);
    }
    NodeId node(const Line& line, const std::string& label) const {
        auto id = tree_.find(label);
        if (!id) fail(line, "unknown node '" + label + "'");
        return *id;
    }
    MeasureFamily parse_family(const Line& header, std::size_t& i);

    std::string source_;
    std::vector<Line> lines_;
    EventTree tree_;
};

MeasureFamily Parser::parse_family(const Line& header, std::size_t& i) {
    expect_args(header, 2);
    const FamilyRole role = header.tokens[1] == "actual" ? FamilyRole::actual : FamilyRole::pricing;
    const std::string kind = header.tokens[2];
    if (kind != "rectangular" && kind != "explicit") fail(header, "family type must be rectangular or explicit");
    const std::string what = "family " + header.tokens[1];

    RectangularFamily rect;
    rect.transitions.resize(tree_.size());
    std::vector<char> seen(tree_.size(), 0);
    ExplicitFamily expl;
    bool closed = false;
    for (++i; i < lines_.size(); ++i) {
        const Line& line = lines_[i];
        const std::string& key = line.tokens[0];
        if (key == "end") {
            closed = true;
            break;
        }
        if (kind == "explicit") {
            if (key != "measure") fail(line, "explicit families only hold 'measure' lines");
            std::vector<double> q;
            for (std::size_t k = 1; k < line.tokens.size(); ++k) q.push_back(number(line, line.tokens[k]));
            if (q.size() != tree_.leaves().size()) {
                fail(line, "measure needs " + std::to_string(tree_.leaves().size()) + " leaf probabilities");
            }
            expl.measures.push_back(std::move(q));
            continue;
        }
        if (line.tokens.size() < 2) fail(line, "'" + key + "' needs a node id");
        const NodeId n = node(line, line.tokens[1]);
        const std::size_t arity = tree_.children(n).size();
        if (arity == 0) fail(line, "node '" + line.tokens[1] + "' is a leaf");
        if (seen[n]) fail(line, "transition for node '" + line.tokens[1] + "' given twice");
        seen[n] = 1;
        if (key == "bounds") {
            if (line.tokens.size() != 2 + 2 * arity) {
                fail(line, "bounds for node '" + line.tokens[1] + "' need " + std::to_string(2 * arity) +
                               " values (lower upper per child)");
            }
            TransitionBox box;
            for (std::size_t c = 0; c < arity; ++c) {
                box.lower.push_back(number(line, line.tokens[2 + 2 * c]));
                box.upper.push_back(number(line, line.tokens[3 + 2 * c]));
            }
            rect.transitions[n] = std::move(box);
        } else if (key == "vertices") {
            TransitionVertices vs;
            std::vector<double> current;
            auto flush = [&]() {
                if (current.size() != arity) {
                    fail(line, "vertex for node '" + line.tokens[1] + "' needs " + std::to_string(arity) + " values");
                }
                vs.vertices.push_back(std::move(current));
                current.clear();
            };
            for (std::size_t k = 2; k < line.tokens.size(); ++k) {
                if (line.tokens[k] == "|") {
                    flush();
                } else {
                    current.push_back(number(line, line.tokens[k]));
                }
            }
            flush();
            rect.transitions[n] = std::move(vs);
        } else {
            fail(line, "unknown family entry '" + key + "'");
        }
    }
    if (!closed) fail(header, what + " block is missing 'end'");

    MeasureFamily family;
    if (kind == "explicit") {
        if (expl.measures.empty()) fail(header, what + " has no measures");
        family = MeasureFamily(std::move(expl), role);
    } else {
        for (NodeId n = 0; n < tree_.size(); ++n) {
            if (seen[n] || tree_.is_leaf(n)) continue;
            if (tree_.children(n).size() == 1) {
                rect.transitions[n] = TransitionBox{{1.0}, {1.0}};
            } else {
                fail(header, what + " has no transition for node '" + tree_.label(n) + "'");
            }
        }
        family = MeasureFamily(std::move(rect), role);
    }
    if (auto report = validate_family(tree_, family); !report.ok()) {
        fail(header, what + " invalid: " + report.summary());
    }
    return family;
}

Instance Parser::run() {
    std::string name = source_;
    std::optional<int> horizon;
    std::vector<NodeSpec> nodes;
    for (const Line& line : lines_) {
        const std::string& key = line.tokens[0];
        if (key == "horizon") {
            expect_args(line, 1);
            horizon = integer(line, line.tokens[1]);
            if (*horizon < 1) fail(line, "horizon must be at least 1");
        } else if (key == "node") {
            expect_args(line, 3);
            const std::string parent = line.tokens[2] == "-" ? "" : line.tokens[2];
            nodes.push_back({line.tokens[1], parent, integer(line, line.tokens[3])});
        }
    }
    if (!horizon) throw Error(Errc::invalid_input, source_ + ": missing 'horizon'");
    if (nodes.empty()) throw Error(Errc::invalid_input, source_ + ": no 'node' lines");
    {
        std::set<std::string> ids;
        for (const auto& n : nodes) {
            if (!ids.insert(n.id).second) {
                throw Error(Errc::invalid_input, source_ + ": duplicate node id '" + n.id + "'");
            }
        }
    }
    try {
        tree_ = EventTree(nodes, *horizon);
    } catch (const Error& e) {
        throw Error(e.code(), source_ + ": " + e.what());
    }

    MarketSpec spec;
    spec.tree = tree_;
    const std::size_t size = tree_.size();
    std::vector<std::optional<double>> price(size), rate(size), dividend(size);
    std::optional<double> price_all, rate_all, dividend_all;
    std::optional<TauKind> tau_kind;
    std::optional<MeasureFamily> actual, pricing;
    MarketQuotes quotes;

    for (std::size_t i = 0; i < lines_.size(); ++i) {
        const Line& line = lines_[i];
        const std::string& key = line.tokens[0];
        if (key == "horizon" || key == "node") continue;
        if (key == "name") {
            if (line.tokens.size() < 2) fail(line, "'name' needs a value");
            name = line.tokens[1];
        } else if (key == "tau_kind") {
            expect_args(line, 1);
            tau_kind = parse_tau_kind(line.tokens[1]);
            if (!tau_kind) fail(line, "unknown tau_kind '" + line.tokens[1] + "'");
        } else if (key == "rate" || key == "price" || key == "dividend") {
            expect_args(line, 2);
            auto& per_node = key == "rate" ? rate : key == "price" ? price : dividend;
            auto& all = key == "rate" ? rate_all : key == "price" ? price_all : dividend_all;
            const double v = number(line, line.tokens[2]);
            if (line.tokens[1] == "*") {
                all = v;
            } else {
                per_node[node(line, line.tokens[1])] = v;
            }
        } else if (key == "tau") {
            expect_args(line, 2);
            const NodeId n = node(line, line.tokens[1]);
            if (spec.payoff.count(n)) fail(line, "tau node '" + line.tokens[1] + "' given twice");
            spec.tau.nodes.push_back(n);
            spec.payoff[n] = number(line, line.tokens[2]);
        } else if (key == "family") {
            if (line.tokens.size() < 2 || (line.tokens[1] != "actual" && line.tokens[1] != "pricing")) {
                fail(line, "family role must be actual or pricing");
            }
            auto& slot = line.tokens[1] == "actual" ? actual : pricing;
            if (slot) fail(line, "family " + line.tokens[1] + " given twice");
            slot = parse_family(line, i);
        } else if (key == "quote") {
            expect_args(line, 3);
            auto kind = parse_quote_kind(line.tokens[1]);
            if (!kind) fail(line, "unknown quote kind '" + line.tokens[1] + "'");
            quotes.values[*kind][node(line, line.tokens[2])] = number(line, line.tokens[3]);
        } else if (key == "quote_strike") {
            expect_args(line, 1);
            quotes.strike = number(line, line.tokens[1]);
        } else if (key == "quote_maturity") {
            expect_args(line, 1);
            quotes.maturity = integer(line, line.tokens[1]);
        } else {
            fail(line, "unknown keyword '" + key + "'");
        }
    }

    const std::set<NodeId> tau_set(spec.tau.nodes.begin(), spec.tau.nodes.end());
    spec.rate.assign(size, 0.0);
    spec.price.assign(size, 0.0);
    spec.dividend.assign(size, 0.0);
    for (NodeId n = 0; n < size; ++n) {
        bool before = true;
        for (NodeId a : tree_.path_to(n)) before = before && !tau_set.count(a);
        if (price[n]) {
            spec.price[n] = *price[n];
        } else if (price_all) {
            spec.price[n] = *price_all;
        } else if (before) {
            throw Error(Errc::invalid_input, source_ + ": missing price at node '" + tree_.label(n) + "'");
        }
        spec.rate[n] = rate[n].value_or(rate_all.value_or(0.0));
        spec.dividend[n] = dividend[n].value_or(dividend_all.value_or(0.0));
    }
    if (tau_kind) {
        spec.tau_kind = *tau_kind;
    } else {
        // Without an explicit flag, infer the kind the tau nodes allow.
        bool all_hit = true;
        for (NodeId leaf : tree_.leaves()) {
            bool hit = false;
            for (NodeId a : tree_.path_to(leaf)) hit = hit || tau_set.count(a);
            all_hit = all_hit && hit;
        }
        spec.tau_kind = all_hit ? TauKind::bounded : TauKind::possibly_infinite;
    }

    if (auto report = validate_market(spec); !report.ok()) {
        throw Error(Errc::invalid_input, source_ + ": invalid market: " + report.summary());
    }
    if (!actual) throw Error(Errc::invalid_input, source_ + ": missing 'family actual' block");
    Market market(std::move(spec));
    return Instance{name, std::move(market), std::move(*actual), std::move(pricing), std::move(quotes)};
}

std::string fmt_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void write_family(std::ostringstream& out, const EventTree& tree, const MeasureFamily& family,
                  const char* role) {
    out << "family " << role << ' ' << (family.is_rectangular() ? "rectangular" : "explicit") << '\n';
    if (!family.is_rectangular()) {
        for (const auto& q : family.explicit_form().measures) {
            out << "  measure";
            for (double p : q) out << ' ' << fmt_double(p);
            out << '\n';
        }
    } else {
        const auto& transitions = family.rectangular_form().transitions;
        for (NodeId n = 0; n < tree.size(); ++n) {
            if (tree.is_leaf(n)) continue;
            if (const auto* box = std::get_if<TransitionBox>(&transitions[n])) {
                if (box->lower.size() == 1 && box->lower[0] == 1.0 && box->upper[0] == 1.0) continue;
                out << "  bounds " << tree.label(n);
                for (std::size_t c = 0; c < box->lower.size(); ++c) {
                    out << ' ' << fmt_double(box->lower[c]) << ' ' << fmt_double(box->upper[c]);
                }
                out << '\n';
            } else {
                out << "  vertices " << tree.label(n);
                const auto& vs = std::get<TransitionVertices>(transitions[n]).vertices;
                for (std::size_t v = 0; v < vs.size(); ++v) {
                    if (v > 0) out << " |";
                    for (double p : vs[v]) out << ' ' << fmt_double(p);
                }
                out << '\n';
            }
        }
    }
    out << "end\n";
}

}  // namespace

Instance parse_market_text(std::string_view text, const std::string& source) {
    return Parser(text, source).run();
}

Instance parse_market_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::invalid_input, "cannot open market file '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_market_text(buffer.str(), path);
}

std::string format_market(const Instance& instance) {
    const Market& market = instance.market;
    const EventTree& tree = market.tree();
    const MarketSpec& spec = market.spec();
    std::ostringstream out;
    out << "name " << instance.name << '\n';
    out << "horizon " << tree.horizon() << '\n';
    out << "tau_kind " << to_string(spec.tau_kind) << '\n';
    for (NodeId n = 0; n < tree.size(); ++n) {
        auto p = tree.parent(n);
        out << "node " << tree.label(n) << ' ' << (p ? tree.label(*p) : "-") << ' ' << tree.time(n) << '\n';
    }
    for (NodeId n = 0; n < tree.size(); ++n) {
        if (market.before_tau(n)) out << "price " << tree.label(n) << ' ' << fmt_double(spec.price[n]) << '\n';
        if (spec.rate[n] != 0.0) out << "rate " << tree.label(n) << ' ' << fmt_double(spec.rate[n]) << '\n';
        if (spec.dividend[n] != 0.0) {
            out << "dividend " << tree.label(n) << ' ' << fmt_double(spec.dividend[n]) << '\n';
        }
    }
    for (NodeId n : spec.tau.nodes) out << "tau " << tree.label(n) << ' ' << fmt_double(spec.payoff.at(n)) << '\n';
    write_family(out, tree, instance.actual, "actual");
    if (instance.pricing) write_family(out, tree, *instance.pricing, "pricing");
    for (const auto& [kind, values] : instance.quotes.values) {
        for (const auto& [n, v] : values) {
            out << "quote " << to_string(kind) << ' ' << tree.label(n) << ' ' << fmt_double(v) << '\n';
        }
    }
    if (instance.quotes.strike) out << "quote_strike " << fmt_double(*instance.quotes.strike) << '\n';
    if (instance.quotes.maturity) out << "quote_maturity " << *instance.quotes.maturity << '\n';
    return out.str();
}

}  // namespace bubbletree
