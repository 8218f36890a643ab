#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <variant>

#include "bubbletree/analysis.hpp"
#include "bubbletree/error.hpp"
#include "bubbletree/fixtures.hpp"
#include "bubbletree/market_file.hpp"
#include "bubbletree/report.hpp"

namespace py = pybind11;
using namespace bubbletree;

namespace {

py::object to_dict(const Report& report) {
    return py::module_::import("json").attr("loads")(emit_machine(report));
}

ClaimKind claim_kind(const std::string& name) {
    auto kind = parse_claim_kind(name);
    if (!kind) throw Error(Errc::invalid_input, "unknown claim '" + name + "'");
    return *kind;
}

using Payoff = std::variant<double, std::vector<double>, std::map<std::string, double>>;

std::vector<double> leaf_payoff(const Instance& inst, const Payoff& payoff) {
    const EventTree& tree = inst.market.tree();
    const std::size_t leaves = tree.leaves().size();
    if (const double* c = std::get_if<double>(&payoff)) return std::vector<double>(leaves, *c);
    if (const auto* v = std::get_if<std::vector<double>>(&payoff)) {
        if (v->size() != leaves) {
            throw Error(Errc::invalid_input,
                        "payoff has " + std::to_string(v->size()) + " values for " + std::to_string(leaves) + " leaves");
        }
        return *v;
    }
    const auto& m = std::get<std::map<std::string, double>>(payoff);
    std::vector<double> out;
    out.reserve(leaves);
    for (NodeId leaf : tree.leaves()) {
        auto it = m.find(tree.label(leaf));
        if (it == m.end()) throw Error(Errc::invalid_input, "payoff missing leaf '" + tree.label(leaf) + "'");
        out.push_back(it->second);
    }
    if (m.size() != leaves) throw Error(Errc::invalid_input, "payoff names a node that is not a leaf");
    return out;
}

}  // namespace

PYBIND11_MODULE(bubbletree, m) {
    m.doc() = "Asset bubbles and robust pricing on finite event trees";

    static auto* error = new py::exception<Error>(m, "Error", PyExc_ValueError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::object exc = py::reinterpret_borrow<py::object>(*error)(e.what());
            exc.attr("code") = to_string(e.code());
            exc.attr("exit_code") = exit_code(e.code());
            PyErr_SetObject(error->ptr(), exc.ptr());
        }
    });

    py::class_<Instance>(m, "Market")
        .def_static("from_file", &parse_market_file, py::arg("path"))
        .def_static(
            "from_text", [](const std::string& text) { return parse_market_text(text); }, py::arg("text"))
        .def_readonly("name", &Instance::name)
        .def_property_readonly("horizon", [](const Instance& i) { return i.market.horizon(); })
        .def_property_readonly("node_ids",
                               [](const Instance& i) {
                                   std::vector<std::string> ids;
                                   for (NodeId n = 0; n < i.market.tree().size(); ++n)
                                       ids.push_back(i.market.tree().label(n));
                                   return ids;
                               })
        .def_property_readonly("leaf_ids",
                               [](const Instance& i) {
                                   std::vector<std::string> ids;
                                   for (NodeId n : i.market.tree().leaves()) ids.push_back(i.market.tree().label(n));
                                   return ids;
                               })
        .def("to_text", &format_market);

    m.def(
        "analyze", [](const Instance& i, double tol) { return to_dict(run_analyze(i, tol)); }, py::arg("market"),
        py::arg("tolerance") = kDefaultTolerance);
    m.def(
        "price",
        [](const Instance& i, const std::string& claim, double strike, int maturity, bool no_dominance, double tol) {
            return to_dict(run_price(i, PriceRequest{claim_kind(claim), strike, maturity, no_dominance}, tol));
        },
        py::arg("market"), py::arg("claim"), py::arg("strike"), py::arg("maturity") = -1,
        py::arg("no_dominance") = false, py::arg("tolerance") = kDefaultTolerance);
    m.def(
        "hedge",
        [](const Instance& i, const Payoff& payoff, double tol) {
            return to_dict(run_hedge(i, leaf_payoff(i, payoff), "python", tol));
        },
        py::arg("market"), py::arg("payoff"), py::arg("tolerance") = kDefaultTolerance,
        "Superhedge a discounted leaf payoff given as a constant, a list in leaf order or a {leaf id: value} map.");
    m.def(
        "hedge_claim",
        [](const Instance& i, const std::string& claim, double strike, int maturity, double tol) {
            Claim c;
            c.kind = claim_kind(claim);
            c.strike = strike;
            c.maturity = maturity < 0 ? i.market.horizon() : maturity;
            return to_dict(run_hedge(i, claim_leaf_payoff(i.market, c), "claim " + claim, tol));
        },
        py::arg("market"), py::arg("claim"), py::arg("strike"), py::arg("maturity") = -1,
        py::arg("tolerance") = kDefaultTolerance);
    m.def(
        "classify",
        [](const Instance& i, const std::string& process, double tol) { return to_dict(run_classify(i, process, tol)); },
        py::arg("market"), py::arg("process"), py::arg("tolerance") = kDefaultTolerance);
    m.def(
        "dominance", [](const Instance& i, double tol) { return to_dict(run_dominance(i, tol)); }, py::arg("market"),
        py::arg("tolerance") = kDefaultTolerance);

    m.def("ex1", [](double lo, double hi) { return fixtures::ex1(lo, hi); }, py::arg("lo") = 0.2, py::arg("hi") = 0.4);
    m.def("ex2", &fixtures::ex2);
    m.def("ex3", &fixtures::ex3, py::arg("hi") = 0.4);
    m.def("fiat", &fixtures::fiat, py::arg("periods") = 10, py::arg("y_lo") = 0.98, py::arg("y_hi") = 1.03);
}
