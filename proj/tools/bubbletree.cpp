#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "bubbletree/analysis.hpp"
#include "bubbletree/error.hpp"
#include "bubbletree/market_file.hpp"

using namespace bubbletree;

namespace {

ClaimKind claim_kind(const std::string& name) {
    auto kind = parse_claim_kind(name);
    if (!kind) throw Error(Errc::invalid_input, "unknown claim '" + name + "'");
    return *kind;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Asset bubbles and robust pricing on finite event trees"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string format = "text";
    double tolerance = kDefaultTolerance;
    app.add_option("--format", format, "Output format")
        ->check(CLI::IsMember({"text", "machine", "csv"}))
        ->capture_default_str();
    app.add_option("--tolerance", tolerance, "Tolerance for every verification inequality")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    std::string path;
    auto* analyze = app.add_subcommand("analyze", "Arbitrage, fundamental price, bubble and its properties");
    analyze->add_option("file", path, "Market file")->required();

    std::string claim = "ecall";
    double strike = 0.0;
    int maturity = -1;
    bool no_dominance = false;
    auto* price = app.add_subcommand("price", "Fundamental price of a claim");
    price->add_option("file", path, "Market file")->required();
    price->add_option("--claim", claim, "forward, ecall, eput, acall or aput")
        ->check(CLI::IsMember({"forward", "ecall", "eput", "acall", "aput"}));
    price->add_option("--strike", strike, "Nominal strike");
    price->add_option("--maturity", maturity, "Maturity date (defaults to the horizon)");
    price->add_flag("--no-dominance", no_dominance, "Assume no dominance when checking quoted prices");

    std::string payoff = "claim";
    std::string payoff_path;
    double constant = 0.0;
    auto* hedge = app.add_subcommand("hedge", "Superhedging price, robust price and their gap");
    hedge->add_option("file", path, "Market file")->required();
    hedge->add_option("--payoff", payoff, "claim, file or const")->check(CLI::IsMember({"claim", "file", "const"}));
    hedge->add_option("--payoff-path", payoff_path, "Leaf payoff file for --payoff file");
    hedge->add_option("--value", constant, "Discounted payoff for --payoff const");
    hedge->add_option("--claim", claim, "forward, ecall or eput")->check(CLI::IsMember({"forward", "ecall", "eput"}));
    hedge->add_option("--strike", strike, "Nominal strike");
    hedge->add_option("--maturity", maturity, "Maturity date (defaults to the horizon)");

    std::string process = "beta";
    auto* classify = app.add_subcommand("classify", "Supermartingale class of a process");
    classify->add_option("file", path, "Market file")->required();
    classify->add_option("--process", process, "S, W, Wstar or beta")
        ->check(CLI::IsMember({"S", "W", "Wstar", "beta"}));

    auto* dominance = app.add_subcommand("dominance", "Search for a strategy dominating buy-and-hold");
    dominance->add_option("file", path, "Market file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        const Instance inst = parse_market_file(path);
        Report report;
        if (*analyze) {
            report = run_analyze(inst, tolerance);
        } else if (*price) {
            report = run_price(inst, PriceRequest{claim_kind(claim), strike, maturity, no_dominance}, tolerance);
        } else if (*hedge) {
            std::vector<double> leaf_payoff;
            std::string description = payoff;
            if (payoff == "file") {
                if (payoff_path.empty()) throw Error(Errc::invalid_input, "--payoff file requires --payoff-path");
                leaf_payoff = read_leaf_payoff_file(payoff_path, inst.market.tree());
                description += " " + payoff_path;
            } else if (payoff == "const") {
                leaf_payoff.assign(inst.market.tree().leaves().size(), constant);
                description += " " + format_number(constant);
            } else {
                Claim c;
                c.kind = claim_kind(claim);
                c.strike = strike;
                c.maturity = maturity < 0 ? inst.market.horizon() : maturity;
                leaf_payoff = claim_leaf_payoff(inst.market, c);
                description += " " + claim + " K=" + format_number(strike) + " T=" + std::to_string(c.maturity);
            }
            report = run_hedge(inst, leaf_payoff, description, tolerance);
        } else if (*classify) {
            report = run_classify(inst, process, tolerance);
        } else {
            report = run_dominance(inst, tolerance);
        }
        if (format == "machine") {
            std::cout << emit_machine(report);
        } else if (format == "csv") {
            std::cout << emit_csv(report);
        } else {
            std::cout << emit_text(report);
        }
        return report.exit_status;
    } catch (const Error& e) {
        std::cerr << "error (" << to_string(e.code()) << "): " << e.what() << '\n';
        return exit_code(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}
