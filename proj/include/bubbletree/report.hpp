#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace bubbletree {

/// Rounds to 12 significant digits; NaN passes through.
double round12(double v);

struct ReportValue {
    std::string key;
    std::string label;  // human form used by the text emitter
    double value = 0.0;
    bool operator==(const ReportValue&) const = default;
};

struct ReportFact {
    std::string key;
    std::string label;
    std::string value;
    bool operator==(const ReportFact&) const = default;
};

struct ReportVerdict {
    std::string name;
    bool pass = true;
    bool applicable = true;
    std::string detail;
    std::vector<std::string> nodes;
    bool operator==(const ReportVerdict&) const = default;
};

struct ReportProcess {
    std::string name;
    std::vector<double> values;  // per node; NaN where undefined
    bool operator==(const ReportProcess& other) const;
};

/// Result of one command. Numbers are rounded on insertion so the machine
/// form round-trips exactly.
struct Report {
    std::string command;
    std::vector<std::string> args;
    std::vector<std::string> node_ids;
    std::vector<int> times;
    std::vector<ReportValue> values;
    std::vector<ReportFact> facts;
    std::vector<ReportVerdict> verdicts;
    std::vector<ReportProcess> processes;
    std::vector<std::string> diagnostics;
    int exit_status = 0;

    void add_value(std::string key, std::string label, double value);
    void add_fact(std::string key, std::string label, std::string value);
    void add_verdict(ReportVerdict verdict);
    void add_process(std::string name, const std::vector<double>& values);

    const ReportValue* find_value(std::string_view key) const;
    const ReportFact* find_fact(std::string_view key) const;
    const ReportProcess* find_process(std::string_view name) const;

    bool operator==(const Report&) const = default;
};

std::string emit_text(const Report& report);
std::string emit_machine(const Report& report);
Report parse_machine(std::string_view document);

inline constexpr const char* kCsvColumns[] = {"S", "Sstar", "beta", "W", "Wstar",
                                              "beta_upper_slack", "beta_lower_slack"};

/// One row per node; the first columns are fixed (see kCsvColumns), any
/// further processes follow in report order.
std::string emit_csv(const Report& report);

/// %.12g formatting used by every emitter.
std::string format_number(double v);

}  // namespace bubbletree
