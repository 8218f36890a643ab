#include "bubbletree/report.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "bubbletree/error.hpp"

namespace bubbletree {

using nlohmann::json;

double round12(double v) {
    if (!std::isfinite(v)) return v;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    double r = std::strtod(buf, nullptr);
    return r == 0.0 ? 0.0 : r;  // no negative zero
}

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v == 0.0 ? 0.0 : v);
    return buf;
}

bool ReportProcess::operator==(const ReportProcess& other) const {
    if (name != other.name || values.size() != other.values.size()) return false;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const bool a = std::isnan(values[i]), b = std::isnan(other.values[i]);
        if (a != b || (!a && values[i] != other.values[i])) return false;
    }
    return true;
}

void Report::add_value(std::string key, std::string label, double value) {
    values.push_back({std::move(key), std::move(label), round12(value)});
}

void Report::add_fact(std::string key, std::string label, std::string value) {
    facts.push_back({std::move(key), std::move(label), std::move(value)});
}

void Report::add_verdict(ReportVerdict verdict) { verdicts.push_back(std::move(verdict)); }

void Report::add_process(std::string name, const std::vector<double>& vals) {
    ReportProcess p{std::move(name), {}};
    p.values.reserve(vals.size());
    for (double v : vals) p.values.push_back(round12(v));
    processes.push_back(std::move(p));
}

const ReportValue* Report::find_value(std::string_view key) const {
    for (const auto& v : values) {
        if (v.key == key) return &v;
    }
    return nullptr;
}

const ReportFact* Report::find_fact(std::string_view key) const {
    for (const auto& f : facts) {
        if (f.key == key) return &f;
    }
    return nullptr;
}

const ReportProcess* Report::find_process(std::string_view name) const {
    for (const auto& p : processes) {
        if (p.name == name) return &p;
    }
    return nullptr;
}

namespace {

json number_json(double v) { return std::isnan(v) ? json(nullptr) : json(v); }
double json_number(const json& j) {
    return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

}  // namespace

std::string emit_machine(const Report& r) {
    json doc;
    doc["command"] = r.command;
    doc["args"] = r.args;
    doc["exit_status"] = r.exit_status;
    json nodes = json::array();
    for (std::size_t i = 0; i < r.node_ids.size(); ++i) {
        nodes.push_back({{"id", r.node_ids[i]}, {"time", r.times[i]}});
    }
    doc["nodes"] = nodes;
    json values = json::array();
    for (const auto& v : r.values) values.push_back({{"key", v.key}, {"label", v.label}, {"value", number_json(v.value)}});
    doc["values"] = values;
    json facts = json::array();
    for (const auto& f : r.facts) facts.push_back({{"key", f.key}, {"label", f.label}, {"value", f.value}});
    doc["facts"] = facts;
    json verdicts = json::array();
    for (const auto& v : r.verdicts) {
        verdicts.push_back({{"name", v.name},
                            {"pass", v.pass},
                            {"applicable", v.applicable},
                            {"detail", v.detail},
                            {"nodes", v.nodes}});
    }
    doc["verdicts"] = verdicts;
    json processes = json::array();
    for (const auto& p : r.processes) {
        json vals = json::array();
        for (double v : p.values) vals.push_back(number_json(v));
        processes.push_back({{"name", p.name}, {"values", vals}});
    }
    doc["processes"] = processes;
    doc["diagnostics"] = r.diagnostics;
    return doc.dump(2) + "\n";
}

Report parse_machine(std::string_view document) {
    json doc;
    try {
        doc = json::parse(document);
    } catch (const json::exception& e) {
        throw Error(Errc::invalid_input, std::string("malformed report: ") + e.what());
    }
    Report r;
    try {
        r.command = doc.at("command").get<std::string>();
        r.args = doc.at("args").get<std::vector<std::string>>();
        r.exit_status = doc.at("exit_status").get<int>();
        for (const auto& n : doc.at("nodes")) {
            r.node_ids.push_back(n.at("id").get<std::string>());
            r.times.push_back(n.at("time").get<int>());
        }
        for (const auto& v : doc.at("values")) {
            r.values.push_back({v.at("key").get<std::string>(), v.at("label").get<std::string>(),
                                json_number(v.at("value"))});
        }
        for (const auto& f : doc.at("facts")) {
            r.facts.push_back({f.at("key").get<std::string>(), f.at("label").get<std::string>(),
                               f.at("value").get<std::string>()});
        }
        for (const auto& v : doc.at("verdicts")) {
            r.verdicts.push_back({v.at("name").get<std::string>(), v.at("pass").get<bool>(),
                                  v.at("applicable").get<bool>(), v.at("detail").get<std::string>(),
                                  v.at("nodes").get<std::vector<std::string>>()});
        }
        for (const auto& p : doc.at("processes")) {
            ReportProcess proc{p.at("name").get<std::string>(), {}};
            for (const auto& v : p.at("values")) proc.values.push_back(json_number(v));
            r.processes.push_back(std::move(proc));
        }
        r.diagnostics = doc.at("diagnostics").get<std::vector<std::string>>();
    } catch (const json::exception& e) {
        throw Error(Errc::invalid_input, std::string("malformed report: ") + e.what());
    }
    return r;
}

std::string emit_text(const Report& r) {
    std::ostringstream out;
    out << "command: " << r.command;
    for (const auto& a : r.args) out << ' ' << a;
    out << '\n';
    for (const auto& f : r.facts) out << f.label << ": " << f.value << '\n';
    for (const auto& v : r.values) out << v.label << " = " << format_number(v.value) << '\n';
    for (const auto& v : r.verdicts) {
        out << (v.applicable ? (v.pass ? "PASS" : "FAIL") : "SKIP") << ' ' << v.name;
        if (!v.detail.empty()) out << ": " << v.detail;
        if (!v.nodes.empty()) {
            out << " [nodes:";
            for (const auto& n : v.nodes) out << ' ' << n;
            out << ']';
        }
        out << '\n';
    }
    if (!r.processes.empty()) {
        out << "node time";
        for (const auto& p : r.processes) out << ' ' << p.name;
        out << '\n';
        for (std::size_t i = 0; i < r.node_ids.size(); ++i) {
            out << r.node_ids[i] << ' ' << r.times[i];
            for (const auto& p : r.processes) out << ' ' << format_number(p.values[i]);
            out << '\n';
        }
    }
    for (const auto& d : r.diagnostics) out << "note: " << d << '\n';
    return out.str();
}

std::string emit_csv(const Report& r) {
    std::vector<const ReportProcess*> columns;
    std::vector<std::string> names;
    for (const char* name : kCsvColumns) {
        columns.push_back(r.find_process(name));
        names.push_back(name);
    }
    for (const auto& p : r.processes) {
        bool fixed = false;
        for (const char* name : kCsvColumns) fixed = fixed || p.name == name;
        if (!fixed) {
            columns.push_back(&p);
            names.push_back(p.name);
        }
    }
    std::ostringstream out;
    out << "node,time";
    for (const auto& n : names) out << ',' << n;
    out << '\n';
    for (std::size_t i = 0; i < r.node_ids.size(); ++i) {
        out << r.node_ids[i] << ',' << r.times[i];
        for (const auto* col : columns) {
            out << ',';
            if (col && !std::isnan(col->values[i])) out << format_number(col->values[i]);
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace bubbletree
