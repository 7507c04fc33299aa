#include <cmath>
#include <cstdio>
#include <ostream>

#include "cli_internal.hpp"

namespace cournot::cli {

std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (v == 0.0) v = 0.0;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char ch : field) {
        if (ch == '"') out += '"';
        out += ch == '\n' ? ' ' : ch;
    }
    return out + "\"";
}

namespace {

void flatten(const Json& node, const std::string& prefix, std::vector<std::pair<std::string, std::string>>& out) {
    if (node.is_object()) {
        for (auto it = node.begin(); it != node.end(); ++it) {
            flatten(*it, prefix.empty() ? it.key() : prefix + "." + it.key(), out);
        }
    } else if (node.is_array()) {
        for (std::size_t i = 0; i < node.size(); ++i) flatten(node[i], prefix + "." + std::to_string(i), out);
    } else if (node.is_number_float()) {
        out.emplace_back(prefix, fmt(node.get<double>()));
    } else if (node.is_string()) {
        out.emplace_back(prefix, node.get<std::string>());
    } else {
        out.emplace_back(prefix, node.dump());
    }
}

}  // namespace

void write_csv(std::ostream& os, const Table& t, const RunConfig& cfg, const Json& tolerances) {
    os << "# command=" << cfg.command << '\n';
    for (const auto& [k, v] : echo(cfg)) os << "# config." << k << '=' << v << '\n';
    std::vector<std::pair<std::string, std::string>> tol;
    flatten(tolerances, "", tol);
    for (const auto& [k, v] : tol) os << "# tolerance." << k << '=' << v << '\n';
    for (const auto& [k, v] : t.meta) os << "# " << k << '=' << v << '\n';
    for (std::size_t i = 0; i < t.header.size(); ++i) os << (i ? "," : "") << t.header[i];
    os << '\n';
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << csv_escape(row[i]);
        os << '\n';
    }
}

void write_table_json(std::ostream& os, const Table& t, const RunConfig& cfg, const Json& tolerances) {
    Json doc = Json::object();
    doc["config"] = config_json(cfg);
    doc["tolerances"] = tolerances;
    Json meta = Json::object();
    for (const auto& [k, v] : t.meta) meta[k] = v;
    doc["metadata"] = meta;
    doc["columns"] = t.header;
    doc["rows"] = t.rows;
    os << doc.dump(2) << '\n';
}

void write_flat_csv(std::ostream& os, const Json& doc) {
    std::vector<std::pair<std::string, std::string>> rows;
    flatten(doc, "", rows);
    os << "key,value\n";
    for (const auto& [k, v] : rows) os << csv_escape(k) << ',' << csv_escape(v) << '\n';
}

}  // namespace cournot::cli
