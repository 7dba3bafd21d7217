#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "aclp/error.hpp"
#include "aclp/experiment.hpp"
#include "aclp/fuzzymine.hpp"
#include "aclp/indicators.hpp"
#include "aclp/mag.hpp"

namespace aclp {

using Json = nlohmann::json;

inline const char* kVersion = "0.1.0";

inline Json edge_marks_json(const std::pair<std::string, std::string>& e,
                            const std::pair<Mark, Mark>& m) {
    return Json{{"a", e.first},
                {"b", e.second},
                {"marks", {mark_name(m.first), mark_name(m.second)}}};
}

inline Json mag_json(const Mag& mag) {
    Json edges = Json::array();
    for (const auto& [e, m] : mag.edges) edges.push_back(edge_marks_json(e, m));
    return Json{{"nodes", mag.nodes}, {"edges", edges}};
}

inline Mark parse_mark(const std::string& s) {
    if (s == "tail") return Mark::tail;
    if (s == "arrow") return Mark::arrow;
    throw ParseError("unknown edge mark: " + s);
}

inline Mag parse_mag_json(const Json& j) {
    Mag mag;
    try {
        mag.nodes = j.at("nodes").get<std::vector<std::string>>();
        for (const auto& e : j.at("edges")) {
            std::pair<std::string, std::string> key{e.at("a").get<std::string>(),
                                                    e.at("b").get<std::string>()};
            if (!(key.first < key.second))
                throw ParseError("edge endpoints must be ordered: " + key.first + ", " +
                                 key.second);
            mag.edges[key] = {parse_mark(e.at("marks").at(0).get<std::string>()),
                              parse_mark(e.at("marks").at(1).get<std::string>())};
        }
    } catch (const Json::exception& ex) {
        throw ParseError(std::string("malformed graph JSON: ") + ex.what());
    }
    return mag;
}

inline Json mb_json(const MarkovBlanket& mb) {
    Json edges = Json::array();
    for (const auto& [e, m] : mb.edges) edges.push_back(edge_marks_json(e, m));
    return Json{{"target", mb.target},
                {"pa", mb.pa},
                {"ch", mb.ch},
                {"und", mb.und},
                {"sp", mb.sp},
                {"dis", mb.dis},
                {"pa_dis", mb.pa_dis},
                {"dis_ch", mb.dis_ch},
                {"pa_dis_ch", mb.pa_dis_ch},
                {"edges", edges},
                {"notes", mb.notes}};
}

inline std::string mb_dot(const MarkovBlanket& mb) {
    std::string out = "digraph blanket {\n";
    auto quote = [](const std::string& s) {
        std::string q = "\"";
        for (char c : s) {
            if (c == '"' || c == '\\') q += '\\';
            q += c;
        }
        return q + "\"";
    };
    out += "  " + quote(mb.target) + " [shape=box];\n";
    for (const auto& v : mb.flat()) out += "  " + quote(v) + ";\n";
    for (const auto& [e, m] : mb.edges) {
        out += "  " + quote(e.first) + " -> " + quote(e.second);
        if (m.first == Mark::arrow && m.second == Mark::arrow)
            out += " [dir=both]";
        else if (m.first == Mark::tail && m.second == Mark::tail)
            out += " [dir=none]";
        out += ";\n";
    }
    out += "}\n";
    return out;
}

inline Json edge_json(const Edge& e) { return Json{{"from", e.first}, {"to", e.second}}; }

inline Json process_model_json(const ProcessModel& m) {
    Json edges = Json::array();
    for (const auto& [e, sig] : m.edges) {
        Json rec = edge_json(e);
        rec["sig"] = sig;
        edges.push_back(rec);
    }
    return Json{{"nodes", m.nodes}, {"edges", edges}, {"virtual_nodes", m.virtual_nodes}};
}

inline ProcessModel parse_process_model_json(const Json& j) {
    ProcessModel m;
    try {
        m.nodes = j.at("nodes").get<std::vector<std::string>>();
        for (const auto& e : j.at("edges"))
            m.edges[{e.at("from").get<std::string>(), e.at("to").get<std::string>()}] =
                e.at("sig").get<double>();
        m.virtual_nodes = j.at("virtual_nodes").get<std::map<std::string, std::string>>();
    } catch (const Json::exception& ex) {
        throw ParseError(std::string("malformed model JSON: ") + ex.what());
    }
    return m;
}

inline Json conflict_report_json(const ConflictReport& rep) {
    auto pairs = [](const std::vector<std::pair<Edge, Edge>>& v, const char* ka,
                    const char* kb) {
        Json arr = Json::array();
        for (const auto& [a, b] : v) arr.push_back(Json{{ka, edge_json(a)}, {kb, edge_json(b)}});
        return arr;
    };
    Json cycles = Json::array();
    for (const auto& rec : rep.nary_cycles) {
        Json removed = Json::array();
        for (const auto& e : rec.removed) removed.push_back(edge_json(e));
        cycles.push_back(
            Json{{"cycle", rec.cycle}, {"action", rec.action}, {"removed", removed}});
    }
    return Json{{"binary_kept_loops", pairs(rep.binary_kept_loops, "forward", "reverse")},
                {"binary_exceptions_removed",
                 pairs(rep.binary_exceptions_removed, "removed", "kept")},
                {"binary_concurrency_removed",
                 pairs(rep.binary_concurrency_removed, "forward", "reverse")},
                {"nary_cycles", cycles},
                {"unary_resolved", rep.unary_resolved}};
}

inline Json bounds_json(const DiscreteTable& table) {
    Json cards = Json::object(), bins = Json::object();
    for (std::size_t i = 0; i < table.variables.size(); ++i)
        cards[table.variables[i]] = table.cards[i];
    for (const auto& [v, b] : table.bounds) bins[v] = b;
    return Json{{"bins", bins},
                {"cards", cards},
                {"dropped", table.dropped},
                {"warnings", table.warnings}};
}

inline Json metrics_json(const MetricsReport& m) {
    return Json{{"mnc", m.mnc},         {"mni", m.mni},       {"mnf", m.mnf},
                {"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}};
}

// wall_seconds is the one field that varies between identical runs.
inline Json experiment_json(const ExperimentResult& res) {
    Json reps = Json::array();
    for (const auto& r : res.repeats) {
        Json rep{{"seed", r.seed}, {"predicted", r.predicted}};
        if (r.metrics)
            rep["metrics"] = metrics_json(*r.metrics);
        else
            rep["error"] = r.error;
        reps.push_back(rep);
    }
    return Json{{"config",
                 {{"latents", res.config.latents},
                  {"sample_size", res.config.sample_size},
                  {"repeats", res.config.repeats},
                  {"target", res.config.target},
                  {"seed", res.config.seed},
                  {"significance", res.config.significance}}},
                {"resolved_latents", res.resolved_latents},
                {"resolved_target", res.resolved_target},
                {"truth", res.truth},
                {"repeats", reps},
                {"mean_precision", res.mean_precision},
                {"mean_recall", res.mean_recall},
                {"mean_f1", res.mean_f1},
                {"wall_seconds", res.wall_seconds}};
}

struct RunManifest {
    std::string subcommand;
    std::vector<std::string> argv;  // full invocation minus program name
    std::vector<std::string> inputs;
    Json config = Json::object();
    Json seed;  // null when the subcommand takes none
    std::vector<std::string> outputs;
    std::string version = kVersion;
    std::string started;
    std::string finished;
};

inline Json manifest_json(const RunManifest& m) {
    return Json{{"subcommand", m.subcommand}, {"argv", m.argv},
                {"inputs", m.inputs},         {"config", m.config},
                {"seed", m.seed},             {"outputs", m.outputs},
                {"version", m.version},       {"started", m.started},
                {"finished", m.finished}};
}

inline RunManifest parse_manifest(const Json& j) {
    RunManifest m;
    try {
        m.subcommand = j.at("subcommand").get<std::string>();
        m.argv = j.at("argv").get<std::vector<std::string>>();
        m.inputs = j.at("inputs").get<std::vector<std::string>>();
        m.config = j.at("config");
        m.seed = j.at("seed");
        m.outputs = j.at("outputs").get<std::vector<std::string>>();
        m.version = j.at("version").get<std::string>();
        m.started = j.at("started").get<std::string>();
        m.finished = j.at("finished").get<std::string>();
    } catch (const Json::exception& ex) {
        throw ParseError(std::string("malformed manifest: ") + ex.what());
    }
    return m;
}

inline Json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    Json j;
    try {
        in >> j;
    } catch (const Json::exception& ex) {
        throw ParseError(path + ": " + ex.what());
    }
    return j;
}

// Tmp-and-rename so readers never observe a partial file.
inline void write_text_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot write " + tmp);
        out << content;
        if (!out.flush()) throw DataError("write failed: " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw DataError("cannot move " + tmp + " into place");
}

inline void write_json_atomic(const std::string& path, const Json& j) {
    write_text_atomic(path, j.dump(2) + "\n");
}

}  // namespace aclp
