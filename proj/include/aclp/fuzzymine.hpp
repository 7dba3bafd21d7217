#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "aclp/error.hpp"
#include "aclp/eventlog.hpp"

namespace aclp {

using Edge = std::pair<std::string, std::string>;

// Directly-follows model. Virtual nodes live only in virtual_nodes; edge
// endpoints may name them. sig values are nonnegative.
struct ProcessModel {
    std::vector<std::string> nodes;
    std::map<Edge, double> edges;
    std::map<std::string, std::string> virtual_nodes;

    bool operator==(const ProcessModel&) const = default;
};

struct MiningConfig {
    double preserve_threshold = 0.27;
    double ratio_threshold = 0.35;
    double edge_cutoff = 0.2;
    double nary_similarity_eps = 0.05;
    int max_cycle_len = 8;
};

inline void validate(const MiningConfig& cfg) {
    auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!unit(cfg.preserve_threshold) || !unit(cfg.ratio_threshold) || !unit(cfg.edge_cutoff))
        throw DataError("mining thresholds must lie in [0,1]");
    if (!(cfg.nary_similarity_eps > 0.0))
        throw DataError("nary_similarity_eps must be positive");
    if (cfg.max_cycle_len < 3)
        throw DataError("max_cycle_len must be at least 3");
}

struct NaryCycleRecord {
    std::vector<std::string> cycle;
    std::string action;  // "exception" | "concurrency" | "unresolved"
    std::vector<Edge> removed;

    bool operator==(const NaryCycleRecord&) const = default;
};

// Every removed edge existed in the pre-resolution model.
struct ConflictReport {
    // (forward, reverse) with forward < reverse, both kept
    std::vector<std::pair<Edge, Edge>> binary_kept_loops;
    // (removed, kept)
    std::vector<std::pair<Edge, Edge>> binary_exceptions_removed;
    // (forward, reverse), both removed
    std::vector<std::pair<Edge, Edge>> binary_concurrency_removed;
    std::vector<NaryCycleRecord> nary_cycles;
    std::vector<std::string> unary_resolved;

    bool operator==(const ConflictReport&) const = default;
};

inline bool has_edge(const ProcessModel& m, const std::string& a, const std::string& b) {
    return m.edges.count({a, b}) != 0;
}

inline double edge_sig(const ProcessModel& m, const std::string& a, const std::string& b) {
    auto it = m.edges.find({a, b});
    return it == m.edges.end() ? 0.0 : it->second;
}

inline double out_sum(const ProcessModel& m, const std::string& a) {
    double s = 0.0;
    for (auto it = m.edges.lower_bound({a, std::string()});
         it != m.edges.end() && it->first.first == a; ++it)
        s += it->second;
    return s;
}

inline double in_sum(const ProcessModel& m, const std::string& b) {
    double s = 0.0;
    for (const auto& [e, v] : m.edges)
        if (e.second == b) s += v;
    return s;
}

inline ProcessModel build_initial_model(const EventLog& log) {
    if (log.traces.empty()) throw DataError("empty log");
    ProcessModel m;
    m.nodes = log.activity_universe;
    for (const auto& [pair, count] : directly_follows_counts(log))
        m.edges[pair] = static_cast<double>(count);
    return m;
}

inline double relative_importance(const ProcessModel& m, const std::string& a,
                                  const std::string& b) {
    if (!has_edge(m, a, b))
        throw DataError("relative importance undefined: no edge " + a + " -> " + b);
    double s = edge_sig(m, a, b);
    double os = out_sum(m, a);
    double is = in_sum(m, b);
    if (os <= 0.0 || is <= 0.0)
        throw DataError("relative importance undefined: zero flow at " + a + " -> " + b);
    return 0.5 * s / os + 0.5 * s / is;
}

// Relative importance of the chain that starts at cycle[start] and traverses
// the remaining N-1 edges of the cycle. Each chain edge contributes its
// outgoing and incoming flow ratios; non-final chain edges additionally
// contribute the forwarding ratio through their head, all weighted 1/(2(N-1)).
inline double nary_relative_importance(const ProcessModel& m,
                                       const std::vector<std::string>& cycle,
                                       std::size_t start) {
    const std::size_t n = cycle.size();
    if (n < 3) throw DataError("chain importance needs a cycle of length >= 3");
    if (start >= n) throw DataError("chain start index out of range");
    for (std::size_t i = 0; i < n; ++i)
        if (!has_edge(m, cycle[i], cycle[(i + 1) % n]))
            throw DataError("not a cycle in the model: missing edge " + cycle[i] + " -> " +
                            cycle[(i + 1) % n]);
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const std::string& tail = cycle[(start + k) % n];
        const std::string& head = cycle[(start + k + 1) % n];
        double s = edge_sig(m, tail, head);
        total += s / out_sum(m, tail) + s / in_sum(m, head);
        if (k + 2 < n) total += s / out_sum(m, head);
    }
    return total / (2.0 * static_cast<double>(n - 1));
}

// Decisions use the pre-resolution rel values for every pair, so the outcome
// does not depend on pair iteration order.
inline ProcessModel resolve_binary(ProcessModel m, const MiningConfig& cfg,
                                   ConflictReport& rep) {
    std::vector<Edge> pairs;
    for (const auto& [e, s] : m.edges)
        if (e.first < e.second && m.edges.count({e.second, e.first}))
            pairs.push_back(e);
    std::vector<Edge> doomed;
    for (const auto& [x, y] : pairs) {
        double fwd = relative_importance(m, x, y);
        double rev = relative_importance(m, y, x);
        if (fwd >= cfg.preserve_threshold && rev >= cfg.preserve_threshold) {
            rep.binary_kept_loops.push_back({{x, y}, {y, x}});
        } else if (std::abs(fwd - rev) > cfg.ratio_threshold) {
            Edge lower = fwd < rev ? Edge{x, y} : Edge{y, x};
            Edge higher = fwd < rev ? Edge{y, x} : Edge{x, y};
            rep.binary_exceptions_removed.push_back({lower, higher});
            doomed.push_back(lower);
        } else {
            rep.binary_concurrency_removed.push_back({{x, y}, {y, x}});
            doomed.push_back({x, y});
            doomed.push_back({y, x});
        }
    }
    for (const auto& e : doomed) m.edges.erase(e);
    return m;
}

namespace detail {

// Simple directed cycles of 3..max_len nodes in canonical rotation (smallest
// node first). Each cycle is found exactly once: the walk never visits a node
// ordered before its start.
inline std::vector<std::vector<std::string>> bounded_cycles(
    const std::map<std::string, std::vector<std::string>>& adj, int max_len) {
    std::vector<std::vector<std::string>> out;
    std::vector<std::string> path;
    std::set<std::string> on_path;
    auto dfs = [&](auto&& self, const std::string& start, const std::string& at) -> void {
        auto it = adj.find(at);
        if (it == adj.end()) return;
        for (const auto& next : it->second) {
            if (next == start) {
                if (path.size() >= 3) out.push_back(path);
                continue;
            }
            if (next < start || on_path.count(next)) continue;
            if (static_cast<int>(path.size()) >= max_len) continue;
            path.push_back(next);
            on_path.insert(next);
            self(self, start, next);
            on_path.erase(next);
            path.pop_back();
        }
    };
    for (const auto& [start, heads] : adj) {
        (void)heads;
        path = {start};
        on_path = {start};
        dfs(dfs, start, start);
    }
    std::sort(out.begin(), out.end(),
              [](const std::vector<std::string>& a, const std::vector<std::string>& b) {
                  return a.size() != b.size() ? a.size() < b.size() : a < b;
              });
    return out;
}

// One representative cycle through the smallest node of each strongly
// connected component with at least two nodes.
inline std::vector<std::vector<std::string>> representative_cycles(
    const std::map<std::string, std::vector<std::string>>& adj) {
    std::set<std::string> nodes;
    for (const auto& [tail, heads] : adj) {
        nodes.insert(tail);
        for (const auto& h : heads) nodes.insert(h);
    }
    std::map<std::string, std::vector<std::string>> radj;
    for (const auto& [tail, heads] : adj)
        for (const auto& h : heads) radj[h].push_back(tail);

    std::vector<std::string> order;
    std::set<std::string> seen;
    auto fill = [&](auto&& self, const std::string& u) -> void {
        seen.insert(u);
        auto it = adj.find(u);
        if (it != adj.end())
            for (const auto& v : it->second)
                if (!seen.count(v)) self(self, v);
        order.push_back(u);
    };
    for (const auto& u : nodes)
        if (!seen.count(u)) fill(fill, u);

    std::map<std::string, int> comp;
    int ncomp = 0;
    auto assign = [&](auto&& self, const std::string& u, int c) -> void {
        comp[u] = c;
        auto it = radj.find(u);
        if (it != radj.end())
            for (const auto& v : it->second)
                if (!comp.count(v)) self(self, v, c);
    };
    for (auto it = order.rbegin(); it != order.rend(); ++it)
        if (!comp.count(*it)) assign(assign, *it, ncomp++);

    std::map<int, std::set<std::string>> members;
    for (const auto& [u, c] : comp) members[c].insert(u);

    std::vector<std::vector<std::string>> out;
    std::vector<std::pair<std::string, int>> comps;
    for (const auto& [c, ms] : members)
        if (ms.size() >= 2) comps.push_back({*ms.begin(), c});
    std::sort(comps.begin(), comps.end());
    for (const auto& [root, c] : comps) {
        const auto& ms = members[c];
        // shortest path back to root inside the component
        std::map<std::string, std::string> parent;
        std::vector<std::string> frontier = {root};
        std::set<std::string> visited = {root};
        std::string hit;
        while (!frontier.empty() && hit.empty()) {
            std::vector<std::string> next;
            for (const auto& u : frontier) {
                auto it = adj.find(u);
                if (it == adj.end()) continue;
                for (const auto& v : it->second) {
                    if (!ms.count(v)) continue;
                    if (v == root) {
                        hit = u;
                        break;
                    }
                    if (visited.insert(v).second) {
                        parent[v] = u;
                        next.push_back(v);
                    }
                }
                if (!hit.empty()) break;
            }
            frontier = std::move(next);
        }
        std::vector<std::string> cyc;
        for (std::string u = hit; u != root; u = parent[u]) cyc.push_back(u);
        cyc.push_back(root);
        std::reverse(cyc.begin(), cyc.end());
        out.push_back(cyc);
    }
    return out;
}

// Cycle graph for N-ary resolution: self-edges are unary conflicts and
// mutually present pairs are kept binary loops, neither participates.
inline std::map<std::string, std::vector<std::string>> nary_adjacency(const ProcessModel& m) {
    std::map<std::string, std::vector<std::string>> adj;
    for (const auto& [e, s] : m.edges) {
        if (e.first == e.second) continue;
        if (m.edges.count({e.second, e.first})) continue;
        adj[e.first].push_back(e.second);
    }
    return adj;
}

}  // namespace detail

// Cycles are resolved shortest-first, one at a time, re-enumerating after each
// deletion. Every resolution removes at least one edge, so this terminates.
// Cycles longer than max_cycle_len are reported unresolved and left in place.
inline ProcessModel resolve_nary(ProcessModel m, const MiningConfig& cfg, ConflictReport& rep) {
    while (true) {
        auto cycles = detail::bounded_cycles(detail::nary_adjacency(m), cfg.max_cycle_len);
        if (cycles.empty()) break;
        const std::vector<std::string> cyc = cycles.front();
        const std::size_t n = cyc.size();

        std::vector<Edge> cyc_edges(n);
        for (std::size_t i = 0; i < n; ++i) cyc_edges[i] = {cyc[i], cyc[(i + 1) % n]};

        std::vector<double> chain_rel(n);
        for (std::size_t i = 0; i < n; ++i) chain_rel[i] = nary_relative_importance(m, cyc, i);
        double best = *std::max_element(chain_rel.begin(), chain_rel.end());
        std::size_t worst = 0;
        for (std::size_t i = 1; i < n; ++i)
            if (chain_rel[i] < chain_rel[worst]) worst = i;
        double worst_offset = best - chain_rel[worst];

        if (worst_offset > cfg.nary_similarity_eps) {
            // exception: drop the weakest edge of the most offset chain
            Edge victim = cyc_edges[worst];
            double victim_rel = relative_importance(m, victim.first, victim.second);
            double victim_sig = edge_sig(m, victim.first, victim.second);
            for (std::size_t k = 1; k + 1 < n; ++k) {
                const Edge& e = cyc_edges[(worst + k) % n];
                double r = relative_importance(m, e.first, e.second);
                double s = edge_sig(m, e.first, e.second);
                if (std::tie(r, s, e) < std::tie(victim_rel, victim_sig, victim)) {
                    victim = e;
                    victim_rel = r;
                    victim_sig = s;
                }
            }
            m.edges.erase(victim);
            rep.nary_cycles.push_back({cyc, "exception", {victim}});
        } else {
            // concurrency: only edges tied for the strongest flow survive; a
            // fully balanced cycle has no survivor
            std::vector<double> er(n);
            double emax = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                er[i] = relative_importance(m, cyc_edges[i].first, cyc_edges[i].second);
                emax = std::max(emax, er[i]);
            }
            std::vector<Edge> removed;
            for (std::size_t i = 0; i < n; ++i)
                if (er[i] < emax - 1e-12) removed.push_back(cyc_edges[i]);
            if (removed.empty()) removed = cyc_edges;
            std::sort(removed.begin(), removed.end());
            for (const auto& e : removed) m.edges.erase(e);
            rep.nary_cycles.push_back({cyc, "concurrency", removed});
        }
    }
    for (const auto& cyc : detail::representative_cycles(detail::nary_adjacency(m)))
        rep.nary_cycles.push_back({cyc, "unresolved", {}});
    return m;
}

inline ProcessModel resolve_unary(ProcessModel m, ConflictReport& rep) {
    std::vector<Edge> selfs;
    for (const auto& [e, s] : m.edges)
        if (e.first == e.second) selfs.push_back(e);
    std::set<std::string> taken(m.nodes.begin(), m.nodes.end());
    for (const auto& [v, orig] : m.virtual_nodes) taken.insert(v);
    for (const auto& e : selfs) {
        double s = m.edges.at(e);
        std::string v = e.first + "1";
        while (taken.count(v)) v += "1";
        taken.insert(v);
        m.virtual_nodes[v] = e.first;
        m.edges.erase(e);
        m.edges[{e.first, v}] = s;
        rep.unary_resolved.push_back(e.first);
    }
    return m;
}

// Utility of an edge is its sig normalized by the strongest same-direction
// edge at each endpoint; surviving at either endpoint suffices. Each node's
// strongest in and out edges have utility 1 and are always kept.
inline ProcessModel filter_edges(ProcessModel m, const MiningConfig& cfg) {
    std::map<std::string, double> max_out, max_in;
    for (const auto& [e, s] : m.edges) {
        max_out[e.first] = std::max(max_out[e.first], s);
        max_in[e.second] = std::max(max_in[e.second], s);
    }
    auto utility = [](double s, double mx) { return mx > 0.0 ? s / mx : 1.0; };
    std::map<Edge, double> kept;
    for (const auto& [e, s] : m.edges)
        if (utility(s, max_out[e.first]) >= cfg.edge_cutoff ||
            utility(s, max_in[e.second]) >= cfg.edge_cutoff)
            kept[e] = s;
    m.edges = std::move(kept);
    return m;
}

namespace detail {

inline std::string dot_quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    out += '"';
    return out;
}

inline std::string sig_label(double v) {
    if (v == std::floor(v) && std::abs(v) < 1e15) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.0f", v);
        return buf;
    }
    std::ostringstream os;
    os << v;
    return os.str();
}

}  // namespace detail

// Virtual nodes render as self-loops on their original activity.
inline void export_dot(std::ostream& out, const ProcessModel& m) {
    out << "digraph model {\n";
    for (const auto& n : m.nodes) out << "  " << detail::dot_quote(n) << ";\n";
    for (const auto& [e, s] : m.edges) {
        auto vit = m.virtual_nodes.find(e.second);
        const std::string& head = vit == m.virtual_nodes.end() ? e.second : vit->second;
        out << "  " << detail::dot_quote(e.first) << " -> " << detail::dot_quote(head)
            << " [label=" << detail::dot_quote(detail::sig_label(s)) << "];\n";
    }
    out << "}\n";
}

inline std::string export_dot(const ProcessModel& m) {
    std::ostringstream os;
    export_dot(os, m);
    return os.str();
}

// Total order consistent with every edge, lexicographic tie-break. Kept
// binary loops collapse to their dominant direction first (lexicographic on
// equal rel) so they do not block the order.
inline std::vector<std::string> topological_order(const ProcessModel& m) {
    std::set<std::string> nodes(m.nodes.begin(), m.nodes.end());
    for (const auto& [v, orig] : m.virtual_nodes) nodes.insert(v);
    std::map<std::string, std::set<std::string>> adj;
    for (const auto& [e, s] : m.edges) {
        nodes.insert(e.first);
        nodes.insert(e.second);
        if (e.first != e.second && m.edges.count({e.second, e.first})) {
            double fwd = relative_importance(m, e.first, e.second);
            double rev = relative_importance(m, e.second, e.first);
            bool keep = fwd > rev || (fwd == rev && e.first < e.second);
            if (!keep) continue;
        }
        adj[e.first].insert(e.second);
    }
    std::map<std::string, int> indeg;
    for (const auto& u : nodes) indeg[u] = 0;
    for (const auto& [u, heads] : adj)
        for (const auto& v : heads) ++indeg[v];
    std::set<std::string> ready;
    for (const auto& [u, d] : indeg)
        if (d == 0) ready.insert(u);
    std::vector<std::string> order;
    while (!ready.empty()) {
        std::string u = *ready.begin();
        ready.erase(ready.begin());
        order.push_back(u);
        auto it = adj.find(u);
        if (it == adj.end()) continue;
        for (const auto& v : it->second)
            if (--indeg[v] == 0) ready.insert(v);
    }
    if (order.size() != nodes.size()) {
        std::set<std::string> left;
        for (const auto& [u, d] : indeg)
            if (d > 0) left.insert(u);
        // every leftover node keeps at least one leftover predecessor, so a
        // backward walk must revisit a node, closing a cycle
        std::map<std::string, std::string> pred;
        for (const auto& [u, heads] : adj) {
            if (!left.count(u)) continue;
            for (const auto& v : heads)
                if (left.count(v) && !pred.count(v)) pred[v] = u;
        }
        std::vector<std::string> walk = {*left.begin()};
        std::set<std::string> on_walk = {walk[0]};
        while (true) {
            const std::string p = pred.at(walk.back());
            if (on_walk.count(p)) {
                std::vector<std::string> cyc = {p};
                for (auto it = walk.rbegin(); it != walk.rend() && *it != p; ++it)
                    cyc.push_back(*it);
                std::string text;
                for (const auto& u : cyc) text += u + " -> ";
                text += p;
                throw DataError("cycle remains after conflict resolution: " + text);
            }
            walk.push_back(p);
            on_walk.insert(p);
        }
    }
    return order;
}

struct MiningResult {
    ProcessModel model;
    ConflictReport report;
};

inline MiningResult mine(const EventLog& log, const MiningConfig& cfg = {}) {
    validate(cfg);
    MiningResult r;
    r.model = build_initial_model(log);
    r.model = resolve_binary(std::move(r.model), cfg, r.report);
    r.model = resolve_nary(std::move(r.model), cfg, r.report);
    r.model = resolve_unary(std::move(r.model), r.report);
    r.model = filter_edges(std::move(r.model), cfg);
    return r;
}

}  // namespace aclp
