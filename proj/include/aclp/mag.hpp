#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "aclp/bayesnet.hpp"
#include "aclp/error.hpp"

namespace aclp {

enum class Mark { tail, arrow };

inline const char* mark_name(Mark m) { return m == Mark::tail ? "tail" : "arrow"; }

// Mixed graph with per-endpoint marks. Keys are ordered pairs (first < second);
// (tail,arrow) reads first→second, (arrow,arrow) first↔second, (tail,tail)
// unoriented.
struct Mag {
    std::vector<std::string> nodes;
    std::map<std::pair<std::string, std::string>, std::pair<Mark, Mark>> edges;

    bool operator==(const Mag&) const = default;
};

namespace detail {

struct MagView {
    std::map<std::string, int> index;
    MarkGraph graph;
    std::vector<std::vector<int>> directed_children;

    explicit MagView(const Mag& mag) {
        for (const auto& n : mag.nodes) {
            if (!index.emplace(n, static_cast<int>(index.size())).second)
                throw DataError("duplicate node " + n);
        }
        graph.resize(mag.nodes.size());
        directed_children.resize(mag.nodes.size());
        for (const auto& [key, marks] : mag.edges) {
            const auto& [a, b] = key;
            if (a >= b) throw DataError("edge key not ordered: " + a + "," + b);
            auto ia = index.find(a), ib = index.find(b);
            if (ia == index.end() || ib == index.end())
                throw DataError("edge endpoint not a node: " + a + "," + b);
            Mk ma = marks.first == Mark::arrow ? Mk::arrow : Mk::tail;
            Mk mb = marks.second == Mark::arrow ? Mk::arrow : Mk::tail;
            graph[ia->second].push_back({ib->second, ma, mb});
            graph[ib->second].push_back({ia->second, mb, ma});
            if (ma == Mk::tail && mb == Mk::arrow)
                directed_children[ia->second].push_back(ib->second);
            if (mb == Mk::tail && ma == Mk::arrow)
                directed_children[ib->second].push_back(ia->second);
        }
    }

    // Proper ancestors per node via directed edges only.
    std::vector<std::set<int>> ancestors() const {
        std::size_t n = graph.size();
        std::vector<std::set<int>> an(n);
        std::vector<int> indeg(n, 0);
        for (std::size_t v = 0; v < n; ++v)
            for (int c : directed_children[v]) ++indeg[c];
        std::vector<int> ready;
        for (std::size_t v = 0; v < n; ++v)
            if (indeg[v] == 0) ready.push_back(static_cast<int>(v));
        std::size_t seen = 0;
        while (!ready.empty()) {
            int v = ready.back();
            ready.pop_back();
            ++seen;
            for (int c : directed_children[v]) {
                an[c].insert(v);
                an[c].insert(an[v].begin(), an[v].end());
                if (--indeg[c] == 0) ready.push_back(c);
            }
        }
        if (seen != n) throw DataError("graph contains a directed cycle");
        return an;
    }
};

}  // namespace detail

// Checks node/edge well-formedness plus the ancestral conditions: no directed
// cycle, and no bidirected edge between a node and one of its ancestors.
inline void validate_mag(const Mag& mag) {
    detail::MagView view(mag);
    auto an = view.ancestors();
    for (const auto& [key, marks] : mag.edges) {
        if (key.first == key.second) throw DataError("self edge on " + key.first);
        if (marks.first == Mark::arrow && marks.second == Mark::arrow) {
            int a = view.index.at(key.first), b = view.index.at(key.second);
            if (an[b].count(a) || an[a].count(b))
                throw DataError("almost-directed cycle through " + key.first + "," + key.second);
        }
    }
}

inline bool m_separated(const Mag& mag, const std::string& x, const std::string& y,
                        const std::set<std::string>& z) {
    detail::MagView view(mag);
    auto itx = view.index.find(x), ity = view.index.find(y);
    if (itx == view.index.end() || ity == view.index.end())
        throw DataError("unknown node in separation query");
    if (itx->second == ity->second) throw DataError("m-separation needs distinct endpoints");
    std::set<int> zi;
    for (const auto& name : z) {
        auto it = view.index.find(name);
        if (it == view.index.end()) throw DataError("unknown node " + name);
        if (it->second == itx->second || it->second == ity->second)
            throw DataError("conditioning set contains an endpoint");
        zi.insert(it->second);
    }
    auto an = view.ancestors();
    std::set<int> anz = zi;
    for (int v : zi) anz.insert(an[v].begin(), an[v].end());
    return !detail::mark_connected(view.graph, itx->second, ity->second, zi, anz);
}

namespace detail {

inline Mag project_with(const BayesNet& net, const std::set<std::string>& latents,
                        bool exhaustive) {
    std::set<int> latent_ids;
    for (const auto& name : latents) latent_ids.insert(net.id(name));
    std::vector<int> observed;
    for (std::size_t v = 0; v < net.size(); ++v)
        if (!latent_ids.count(static_cast<int>(v))) observed.push_back(static_cast<int>(v));
    if (observed.empty()) throw DataError("projection needs at least one observed node");
    if (exhaustive && observed.size() > 16)
        throw CapabilityError("exhaustive projection limited to 16 observed nodes");

    auto g = dag_mark_graph(net);
    auto an = ancestor_sets(net);
    std::set<int> obs_set(observed.begin(), observed.end());

    auto separable = [&](int a, int b) {
        if (!exhaustive) {
            std::set<int> z;
            for (int v : an[a])
                if (obs_set.count(v)) z.insert(v);
            for (int v : an[b])
                if (obs_set.count(v)) z.insert(v);
            z.erase(a);
            z.erase(b);
            std::set<int> anz = z;
            for (int v : z) anz.insert(an[v].begin(), an[v].end());
            return !mark_connected(g, a, b, z, anz);
        }
        std::vector<int> pool;
        for (int v : observed)
            if (v != a && v != b) pool.push_back(v);
        std::size_t subsets = std::size_t{1} << pool.size();
        for (std::size_t bits = 0; bits < subsets; ++bits) {
            std::set<int> z;
            for (std::size_t i = 0; i < pool.size(); ++i)
                if (bits & (std::size_t{1} << i)) z.insert(pool[i]);
            std::set<int> anz = z;
            for (int v : z) anz.insert(an[v].begin(), an[v].end());
            if (!mark_connected(g, a, b, z, anz)) return true;
        }
        return false;
    };

    Mag mag;
    std::vector<std::pair<std::string, int>> named;
    for (int v : observed) named.push_back({net.names[v], v});
    std::sort(named.begin(), named.end());
    for (const auto& [name, v] : named) mag.nodes.push_back(name);
    for (std::size_t i = 0; i < named.size(); ++i)
        for (std::size_t j = i + 1; j < named.size(); ++j) {
            int a = named[i].second, b = named[j].second;
            if (separable(a, b)) continue;
            Mark ma = Mark::arrow, mb = Mark::arrow;
            if (an[b].count(a)) ma = Mark::tail;
            if (an[a].count(b)) mb = Mark::tail;
            mag.edges[{named[i].first, named[j].first}] = {ma, mb};
        }
    validate_mag(mag);
    return mag;
}

}  // namespace detail

// Adjacency decided by the canonical separator (observed ancestors of the
// pair), which separates whenever any observed subset does.
inline Mag latent_project(const BayesNet& net, const std::set<std::string>& latents) {
    return detail::project_with(net, latents, false);
}

// Brute force over every observed conditioning subset.
inline Mag latent_project_exhaustive(const BayesNet& net, const std::set<std::string>& latents) {
    return detail::project_with(net, latents, true);
}

// und holds neighbors whose edge to the target stayed unoriented; structural
// extraction always orients, so it is only populated by learners.
struct MarkovBlanket {
    std::string target;
    std::set<std::string> pa, ch, und, sp, dis, pa_dis, dis_ch, pa_dis_ch;
    std::map<std::pair<std::string, std::string>, std::pair<Mark, Mark>> edges;
    std::vector<std::string> notes;

    bool operator==(const MarkovBlanket&) const = default;

    std::set<std::string> flat() const {
        std::set<std::string> all;
        for (const auto* s : {&pa, &ch, &und, &sp, &dis, &pa_dis, &dis_ch, &pa_dis_ch})
            all.insert(s->begin(), s->end());
        return all;
    }
};

namespace detail {

inline std::set<int> bidirected_reach(const MarkGraph& g, int from) {
    std::set<int> seen;
    std::vector<int> stack{from};
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        for (const auto& e : g[v])
            if (e.at_self == Mk::arrow && e.at_other == Mk::arrow && e.to != from &&
                !seen.count(e.to)) {
                seen.insert(e.to);
                stack.push_back(e.to);
            }
    }
    return seen;
}

}  // namespace detail

inline MarkovBlanket true_mag_mb(const Mag& mag, const std::string& target) {
    detail::MagView view(mag);
    auto it = view.index.find(target);
    if (it == view.index.end()) throw DataError("unknown node " + target);
    int t = it->second;
    std::size_t n = mag.nodes.size();

    std::vector<std::set<int>> adj(n), pa_of(n);
    for (std::size_t v = 0; v < n; ++v) {
        for (const auto& e : view.graph[v]) adj[v].insert(e.to);
        for (int c : view.directed_children[v]) pa_of[c].insert(static_cast<int>(v));
    }

    std::set<int> pa = pa_of[t];
    std::set<int> ch(view.directed_children[t].begin(), view.directed_children[t].end());
    // Spouses are co-parents through a shared directed child; co-parents
    // attached by bidirected edges land in dis_ch instead.
    std::set<int> sp;
    for (int c : ch)
        for (int v : pa_of[c])
            if (v != t && !adj[t].count(v)) sp.insert(v);
    std::set<int> dis = detail::bidirected_reach(view.graph, t);
    std::set<int> pa_dis, dis_ch, pa_dis_ch;
    for (int d : dis) pa_dis.insert(pa_of[d].begin(), pa_of[d].end());
    for (int c : ch) {
        auto dc = detail::bidirected_reach(view.graph, c);
        dis_ch.insert(dc.begin(), dc.end());
    }
    for (int d : dis_ch) pa_dis_ch.insert(pa_of[d].begin(), pa_of[d].end());

    MarkovBlanket mb;
    mb.target = target;
    std::set<int> claimed{t};
    auto take = [&](const std::set<int>& src, std::set<std::string>& dst) {
        for (int v : src)
            if (claimed.insert(v).second) dst.insert(mag.nodes[v]);
    };
    take(dis, mb.dis);
    take(pa, mb.pa);
    take(ch, mb.ch);
    take(sp, mb.sp);
    take(pa_dis, mb.pa_dis);
    take(dis_ch, mb.dis_ch);
    take(pa_dis_ch, mb.pa_dis_ch);
    return mb;
}

}  // namespace aclp
