#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstring>
#include <istream>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "aclp/dataset.hpp"
#include "aclp/error.hpp"
#include "aclp/rng.hpp"

namespace aclp {

// Discrete network. cpt[v] is flattened as [parent-config][value], the
// parent configuration index treating the first declared parent as the most
// significant digit. Immutable after parsing.
struct BayesNet {
    std::vector<std::string> names;
    std::vector<std::vector<std::string>> values;
    std::vector<std::vector<int>> parents;
    std::vector<std::vector<double>> cpt;
    std::map<std::string, int> index;

    bool operator==(const BayesNet&) const = default;

    int id(const std::string& name) const {
        auto it = index.find(name);
        if (it == index.end()) throw DataError("unknown variable: " + name);
        return it->second;
    }

    int cardinality(int v) const { return static_cast<int>(values[v].size()); }

    std::size_t size() const { return names.size(); }
};

inline std::vector<int> topo_order(const BayesNet& net) {
    std::size_t n = net.size();
    std::vector<int> indeg(n, 0);
    std::vector<std::vector<int>> children(n);
    for (std::size_t v = 0; v < n; ++v)
        for (int p : net.parents[v]) {
            children[p].push_back(static_cast<int>(v));
            ++indeg[v];
        }
    std::vector<int> ready, order;
    for (std::size_t v = 0; v < n; ++v)
        if (indeg[v] == 0) ready.push_back(static_cast<int>(v));
    while (!ready.empty()) {
        int v = ready.back();
        ready.pop_back();
        order.push_back(v);
        for (int c : children[v])
            if (--indeg[c] == 0) ready.push_back(c);
    }
    if (order.size() != n) throw DataError("network contains a directed cycle");
    return order;
}

// Proper ancestors (excluding the node itself) for every node.
inline std::vector<std::set<int>> ancestor_sets(const BayesNet& net) {
    std::vector<std::set<int>> an(net.size());
    for (int v : topo_order(net))
        for (int p : net.parents[v]) {
            an[v].insert(p);
            an[v].insert(an[p].begin(), an[p].end());
        }
    return an;
}

namespace detail {

inline std::vector<std::string> bif_tokens(std::istream& in) {
    std::vector<std::string> toks;
    std::string cur;
    char c;
    auto flush = [&] {
        if (!cur.empty()) {
            toks.push_back(cur);
            cur.clear();
        }
    };
    while (in.get(c)) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            flush();
            continue;
        }
        if (c == '/' && in.peek() == '/') {
            flush();
            std::string rest;
            std::getline(in, rest);
            continue;
        }
        if (std::strchr("{}()[]|,;", c) != nullptr) {
            flush();
            toks.push_back(std::string(1, c));
            continue;
        }
        cur += c;
    }
    flush();
    return toks;
}

class BifParser {
  public:
    explicit BifParser(std::vector<std::string> toks) : toks_(std::move(toks)) {}

    BayesNet parse() {
        BayesNet net;
        if (peek() == "network") {
            get();
            get();  // name
            expect("{");
            expect("}");
        }
        std::map<std::string, std::vector<std::pair<std::vector<std::string>,
                                                    std::vector<double>>>> blocks;
        std::map<std::string, std::vector<std::string>> block_parents;
        while (!done()) {
            const std::string& kw = get();
            if (kw == "variable") {
                parse_variable(net);
            } else if (kw == "probability") {
                parse_probability(net, blocks, block_parents);
            } else {
                fail("expected 'variable' or 'probability', got '" + kw + "'");
            }
        }
        assemble(net, blocks, block_parents);
        return net;
    }

  private:
    void parse_variable(BayesNet& net) {
        std::string name = get();
        if (net.index.count(name)) throw DataError("duplicate variable " + name);
        expect("{");
        expect("type");
        expect("discrete");
        expect("[");
        int card = to_int(get());
        expect("]");
        expect("{");
        std::vector<std::string> vals;
        while (peek() != "}") {
            vals.push_back(get());
            if (peek() == ",") get();
        }
        expect("}");
        expect(";");
        expect("}");
        if (card < 1 || static_cast<int>(vals.size()) != card)
            throw DataError("variable " + name + ": listed values do not match cardinality");
        net.index[name] = static_cast<int>(net.names.size());
        net.names.push_back(name);
        net.values.push_back(std::move(vals));
    }

    void parse_probability(
        BayesNet& net,
        std::map<std::string, std::vector<std::pair<std::vector<std::string>,
                                                    std::vector<double>>>>& blocks,
        std::map<std::string, std::vector<std::string>>& block_parents) {
        expect("(");
        std::string name = get();
        if (!net.index.count(name)) throw DataError("probability block for unknown variable " + name);
        if (blocks.count(name)) throw DataError("duplicate probability block for " + name);
        std::vector<std::string> parents;
        if (peek() == "|") {
            get();
            while (peek() != ")") {
                parents.push_back(get());
                if (peek() == ",") get();
            }
        }
        expect(")");
        expect("{");
        std::vector<std::pair<std::vector<std::string>, std::vector<double>>> rows;
        if (parents.empty()) {
            expect("table");
            std::vector<double> probs;
            while (peek() != ";") {
                probs.push_back(to_double(get()));
                if (peek() == ",") get();
            }
            expect(";");
            rows.push_back({{}, std::move(probs)});
        } else {
            while (peek() != "}") {
                expect("(");
                std::vector<std::string> config;
                while (peek() != ")") {
                    config.push_back(get());
                    if (peek() == ",") get();
                }
                expect(")");
                std::vector<double> probs;
                while (peek() != ";") {
                    probs.push_back(to_double(get()));
                    if (peek() == ",") get();
                }
                expect(";");
                rows.push_back({std::move(config), std::move(probs)});
            }
        }
        expect("}");
        blocks[name] = std::move(rows);
        block_parents[name] = std::move(parents);
    }

    void assemble(BayesNet& net,
                  const std::map<std::string, std::vector<std::pair<std::vector<std::string>,
                                                                    std::vector<double>>>>& blocks,
                  const std::map<std::string, std::vector<std::string>>& block_parents) {
        net.parents.resize(net.size());
        net.cpt.resize(net.size());
        for (const auto& name : net.names) {
            if (!blocks.count(name)) throw DataError("no probability block for " + name);
            int v = net.index.at(name);
            const auto& pnames = block_parents.at(name);
            std::vector<int> pids;
            for (const auto& p : pnames) {
                if (!net.index.count(p)) throw DataError(name + ": unknown parent " + p);
                pids.push_back(net.index.at(p));
            }
            net.parents[v] = pids;
            int card = net.cardinality(v);
            std::size_t configs = 1;
            for (int p : pids) configs *= static_cast<std::size_t>(net.cardinality(p));
            std::vector<double> flat(configs * card, -1.0);
            for (const auto& [config, probs] : blocks.at(name)) {
                if (config.size() != pids.size())
                    throw DataError(name + ": row names wrong number of parent values");
                std::size_t idx = 0;
                for (std::size_t i = 0; i < pids.size(); ++i) {
                    const auto& vals = net.values[pids[i]];
                    auto it = std::find(vals.begin(), vals.end(), config[i]);
                    if (it == vals.end())
                        throw DataError(name + ": unknown value " + config[i] + " for parent " +
                                        pnames[i]);
                    idx = idx * vals.size() + static_cast<std::size_t>(it - vals.begin());
                }
                if (static_cast<int>(probs.size()) != card)
                    throw DataError(name + ": row has wrong number of probabilities");
                if (flat[idx * card] >= 0.0) throw DataError(name + ": duplicate CPT row");
                double sum = 0.0;
                for (double p : probs) {
                    if (p < 0.0) throw DataError(name + ": negative probability");
                    sum += p;
                }
                if (std::abs(sum - 1.0) > 1e-9)
                    throw DataError(name + ": CPT row does not sum to 1");
                std::copy(probs.begin(), probs.end(), flat.begin() + idx * card);
            }
            for (double p : flat)
                if (p < 0.0) throw DataError(name + ": missing CPT row");
            net.cpt[v] = std::move(flat);
        }
        topo_order(net);  // throws on cycle
    }

    bool done() const { return pos_ >= toks_.size(); }
    const std::string& peek() const {
        if (done()) fail("unexpected end of input");
        return toks_[pos_];
    }
    const std::string& get() {
        if (done()) fail("unexpected end of input");
        return toks_[pos_++];
    }
    void expect(const std::string& t) {
        if (get() != t) fail("expected '" + t + "' near token " + std::to_string(pos_));
    }
    [[noreturn]] static void fail(const std::string& msg) { throw ParseError("network: " + msg); }
    int to_int(const std::string& t) {
        try {
            return std::stoi(t);
        } catch (const std::exception&) {
            fail("expected integer, got '" + t + "'");
        }
    }
    double to_double(const std::string& t) {
        try {
            return std::stod(t);
        } catch (const std::exception&) {
            fail("expected number, got '" + t + "'");
        }
    }

    std::vector<std::string> toks_;
    std::size_t pos_ = 0;
};

}  // namespace detail

inline BayesNet parse_network(std::istream& in) {
    return detail::BifParser(detail::bif_tokens(in)).parse();
}

inline DataSet forward_sample(const BayesNet& net, std::size_t n, std::uint64_t seed) {
    if (n < 1) throw DataError("sample count must be positive");
    Rng rng(seed);
    DataSet d;
    d.names = net.names;
    for (std::size_t v = 0; v < net.size(); ++v)
        d.cards.push_back(net.cardinality(static_cast<int>(v)));
    auto order = topo_order(net);
    d.rows.assign(n, std::vector<int>(net.size(), 0));
    for (auto& row : d.rows) {
        for (int v : order) {
            std::size_t config = 0;
            for (int p : net.parents[v])
                config = config * static_cast<std::size_t>(net.cardinality(p)) +
                         static_cast<std::size_t>(row[p]);
            int card = net.cardinality(v);
            row[v] = static_cast<int>(
                rng.categorical(net.cpt[v].data() + config * card, card));
        }
    }
    return d;
}

namespace detail {

enum class Mk { tail, arrow };

struct MarkEdge {
    int to;
    Mk at_self;
    Mk at_other;
};

using MarkGraph = std::vector<std::vector<MarkEdge>>;

// Walk-state reachability: a walk may continue through a non-collider not in
// Z and through a collider that is an ancestor of Z (Z itself included).
// States are (node, arrived-with-arrow).
inline bool mark_connected(const MarkGraph& g, int x, int y, const std::set<int>& z,
                           const std::set<int>& anz) {
    std::vector<std::array<bool, 2>> seen(g.size(), {false, false});
    std::vector<std::pair<int, bool>> stack;
    for (const auto& e : g[x]) {
        if (e.to == y) return true;
        bool arr = e.at_other == Mk::arrow;
        if (!seen[e.to][arr]) {
            seen[e.to][arr] = true;
            stack.push_back({e.to, arr});
        }
    }
    while (!stack.empty()) {
        auto [v, in_arrow] = stack.back();
        stack.pop_back();
        for (const auto& e : g[v]) {
            bool collider = in_arrow && e.at_self == Mk::arrow;
            bool open = collider ? anz.count(v) != 0 : z.count(v) == 0;
            if (!open) continue;
            if (e.to == y) return true;
            bool arr = e.at_other == Mk::arrow;
            if (!seen[e.to][arr]) {
                seen[e.to][arr] = true;
                stack.push_back({e.to, arr});
            }
        }
    }
    return false;
}

inline MarkGraph dag_mark_graph(const BayesNet& net) {
    MarkGraph g(net.size());
    for (std::size_t v = 0; v < net.size(); ++v)
        for (int p : net.parents[v]) {
            g[p].push_back({static_cast<int>(v), Mk::tail, Mk::arrow});
            g[static_cast<int>(v)].push_back({p, Mk::arrow, Mk::tail});
        }
    return g;
}

}  // namespace detail

inline bool d_separated(const BayesNet& net, const std::string& x, const std::string& y,
                        const std::set<std::string>& z) {
    int xi = net.id(x), yi = net.id(y);
    if (xi == yi) throw DataError("d-separation needs distinct endpoints");
    std::set<int> zi;
    for (const auto& name : z) {
        int v = net.id(name);
        if (v == xi || v == yi) throw DataError("conditioning set contains an endpoint");
        zi.insert(v);
    }
    auto an = ancestor_sets(net);
    std::set<int> anz = zi;
    for (int v : zi) anz.insert(an[v].begin(), an[v].end());
    return !detail::mark_connected(detail::dag_mark_graph(net), xi, yi, zi, anz);
}

}  // namespace aclp
