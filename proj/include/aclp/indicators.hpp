#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "aclp/csv.hpp"
#include "aclp/dataset.hpp"
#include "aclp/error.hpp"
#include "aclp/eventlog.hpp"
#include "aclp/fuzzymine.hpp"

namespace aclp {

// The target column: seconds from the anchor activity pair, or from a
// schedule attribute on the destination event when sched_attr is set.
// Target values are signed and never clamped; early completion is negative.
struct TargetSpec {
    std::string name = "FLIGHTDELAY";
    std::string from_activity;
    std::string to_activity;
    std::string sched_attr;
};

struct IndicatorTable {
    std::vector<std::string> variables;  // edge names sorted, target last
    std::vector<std::string> case_ids;
    std::vector<std::vector<std::optional<double>>> rows;
    std::map<std::string, std::set<std::string>> clamped;  // case -> variables

    bool operator==(const IndicatorTable&) const = default;
};

struct DiscreteTable {
    std::vector<std::string> variables;
    std::vector<int> cards;
    std::vector<std::string> case_ids;
    std::vector<std::vector<int>> rows;
    std::map<std::string, std::vector<double>> bounds;  // upper-inclusive bin edges
    std::size_t dropped = 0;
    std::vector<std::string> warnings;

    bool operator==(const DiscreteTable&) const = default;
};

namespace detail {

// Last source event strictly before the first destination event that has
// one; self-loops therefore anchor on the first repetition.
inline std::optional<std::pair<const Event*, const Event*>> span_in_trace(
    const Trace& trace, const std::string& from, const std::string& to) {
    const Event* last_from = nullptr;
    for (const auto& ev : trace.events) {
        if (ev.activity == to && last_from != nullptr) return std::make_pair(last_from, &ev);
        if (ev.activity == from) last_from = &ev;
    }
    return std::nullopt;
}

}  // namespace detail

// Per-case link durations for every retained edge, plus the target column.
// Edge (A,B) reports start(B) - end(A) on the anchors above; negative values
// clamp to zero and are flagged. At a join (several retained edges into one
// node) every branch present reports the longest branch's value.
inline IndicatorTable compute_indicators(const EventLog& log, const ProcessModel& model,
                                         const TargetSpec& target) {
    if (target.name.empty() || target.from_activity.empty() || target.to_activity.empty())
        throw DataError("target spec needs a name and two anchor activities");

    auto real_activity = [&](const std::string& node) {
        auto it = model.virtual_nodes.find(node);
        return it == model.virtual_nodes.end() ? node : it->second;
    };

    std::vector<std::pair<std::string, Edge>> edge_vars;
    for (const auto& [edge, sig] : model.edges) {
        (void)sig;
        edge_vars.push_back({edge.first + "_" + edge.second, edge});
    }
    std::sort(edge_vars.begin(), edge_vars.end());
    for (const auto& [name, edge] : edge_vars)
        if (name == target.name)
            throw DataError("target name collides with edge variable " + name);

    std::map<std::string, std::vector<std::string>> join_in;  // head -> edge vars
    for (const auto& [name, edge] : edge_vars) join_in[edge.second].push_back(name);

    IndicatorTable table;
    for (const auto& [name, edge] : edge_vars) table.variables.push_back(name);
    table.variables.push_back(target.name);

    for (const auto& trace : log.traces) {
        std::map<std::string, double> values;
        for (const auto& [name, edge] : edge_vars) {
            auto span = detail::span_in_trace(trace, real_activity(edge.first),
                                              real_activity(edge.second));
            if (!span) continue;
            double secs = static_cast<double>(span->second->t_start - span->first->t_end);
            if (secs < 0.0) {
                secs = 0.0;
                table.clamped[trace.case_id].insert(name);
            }
            values[name] = secs;
        }
        for (const auto& [head, vars] : join_in) {
            if (vars.size() < 2) continue;
            double block = 0.0;
            bool any = false;
            for (const auto& v : vars)
                if (values.count(v)) {
                    block = std::max(block, values.at(v));
                    any = true;
                }
            if (!any) continue;
            for (const auto& v : vars)
                if (values.count(v)) values[v] = block;
        }
        std::optional<double> delay;
        if (!target.sched_attr.empty()) {
            for (const auto& ev : trace.events)
                if (ev.activity == target.to_activity) {
                    auto it = ev.extras.find(target.sched_attr);
                    if (it != ev.extras.end()) {
                        delay = static_cast<double>(ev.t_start - parse_timestamp(it->second));
                        break;
                    }
                }
        }
        if (!delay) {
            auto span = detail::span_in_trace(trace, target.from_activity, target.to_activity);
            if (span)
                delay = static_cast<double>(span->second->t_start - span->first->t_end);
        }

        table.case_ids.push_back(trace.case_id);
        std::vector<std::optional<double>> row;
        for (const auto& [name, edge] : edge_vars) {
            (void)edge;
            if (values.count(name))
                row.push_back(values.at(name));
            else
                row.push_back(std::nullopt);
        }
        row.push_back(delay);
        table.rows.push_back(std::move(row));
    }
    return table;
}

// Equal-frequency bins per variable after listwise deletion of incomplete
// rows. Bin edges never split ties, so runs of equal values stay together
// and the mapping is monotone.
inline DiscreteTable discretize(const IndicatorTable& table, int bins) {
    if (bins < 2) throw DataError("discretize needs at least 2 bins");
    DiscreteTable out;
    out.variables = table.variables;

    std::vector<std::size_t> kept;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        bool complete = true;
        for (const auto& cell : table.rows[r]) complete = complete && cell.has_value();
        if (complete)
            kept.push_back(r);
        else
            ++out.dropped;
    }
    if (kept.empty()) throw DataError("no complete rows to discretize");

    for (std::size_t c = 0; c < table.variables.size(); ++c) {
        std::vector<double> vals;
        for (std::size_t r : kept) vals.push_back(*table.rows[r][c]);
        std::sort(vals.begin(), vals.end());
        std::vector<std::pair<double, std::size_t>> distinct;
        for (double v : vals) {
            if (distinct.empty() || distinct.back().first < v)
                distinct.push_back({v, 1});
            else
                ++distinct.back().second;
        }
        std::vector<double> edges;
        std::size_t remaining = vals.size();
        int open_bins = bins;
        std::size_t acc = 0;
        for (std::size_t d = 0; d + 1 < distinct.size(); ++d) {
            acc += distinct[d].second;
            if (open_bins > 1 &&
                static_cast<double>(acc) * open_bins >= static_cast<double>(remaining)) {
                edges.push_back(distinct[d].first);
                remaining -= acc;
                acc = 0;
                --open_bins;
            }
        }
        int card = static_cast<int>(edges.size()) + 1;
        if (card < bins)
            out.warnings.push_back(table.variables[c] + ": only " + std::to_string(card) +
                                   " of " + std::to_string(bins) + " bins used");
        out.cards.push_back(card);
        out.bounds[table.variables[c]] = edges;
    }

    for (std::size_t r : kept) {
        out.case_ids.push_back(table.case_ids[r]);
        std::vector<int> row;
        for (std::size_t c = 0; c < table.variables.size(); ++c) {
            const auto& edges = out.bounds[table.variables[c]];
            double v = *table.rows[r][c];
            int bin = static_cast<int>(edges.size());
            for (std::size_t e = 0; e < edges.size(); ++e)
                if (v <= edges[e]) {
                    bin = static_cast<int>(e);
                    break;
                }
            row.push_back(bin);
        }
        out.rows.push_back(std::move(row));
    }
    return out;
}

inline DataSet to_dataset(const DiscreteTable& table) {
    DataSet d;
    d.names = table.variables;
    d.cards = table.cards;
    d.rows = table.rows;
    validate(d);
    return d;
}

inline void write_indicator_csv(std::ostream& out, const IndicatorTable& table) {
    std::vector<std::string> header{"case"};
    for (const auto& v : table.variables) header.push_back(v);
    csv_write_record(out, header);
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        std::vector<std::string> rec{table.case_ids[r]};
        for (const auto& cell : table.rows[r]) {
            if (cell) {
                char buf[32];
                std::snprintf(buf, sizeof(buf), "%.9g", *cell);
                rec.push_back(buf);
            } else {
                rec.push_back("");
            }
        }
        csv_write_record(out, rec);
    }
}

inline void write_discrete_csv(std::ostream& out, const DiscreteTable& table) {
    std::vector<std::string> header{"case"};
    for (const auto& v : table.variables) header.push_back(v);
    csv_write_record(out, header);
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        std::vector<std::string> rec{table.case_ids[r]};
        for (int v : table.rows[r]) rec.push_back(std::to_string(v));
        csv_write_record(out, rec);
    }
}

}  // namespace aclp
