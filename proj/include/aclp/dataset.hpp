#pragma once

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "aclp/csv.hpp"
#include "aclp/error.hpp"

namespace aclp {

// Rows of category indices; rows[i][j] lies in [0, cards[j]).
struct DataSet {
    std::vector<std::string> names;
    std::vector<int> cards;
    std::vector<std::vector<int>> rows;

    bool operator==(const DataSet&) const = default;

    std::size_t m() const { return rows.size(); }

    int column(const std::string& name) const {
        auto it = std::find(names.begin(), names.end(), name);
        if (it == names.end()) throw DataError("unknown variable: " + name);
        return static_cast<int>(it - names.begin());
    }
};

inline void validate(const DataSet& d) {
    if (d.names.size() != d.cards.size())
        throw DataError("dataset name/cardinality mismatch");
    for (int c : d.cards)
        if (c < 1) throw DataError("cardinality must be positive");
    for (const auto& row : d.rows) {
        if (row.size() != d.names.size()) throw DataError("ragged dataset row");
        for (std::size_t j = 0; j < row.size(); ++j)
            if (row[j] < 0 || row[j] >= d.cards[j])
                throw DataError("value out of range for " + d.names[j]);
    }
}

inline DataSet hide_latents(const DataSet& data, const std::vector<std::string>& latents) {
    std::vector<int> drop;
    for (const auto& name : latents) drop.push_back(data.column(name));
    DataSet out;
    for (std::size_t j = 0; j < data.names.size(); ++j) {
        if (std::find(drop.begin(), drop.end(), static_cast<int>(j)) != drop.end()) continue;
        out.names.push_back(data.names[j]);
        out.cards.push_back(data.cards[j]);
    }
    for (const auto& row : data.rows) {
        std::vector<int> r;
        r.reserve(out.names.size());
        for (std::size_t j = 0; j < row.size(); ++j)
            if (std::find(drop.begin(), drop.end(), static_cast<int>(j)) == drop.end())
                r.push_back(row[j]);
        out.rows.push_back(std::move(r));
    }
    return out;
}

inline void write_dataset(std::ostream& out, const DataSet& d) {
    csv_write_record(out, d.names);
    std::vector<std::string> cells(d.names.size());
    for (const auto& row : d.rows) {
        for (std::size_t j = 0; j < row.size(); ++j) cells[j] = std::to_string(row[j]);
        csv_write_record(out, cells);
    }
}

// Cardinalities are inferred as one past the largest observed index.
inline DataSet read_dataset(std::istream& in) {
    DataSet d;
    std::vector<std::string> rec;
    if (!csv_read_record(in, rec)) throw ParseError("empty dataset");
    d.names = rec;
    d.cards.assign(d.names.size(), 1);
    std::size_t row_no = 1;
    while (csv_read_record(in, rec)) {
        ++row_no;
        if (rec.size() != d.names.size())
            throw ParseError("row " + std::to_string(row_no) + ": expected " +
                             std::to_string(d.names.size()) + " cells");
        std::vector<int> row(rec.size());
        for (std::size_t j = 0; j < rec.size(); ++j) {
            try {
                std::size_t pos = 0;
                row[j] = std::stoi(rec[j], &pos);
                if (pos != rec[j].size()) throw std::invalid_argument(rec[j]);
            } catch (const std::exception&) {
                throw ParseError("row " + std::to_string(row_no) + ": not an integer: " + rec[j]);
            }
            if (row[j] < 0)
                throw ParseError("row " + std::to_string(row_no) + ": negative category");
            d.cards[j] = std::max(d.cards[j], row[j] + 1);
        }
        d.rows.push_back(std::move(row));
    }
    if (d.rows.empty()) throw ParseError("empty dataset");
    return d;
}

}  // namespace aclp
