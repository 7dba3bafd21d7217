#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "aclp/error.hpp"

namespace aclp {

// Minimal RFC-4180 style CSV. Quoted fields may contain commas, doubled
// quotes, and newlines; everything else is taken verbatim.
inline bool csv_read_record(std::istream& in, std::vector<std::string>& out) {
    out.clear();
    int c = in.get();
    if (c == std::istream::traits_type::eof()) return false;
    std::string field;
    bool quoted = false;
    while (true) {
        if (quoted) {
            if (c == std::istream::traits_type::eof())
                throw ParseError("unterminated quoted CSV field");
            if (c == '"') {
                int d = in.peek();
                if (d == '"') {
                    field.push_back('"');
                    in.get();
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(static_cast<char>(c));
            }
        } else {
            if (c == std::istream::traits_type::eof() || c == '\n') {
                if (!field.empty() && field.back() == '\r') field.pop_back();
                out.push_back(field);
                return true;
            }
            if (c == ',') {
                out.push_back(field);
                field.clear();
            } else if (c == '"' && field.empty()) {
                quoted = true;
            } else {
                field.push_back(static_cast<char>(c));
            }
        }
        c = in.get();
    }
}

inline std::string csv_escape(const std::string& s) {
    bool needs_quotes = s.find_first_of(",\"\n\r") != std::string::npos;
    if (!needs_quotes) return s;
    std::string r = "\"";
    for (char ch : s) {
        if (ch == '"') r += "\"\"";
        else r.push_back(ch);
    }
    r += "\"";
    return r;
}

inline void csv_write_record(std::ostream& out, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out << ',';
        out << csv_escape(fields[i]);
    }
    out << '\n';
}

}  // namespace aclp
