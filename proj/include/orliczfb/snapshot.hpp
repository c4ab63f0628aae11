#pragma once

// Solution snapshots.
//
//   ORLICZFB 1
//   <domain descriptor>
//   eps=<eps> n=<n>
//   <value>            one per node, row-major on rectangles
//
// Numbers use 17 significant digits so a write/read cycle is exact.

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "mesh.hpp"
#include "numerics.hpp"

namespace orliczfb {

inline std::string snapshot_text(const DiscreteField& field) {
    using numerics::format17;
    std::string out = "ORLICZFB 1\n" + field.domain.descriptor() + "\n";
    out += "eps=" + format17(field.eps) + " n=" + format17(field.reg_n) + "\n";
    for (double v : field.values)
        out += format17(v) + "\n";
    return out;
}

inline void write_snapshot(const std::string& path, const DiscreteField& field) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write snapshot '" + path + "'");
    out << snapshot_text(field);
}

/// Boundary data is not stored; the returned field has natural conditions
/// everywhere unless `bc` is supplied.
inline DiscreteField parse_snapshot(const std::string& text, const BoundaryData& bc = {}) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "ORLICZFB 1")
        throw ParseError(1, "expected 'ORLICZFB 1'");
    if (!std::getline(in, line))
        throw ParseError(2, "missing domain descriptor");
    Domain domain = [&] {
        try {
            return Domain::from_descriptor(line);
        } catch (const std::exception& e) {
            throw ParseError(2, e.what());
        }
    }();
    if (!std::getline(in, line))
        throw ParseError(3, "missing eps/n line");
    double eps = 0.0;
    double n = 0.0;
    {
        std::istringstream ls(line);
        std::string a, b;
        ls >> a >> b;
        auto num = [](const std::string& tok, const std::string& key) -> std::optional<double> {
            if (tok.rfind(key, 0) != 0)
                return std::nullopt;
            try {
                std::size_t used = 0;
                const double v = std::stod(tok.substr(key.size()), &used);
                if (used != tok.size() - key.size())
                    return std::nullopt;
                return v;
            } catch (const std::exception&) {
                return std::nullopt;
            }
        };
        const auto e = num(a, "eps=");
        const auto m = num(b, "n=");
        if (!e || !m)
            throw ParseError(3, "expected 'eps=<value> n=<value>'");
        eps = *e;
        n = *m;
    }
    std::vector<double> values;
    values.reserve(domain.node_count());
    std::size_t lineno = 3;
    while (std::getline(in, line)) {
        ++lineno;
        try {
            std::size_t used = 0;
            values.push_back(std::stod(line, &used));
            if (used != line.size())
                throw std::invalid_argument("trailing text");
        } catch (const std::exception&) {
            throw ParseError(lineno, "expected a nodal value");
        }
    }
    if (values.size() != domain.node_count())
        throw ParseError(lineno, "expected " + std::to_string(domain.node_count()) + " values, found " +
                                     std::to_string(values.size()));
    return DiscreteField{std::move(domain), bc, std::move(values), eps, n};
}

inline DiscreteField read_snapshot(const std::string& path, const BoundaryData& bc = {}) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot read snapshot '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_snapshot(ss.str(), bc);
}

} // namespace orliczfb
