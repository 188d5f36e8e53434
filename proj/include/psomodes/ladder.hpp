#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "psomodes/circuit_graph.hpp"

namespace psomodes {

enum class LadderStyle {
    Pi,        ///< C'h/2 at both ends of every cell
    LSection,  ///< series L'h, then C'h at the far node
};

/// Discretized lossless line from x = 0 (left) to x = length.
///
/// Breakpoints split the line into segments that are discretized independently with
/// max(1, round(segment / delta)) cells, so every breakpoint is a node at its exact position.
struct LadderFragment {
    CircuitGraph graph;
    std::vector<double> positions;   ///< node positions, ascending; front() = 0, back() = length
    std::vector<std::string> nodes;  ///< vertex name of each position ("gnd" for a shorted end)
    double length = 0.0;
    double min_cell = 0.0, max_cell = 0.0;

    int cells() const { return static_cast<int>(positions.size()) - 1; }

    /// Index of the node nearest to x (the lower one on ties).
    std::size_t tap_index(double x) const {
        const double tol = 1e-9 * length;
        if (!(x >= -tol && x <= length + tol)) {
            throw Error(ErrorCode::UnresolvedTap, "position " + std::to_string(x) + " m is outside the line (length " +
                                                      std::to_string(length) + " m)");
        }
        auto it = std::lower_bound(positions.begin(), positions.end(), x);
        if (it == positions.end()) return positions.size() - 1;
        std::size_t i = static_cast<std::size_t>(it - positions.begin());
        if (i > 0 && (x - positions[i - 1]) <= (positions[i] - x)) --i;
        return i;
    }

    const std::string& tap(double x) const { return nodes[tap_index(x)]; }
};

struct LadderSpec {
    double length = 0.0;
    double v = 0.0;
    double z0 = 0.0;
    double delta = 0.0;
    std::vector<double> breakpoints;
    std::string prefix = "tl";
    std::string left;   ///< vertex name of the x = 0 end; "gnd" shorts it; empty: "<prefix>.0"
    std::string right;  ///< vertex name of the x = length end; empty: "<prefix>.<N>"
    LadderStyle style = LadderStyle::Pi;
};

inline LadderFragment lc_ladder(const LadderSpec& spec) {
    if (!(spec.length > 0.0) || !(spec.v > 0.0) || !(spec.z0 > 0.0) || !(spec.delta > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "transmission line parameters must be positive");
    }
    if (std::lround(spec.length / spec.delta) < 1) {
        throw Error(ErrorCode::DegenerateDiscretization,
                    "delta " + std::to_string(spec.delta) + " m leaves no cell on a " + std::to_string(spec.length) +
                        " m line");
    }
    const double tol = 1e-9 * spec.length;
    std::vector<double> cuts{0.0};
    std::vector<double> inner = spec.breakpoints;
    std::sort(inner.begin(), inner.end());
    for (double b : inner) {
        if (b < -tol || b > spec.length + tol) {
            throw Error(ErrorCode::UnresolvedTap, "tap position " + std::to_string(b) + " m is outside the line (length " +
                                                      std::to_string(spec.length) + " m)");
        }
        if (b > tol && b < spec.length - tol && b - cuts.back() > tol) cuts.push_back(b);
    }
    cuts.push_back(spec.length);

    LadderFragment out;
    out.length = spec.length;
    out.positions.push_back(0.0);
    out.min_cell = spec.length;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        const double seg = cuts[k + 1] - cuts[k];
        const long n = std::max(1L, std::lround(seg / spec.delta));
        const double h = seg / static_cast<double>(n);
        out.min_cell = std::min(out.min_cell, h);
        out.max_cell = std::max(out.max_cell, h);
        for (long i = 1; i < n; ++i) out.positions.push_back(cuts[k] + h * static_cast<double>(i));
        out.positions.push_back(cuts[k + 1]);
    }
    const std::size_t last = out.positions.size() - 1;
    for (std::size_t i = 0; i <= last; ++i) {
        std::string name = spec.prefix + "." + std::to_string(i);
        if (i == 0 && !spec.left.empty()) name = spec.left;
        if (i == last && !spec.right.empty()) name = spec.right;
        out.nodes.push_back(name);
        out.graph.add_vertex(name);
    }

    const double lp = spec.z0 / spec.v;          // H/m
    const double cp = 1.0 / (spec.z0 * spec.v);  // F/m
    for (std::size_t i = 0; i < last; ++i) {
        const double h = out.positions[i + 1] - out.positions[i];
        const auto& a = out.nodes[i];
        const auto& b = out.nodes[i + 1];
        out.graph.add(a, b, {1.0 / (lp * h), 0.0, 0.0});
        if (spec.style == LadderStyle::Pi) {
            if (a != "gnd") out.graph.add(a, "gnd", {0.0, 0.0, 0.5 * cp * h});
            if (b != "gnd") out.graph.add(b, "gnd", {0.0, 0.0, 0.5 * cp * h});
        } else if (b != "gnd") {
            out.graph.add(b, "gnd", {0.0, 0.0, cp * h});
        }
    }
    return out;
}

/// Adds every vertex, edge and port of `src` to `dst`, identifying vertices by name.
inline void merge_graph(CircuitGraph& dst, const CircuitGraph& src) {
    std::vector<int> map(static_cast<std::size_t>(src.vertex_count()));
    for (int v = 0; v < src.vertex_count(); ++v) map[v] = v == src.root() ? dst.root() : dst.add_vertex(src.name(v));
    for (const auto& [e, val] : src.edges()) dst.add(map[e.first], map[e.second], val);
    for (const auto& p : src.ports()) dst.add_port(p.label, map[p.from], map[p.to]);
}

} // namespace psomodes
