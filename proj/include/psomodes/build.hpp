#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "psomodes/circuit_graph.hpp"
#include "psomodes/compose.hpp"
#include "psomodes/ladder.hpp"
#include "psomodes/netlist.hpp"

namespace psomodes {

enum class TransmonMode {
    LC,       ///< parallel Lj || Cj between its terminals
    Port,     ///< transmon removed; its terminals become a port named after it
    NoLj,     ///< Cj only (junction open)
};

struct BuildOptions {
    std::optional<double> delta;  ///< overrides every tline's delta
    TransmonMode transmon = TransmonMode::LC;
    LadderStyle ladder = LadderStyle::Pi;
    TreePolicy tree{};
};

struct Region {
    std::string name;
    std::vector<Eigen::Index> coords;
};
using RegionMap = std::vector<Region>;

struct TransmonInfo {
    std::string name, n1, n2;
    double lj = 0.0, cj = 0.0;
};

struct LineReport {
    std::string prefix;
    int cells = 0;
    double delta = 0.0;     ///< requested
    double min_cell = 0.0;  ///< realized cell lengths
    double max_cell = 0.0;
};

struct TapReport {
    std::string line, name, node;
    double requested = 0.0;  ///< from the line's left end
    double realized = 0.0;
};

struct BuildDiagnostics {
    std::vector<LineReport> lines;
    std::vector<TapReport> taps;
};

struct BuiltCircuit {
    PsoModel model;       ///< semi-infinite lines folded in as matched loads
    PsoModel bare_model;  ///< same coordinates and ports, loads removed
    CircuitGraph graph;   ///< graph of `model`
    RegionMap regions;
    std::vector<TransmonInfo> transmons;
    std::vector<double> port_z0;  ///< line impedance per port column; 0 for plain ports
    BuildDiagnostics diagnostics;

    const Region* region(const std::string& name) const {
        for (const auto& r : regions) {
            if (r.name == name) return &r;
        }
        return nullptr;
    }
};

namespace detail {

struct Piece {
    std::size_t stmt;
    std::string a, b;
    EdgeValues value;
};

struct PortDecl {
    std::size_t stmt;
    std::string label, a, b;
    double z0 = 0.0;  ///< > 0 for semi-infinite lines
};

/// Netlist expanded to element level, before any graph is formed.
struct Expansion {
    std::vector<std::string> vertex_order;
    std::vector<Piece> pieces;
    std::vector<PortDecl> ports;  ///< explicit ports first, then line ports
    std::map<std::string, std::vector<std::string>> line_nodes;
    std::map<std::string, std::string> alias;
    std::vector<TransmonInfo> transmons;
    BuildDiagnostics diagnostics;
};

inline Expansion expand(const Netlist& net, const BuildOptions& options) {
    Expansion ex;
    std::set<std::string> seen;
    auto vertex = [&](const std::string& name) {
        if (name != "gnd" && seen.insert(name).second) ex.vertex_order.push_back(name);
    };
    auto node = [&](const std::string& name) {
        auto it = ex.alias.find(name);
        const std::string& v = it == ex.alias.end() ? name : it->second;
        vertex(v);
        return v;
    };
    auto number = [&](const Statement& s, const char* key) { return resolve_value(net, *s.find(key)); };

    struct TapDecl {
        std::string name;
        double at;
        Location loc;
    };
    std::map<std::string, std::vector<TapDecl>> taps;
    for (const auto& s : net.statements) {
        if (s.kind != "tap") continue;
        const auto* line = net.find("tline", s.args[0]);
        if (!line) throw Error(ErrorCode::UnresolvedTap, "tap refers to unknown tline '" + s.args[0] + "'", s.loc);
        double at = number(s, "at");
        const auto* from = s.find("from");
        if (from && from->text == "right") at = number(*line, "len") - at;
        taps[s.args[0]].push_back({s.args[1], at, s.loc});
    }

    std::vector<PortDecl> line_ports;
    for (std::size_t idx = 0; idx < net.statements.size(); ++idx) {
        const auto& s = net.statements[idx];
        if (s.kind != "tline") continue;
        LadderSpec spec;
        spec.prefix = s.args[0];
        spec.length = number(s, "len");
        spec.z0 = number(s, "z0");
        spec.v = number(s, "v");
        spec.delta = options.delta ? *options.delta : number(s, "delta");
        spec.style = options.ladder;
        const auto* sh = s.find("short");
        const std::string shorted = sh ? sh->text : "none";
        spec.left = (shorted == "left" || shorted == "both") ? "gnd" : s.args[1];
        spec.right = (shorted == "right" || shorted == "both") ? "gnd" : s.args[2];
        for (const auto& t : taps[spec.prefix]) {
            if (t.at < -1e-9 * spec.length || t.at > spec.length * (1 + 1e-9)) {
                throw Error(ErrorCode::UnresolvedTap,
                            "tap '" + t.name + "' at " + std::to_string(t.at) + " m lies beyond tline '" + spec.prefix +
                                "' (length " + std::to_string(spec.length) + " m)",
                            t.loc);
            }
            spec.breakpoints.push_back(t.at);
        }
        LadderFragment frag;
        try {
            frag = lc_ladder(spec);
        } catch (const Error& e) {
            throw Error(e.code(), "tline '" + spec.prefix + "': " + e.detail(), s.loc);
        }
        for (const auto& n : frag.nodes) vertex(n);
        for (const auto& [e, val] : frag.graph.edges()) {
            ex.pieces.push_back({idx, frag.graph.name(e.first), frag.graph.name(e.second), val});
        }
        auto& members = ex.line_nodes[spec.prefix];
        for (const auto& n : frag.nodes) {
            if (n != "gnd") members.push_back(n);
        }
        ex.diagnostics.lines.push_back({spec.prefix, frag.cells(), spec.delta, frag.min_cell, frag.max_cell});
        for (const auto& t : taps[spec.prefix]) {
            const auto i = frag.tap_index(t.at);
            ex.alias[t.name] = frag.nodes[i];
            ex.diagnostics.taps.push_back({spec.prefix, t.name, frag.nodes[i], t.at, frag.positions[i]});
        }
    }

    for (std::size_t idx = 0; idx < net.statements.size(); ++idx) {
        const auto& s = net.statements[idx];
        if (s.kind == "node") {
            node(s.args[0]);
        } else if (s.kind == "branch") {
            EdgeValues val;
            if (s.find("L")) val.k = 1.0 / number(s, "L");
            if (s.find("R")) val.g = 1.0 / number(s, "R");
            if (s.find("C")) val.c = number(s, "C");
            const auto a = node(s.args[0]);
            const auto b = node(s.args[1]);
            ex.pieces.push_back({idx, a, b, val});
        } else if (s.kind == "transmon") {
            const auto a = node(s.args[1]);
            const auto b = node(s.args[2]);
            TransmonInfo info{s.args[0], a, b, number(s, "Lj"), number(s, "Cj")};
            switch (options.transmon) {
            case TransmonMode::LC: ex.pieces.push_back({idx, a, b, {1.0 / info.lj, 0.0, info.cj}}); break;
            case TransmonMode::NoLj: ex.pieces.push_back({idx, a, b, {0.0, 0.0, info.cj}}); break;
            case TransmonMode::Port: ex.ports.push_back({idx, info.name, a, b, 0.0}); break;
            }
            ex.transmons.push_back(std::move(info));
        } else if (s.kind == "port") {
            const auto a = node(s.args[1]);
            const auto b = node(s.args[2]);
            ex.ports.push_back({idx, s.args[0], a, b, 0.0});
        } else if (s.kind == "semi_infinite") {
            const double z0 = number(s, "z0");
            if (!(z0 > 0.0)) throw Error(ErrorCode::NonPositiveImpedance, "semi-infinite line z0 must be positive", s.loc);
            const auto* p = s.find("port");
            const std::string label = p ? p->text : "line" + std::to_string(line_ports.size());
            const auto a = node(s.args[0]);
            const auto b = node(s.args[1]);
            line_ports.push_back({idx, label, a, b, z0});
        }
    }
    ex.ports.insert(ex.ports.end(), line_ports.begin(), line_ports.end());
    return ex;
}

inline RegionMap resolve_regions(const Netlist& net, const Expansion& ex, const CircuitGraph& graph) {
    RegionMap regions;
    std::map<Eigen::Index, std::string> owner;
    for (const auto& s : net.statements) {
        if (s.kind != "region") continue;
        Region r{s.args[0], {}};
        for (std::size_t i = 1; i < s.args.size(); ++i) {
            std::vector<std::string> names;
            if (auto it = ex.line_nodes.find(s.args[i]); it != ex.line_nodes.end()) {
                names = it->second;
            } else {
                auto al = ex.alias.find(s.args[i]);
                const std::string v = al == ex.alias.end() ? s.args[i] : al->second;
                if (!graph.has_vertex(v) || v == "gnd") {
                    throw Error(ErrorCode::UnresolvedParameter,
                                "region '" + r.name + "': '" + s.args[i] + "' is neither a tline nor a node", s.loc);
                }
                names.push_back(v);
            }
            for (const auto& n : names) {
                const Eigen::Index c = graph.index_of(n) - 1;
                if (auto [it, fresh] = owner.emplace(c, r.name); !fresh) {
                    throw Error(ErrorCode::DuplicateName,
                                "node '" + n + "' belongs to regions '" + it->second + "' and '" + r.name + "'", s.loc);
                }
                r.coords.push_back(c);
            }
        }
        std::sort(r.coords.begin(), r.coords.end());
        regions.push_back(std::move(r));
    }
    return regions;
}

} // namespace detail

/// Expands the netlist into one circuit graph (shared node names are the same vertex),
/// folds semi-infinite lines in as matched loads and assembles the model.
/// Coordinates follow vertex creation order; ports are explicit ports, then line ports.
inline BuiltCircuit build_circuit(const Netlist& net, const BuildOptions& options = {}) {
    const auto ex = detail::expand(net, options);
    CircuitGraph base;
    for (const auto& v : ex.vertex_order) base.add_vertex(v);
    for (const auto& p : ex.pieces) base.add(p.a, p.b, p.value);
    CircuitGraph bare = base, loaded = base;
    BuiltCircuit out;
    for (const auto& p : ex.ports) {
        bare.add_port(p.label, p.a, p.b);
        if (p.z0 > 0.0) {
            loaded = terminate_semi_infinite(std::move(loaded), p.a, p.b, p.z0, p.label);
        } else {
            loaded.add_port(p.label, p.a, p.b);
        }
        out.port_z0.push_back(p.z0);
    }
    const auto maps = build_tree_maps(loaded, options.tree);
    out.model = assemble_pso(loaded, maps);
    out.bare_model = assemble_pso(bare, maps);
    out.regions = detail::resolve_regions(net, ex, loaded);
    out.graph = std::move(loaded);
    out.transmons = ex.transmons;
    out.diagnostics = ex.diagnostics;
    return out;
}

/// Same circuit assembled the long way: one model per statement (node fluxes), their union,
/// then constraints equating every node shared between statements.
inline PsoModel build_circuit_by_fragments(const Netlist& net, const BuildOptions& options = {}) {
    const auto ex = detail::expand(net, options);
    std::map<std::size_t, CircuitGraph> fragments;
    std::size_t port_slot = net.statements.size();
    auto local = [](std::size_t f, const std::string& v) { return v == "gnd" ? v : "f" + std::to_string(f) + "/" + v; };
    for (const auto& p : ex.pieces) fragments[p.stmt].add(local(p.stmt, p.a), local(p.stmt, p.b), p.value);
    for (const auto& p : ex.ports) {
        auto& g = fragments[port_slot];
        g.add_vertex(local(port_slot, p.a));
        g.add_vertex(local(port_slot, p.b));
        if (p.z0 > 0.0) g.add(local(port_slot, p.a), local(port_slot, p.b), {0.0, 1.0 / p.z0, 0.0});
        g.add_port(p.label, local(port_slot, p.a), local(port_slot, p.b));
        ++port_slot;
    }

    std::vector<PsoModel> models;
    std::map<std::string, std::vector<Eigen::Index>> occurrences;
    Eigen::Index offset = 0;
    TreePolicy star{TreeKind::Star, {}, false};
    for (auto& [id, g] : fragments) {
        models.push_back(assemble_pso(g, build_tree_maps(g, star)));
        for (int v = 1; v < g.vertex_count(); ++v) {
            const auto& name = g.name(v);
            occurrences[name.substr(name.find('/') + 1)].push_back(offset + v - 1);
        }
        offset += g.vertex_count() - 1;
    }
    const PsoModel joined = unite(models);
    std::vector<std::pair<Eigen::Index, Eigen::Index>> ties;
    for (const auto& [name, idx] : occurrences) {
        for (std::size_t i = 1; i < idx.size(); ++i) ties.emplace_back(idx[i - 1], idx[i]);
    }
    Matrix Y = Matrix::Zero(joined.size(), static_cast<Eigen::Index>(ties.size()));
    for (std::size_t j = 0; j < ties.size(); ++j) {
        Y(ties[j].first, static_cast<Eigen::Index>(j)) = 1.0;
        Y(ties[j].second, static_cast<Eigen::Index>(j)) = -1.0;
    }
    return constrain(joined, {Y}).first;
}

} // namespace psomodes
