#pragma once

#include <algorithm>
#include <deque>
#include <map>
#include <numeric>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "psomodes/pso_model.hpp"

namespace psomodes {

/// Element values on an unordered vertex pair. Zero means no element of that kind.
struct EdgeValues {
    double k = 0.0;  ///< inverse inductance, 1/H
    double g = 0.0;  ///< conductance, S
    double c = 0.0;  ///< capacitance, F

    bool empty() const noexcept { return k == 0.0 && g == 0.0 && c == 0.0; }
};

/// Current-drive port between two vertices. The P column is m(from, to) = l(from) - l(to).
struct Port {
    std::string label;
    int from = 0;
    int to = 0;
};

struct SemiInfiniteLine {
    int a = 0;
    int b = 0;
    double z0 = 0.0;
    std::string port;
};

/// Lumped circuit on a complete graph: vertex 0 is the root (ground) and every unordered
/// pair of vertices carries k, g, c values, stored sparsely.
class CircuitGraph {
public:
    explicit CircuitGraph(std::string root = "gnd") { add_vertex(std::move(root)); }

    /// Index of the named vertex, creating it if needed. Creation order fixes coordinate order.
    int add_vertex(const std::string& name) {
        auto it = index_.find(name);
        if (it != index_.end()) return it->second;
        const int id = static_cast<int>(names_.size());
        names_.push_back(name);
        index_.emplace(name, id);
        return id;
    }

    bool has_vertex(const std::string& name) const { return index_.count(name) != 0; }

    int index_of(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end()) throw Error(ErrorCode::InvalidArgument, "unknown vertex '" + name + "'");
        return it->second;
    }

    const std::string& name(int v) const { return names_.at(static_cast<std::size_t>(v)); }
    const std::vector<std::string>& vertices() const noexcept { return names_; }
    int vertex_count() const noexcept { return static_cast<int>(names_.size()); }
    int root() const noexcept { return 0; }

    /// Adds to the element values between a and b (parallel elements accumulate).
    void add(const std::string& a, const std::string& b, EdgeValues values) {
        const int ia = add_vertex(a);
        const int ib = add_vertex(b);
        add(ia, ib, values);
    }

    void add(int a, int b, EdgeValues values) {
        check_vertex(a);
        check_vertex(b);
        if (values.k < 0.0 || values.g < 0.0 || values.c < 0.0) {
            throw Error(ErrorCode::InvalidArgument,
                        "negative element value between '" + name(a) + "' and '" + name(b) + "'");
        }
        if (values.empty()) return;
        if (a == b) throw Error(ErrorCode::InvalidArgument, "self-loop on vertex '" + name(a) + "'");
        auto& e = edges_[key(a, b)];
        e.k += values.k;
        e.g += values.g;
        e.c += values.c;
    }

    void add_inductor(const std::string& a, const std::string& b, double henry) { add(a, b, {1.0 / henry, 0.0, 0.0}); }
    void add_resistor(const std::string& a, const std::string& b, double ohm) { add(a, b, {0.0, 1.0 / ohm, 0.0}); }
    void add_capacitor(const std::string& a, const std::string& b, double farad) { add(a, b, {0.0, 0.0, farad}); }

    EdgeValues value(int a, int b) const {
        if (a == b) return {};
        auto it = edges_.find(key(a, b));
        return it == edges_.end() ? EdgeValues{} : it->second;
    }

    /// Nonzero edges keyed by (min, max) vertex index.
    const std::map<std::pair<int, int>, EdgeValues>& edges() const noexcept { return edges_; }

    void add_port(const std::string& label, const std::string& from, const std::string& to) {
        const int ia = add_vertex(from);
        const int ib = add_vertex(to);
        add_port(label, ia, ib);
    }

    void add_port(const std::string& label, int from, int to) {
        check_vertex(from);
        check_vertex(to);
        for (const auto& p : ports_) {
            if (p.label == label) throw Error(ErrorCode::DuplicateLabel, "port '" + label + "' already declared");
        }
        ports_.push_back({label, from, to});
    }

    const std::vector<Port>& ports() const noexcept { return ports_; }
    const std::vector<SemiInfiniteLine>& semi_infinite() const noexcept { return lines_; }

    void record_semi_infinite(SemiInfiniteLine line) { lines_.push_back(std::move(line)); }

private:
    static std::pair<int, int> key(int a, int b) { return a < b ? std::pair{a, b} : std::pair{b, a}; }

    void check_vertex(int v) const {
        if (v < 0 || v >= vertex_count()) throw Error(ErrorCode::InvalidArgument, "vertex index out of range");
    }

    std::vector<std::string> names_;
    std::unordered_map<std::string, int> index_;
    std::map<std::pair<int, int>, EdgeValues> edges_;
    std::vector<Port> ports_;
    std::vector<SemiInfiniteLine> lines_;
};

/// Matched semi-infinite line on (a, b): a resistor z0 in parallel plus a drive port.
inline CircuitGraph terminate_semi_infinite(CircuitGraph graph, const std::string& a, const std::string& b,
                                            double z0, std::string port_label = {}) {
    if (!(z0 > 0.0)) {
        throw Error(ErrorCode::NonPositiveImpedance, "semi-infinite line impedance must be positive, got " +
                                                         std::to_string(z0));
    }
    if (!graph.has_vertex(a) || !graph.has_vertex(b)) {
        throw Error(ErrorCode::InvalidArgument, "semi-infinite line endpoint not in graph");
    }
    if (port_label.empty()) port_label = "line" + std::to_string(graph.semi_infinite().size());
    const int ia = graph.index_of(a), ib = graph.index_of(b);
    graph.add(ia, ib, {0.0, 1.0 / z0, 0.0});
    graph.add_port(port_label, ia, ib);
    graph.record_semi_infinite({ia, ib, z0, port_label});
    return graph;
}

enum class TreeKind {
    Bfs,       ///< breadth-first from the root over nonzero edges, neighbours in declaration order
    Dfs,       ///< depth-first, same ordering
    Star,      ///< every vertex hangs off the root (plain node fluxes)
    Explicit,  ///< parents given by name
};

struct TreePolicy {
    TreeKind kind = TreeKind::Bfs;
    std::map<std::string, std::string> parents;  ///< used by Explicit: child -> parent
    bool check_connected = true;  ///< Star/Explicit trees exist on disconnected graphs too
};

/// Rooted spanning tree with coordinates Phi_i = flux across tree edge e_i = (v_i, parent(v_i)),
/// where v_i is the i-th non-root vertex in declaration order.
struct TreeMaps {
    std::vector<int> parent;         ///< parent[root] = -1
    std::vector<int> coordinate;     ///< vertex -> coordinate index, -1 for the root
    std::vector<Eigen::VectorXi> l;  ///< l(v): indicator of tree edges on the path v -> root

    Eigen::Index size() const { return static_cast<Eigen::Index>(parent.size()) - 1; }

    Eigen::VectorXi m(int v, int w) const { return l[v] - l[w]; }
};

namespace detail {

/// Components of the graph over nonzero edges and ports; the root's component first.
inline std::vector<std::vector<int>> components(const CircuitGraph& graph) {
    const int nv = graph.vertex_count();
    std::vector<int> up(static_cast<std::size_t>(nv));
    std::iota(up.begin(), up.end(), 0);
    auto find = [&](int x) {
        while (up[x] != x) x = up[x] = up[up[x]];
        return x;
    };
    auto join = [&](int a, int b) { up[find(a)] = find(b); };
    for (const auto& [e, v] : graph.edges()) join(e.first, e.second);
    for (const auto& p : graph.ports()) join(p.from, p.to);
    std::map<int, std::vector<int>> groups;
    for (int v = 0; v < nv; ++v) groups[find(v)].push_back(v);
    std::vector<std::vector<int>> out;
    out.push_back(groups[find(graph.root())]);
    for (auto& [rep, members] : groups) {
        if (rep != find(graph.root())) out.push_back(std::move(members));
    }
    return out;
}

inline std::vector<std::vector<int>> adjacency(const CircuitGraph& graph) {
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(graph.vertex_count()));
    for (const auto& [e, v] : graph.edges()) {
        adj[e.first].push_back(e.second);
        adj[e.second].push_back(e.first);
    }
    for (const auto& p : graph.ports()) {
        if (p.from == p.to) continue;
        adj[p.from].push_back(p.to);
        adj[p.to].push_back(p.from);
    }
    for (auto& a : adj) {
        std::sort(a.begin(), a.end());
        a.erase(std::unique(a.begin(), a.end()), a.end());
    }
    return adj;
}

} // namespace detail

inline TreeMaps build_tree_maps(const CircuitGraph& graph, const TreePolicy& policy = {}) {
    const int nv = graph.vertex_count();
    const auto comps = policy.check_connected || policy.kind == TreeKind::Bfs || policy.kind == TreeKind::Dfs
                           ? detail::components(graph)
                           : std::vector<std::vector<int>>{};
    if (comps.size() > 1) {
        std::string msg = "circuit has " + std::to_string(comps.size()) + " components:";
        for (const auto& comp : comps) {
            msg += " {";
            for (std::size_t i = 0; i < comp.size(); ++i) msg += (i ? ", " : "") + graph.name(comp[i]);
            msg += "}";
        }
        throw Error(ErrorCode::DisconnectedGraph, msg);
    }

    TreeMaps maps;
    maps.parent.assign(static_cast<std::size_t>(nv), -2);
    maps.parent[0] = -1;
    switch (policy.kind) {
    case TreeKind::Star:
        for (int v = 1; v < nv; ++v) maps.parent[v] = 0;
        break;
    case TreeKind::Bfs: {
        const auto adj = detail::adjacency(graph);
        std::deque<int> queue{0};
        while (!queue.empty()) {
            const int v = queue.front();
            queue.pop_front();
            for (int w : adj[v]) {
                if (maps.parent[w] != -2) continue;
                maps.parent[w] = v;
                queue.push_back(w);
            }
        }
        break;
    }
    case TreeKind::Dfs: {
        const auto adj = detail::adjacency(graph);
        std::vector<int> stack{0};
        std::vector<bool> done(static_cast<std::size_t>(nv), false);
        while (!stack.empty()) {
            const int v = stack.back();
            stack.pop_back();
            if (done[v]) continue;
            done[v] = true;
            for (auto it = adj[v].rbegin(); it != adj[v].rend(); ++it) {
                if (!done[*it]) {
                    maps.parent[*it] = v;
                    stack.push_back(*it);
                }
            }
        }
        break;
    }
    case TreeKind::Explicit:
        for (int v = 1; v < nv; ++v) {
            auto it = policy.parents.find(graph.name(v));
            if (it == policy.parents.end()) {
                throw Error(ErrorCode::InvalidArgument, "no tree parent given for vertex '" + graph.name(v) + "'");
            }
            maps.parent[v] = graph.index_of(it->second);
        }
        break;
    }

    maps.coordinate.assign(static_cast<std::size_t>(nv), -1);
    for (int v = 1; v < nv; ++v) maps.coordinate[v] = v - 1;
    const Eigen::Index n = nv - 1;
    maps.l.assign(static_cast<std::size_t>(nv), Eigen::VectorXi::Zero(n));
    for (int v = 1; v < nv; ++v) {
        int u = v;
        int steps = 0;
        while (u != 0) {
            if (u < 0 || ++steps > nv) {
                throw Error(ErrorCode::InvalidArgument, "tree parents of '" + graph.name(v) + "' do not reach the root");
            }
            maps.l[v](maps.coordinate[u]) += 1;
            u = maps.parent[u];
        }
    }
    return maps;
}

/// K = sum over unordered edges of k(e) m(e) m(e)^T, likewise G and C; P columns are m(port).
inline PsoModel assemble_pso(const CircuitGraph& graph, const TreeMaps& maps) {
    const Eigen::Index n = maps.size();
    Matrix K = Matrix::Zero(n, n), G = Matrix::Zero(n, n), C = Matrix::Zero(n, n);
    std::vector<std::pair<Eigen::Index, int>> nz;
    for (const auto& [e, val] : graph.edges()) {
        const Eigen::VectorXi m = maps.m(e.first, e.second);
        nz.clear();
        for (Eigen::Index i = 0; i < n; ++i) {
            if (m(i) != 0) nz.emplace_back(i, m(i));
        }
        for (const auto& [i, mi] : nz) {
            for (const auto& [j, mj] : nz) {
                const double w = static_cast<double>(mi * mj);
                K(i, j) += val.k * w;
                G(i, j) += val.g * w;
                C(i, j) += val.c * w;
            }
        }
    }
    Matrix P(n, static_cast<Eigen::Index>(graph.ports().size()));
    std::vector<std::string> port_labels;
    for (std::size_t j = 0; j < graph.ports().size(); ++j) {
        const auto& p = graph.ports()[j];
        P.col(static_cast<Eigen::Index>(j)) = maps.m(p.from, p.to).cast<double>();
        port_labels.push_back(p.label);
    }
    std::vector<std::string> coord_labels;
    for (int v = 1; v < graph.vertex_count(); ++v) coord_labels.push_back(graph.name(v));
    return PsoModel(std::move(K), std::move(G), std::move(C), std::move(P), std::move(coord_labels),
                    std::move(port_labels));
}

inline PsoModel assemble_pso(const CircuitGraph& graph, const TreePolicy& policy = {}) {
    return assemble_pso(graph, build_tree_maps(graph, policy));
}

/// Node-level (|V| x |V|) matrices and the tree map T with rows l(v)^T. The reduced matrices
/// are T^T Khat T; every row of Khat, Ghat, Chat sums to zero (Kirchhoff current balance).
struct NodeAssembly {
    Matrix Khat, Ghat, Chat;
    Matrix T;
    double max_row_sum = 0.0;  ///< largest |row sum| relative to the largest entry
};

inline NodeAssembly assemble_node_matrices(const CircuitGraph& graph, const TreeMaps& maps) {
    const int nv = graph.vertex_count();
    NodeAssembly out;
    out.Khat = out.Ghat = out.Chat = Matrix::Zero(nv, nv);
    for (const auto& [e, val] : graph.edges()) {
        const auto [a, b] = e;
        auto stamp = [&](Matrix& m, double x) {
            m(a, a) += x;
            m(b, b) += x;
            m(a, b) -= x;
            m(b, a) -= x;
        };
        stamp(out.Khat, val.k);
        stamp(out.Ghat, val.g);
        stamp(out.Chat, val.c);
    }
    out.T = Matrix::Zero(nv, maps.size());
    for (int v = 0; v < nv; ++v) out.T.row(v) = maps.l[v].cast<double>().transpose();
    for (const Matrix* m : {&out.Khat, &out.Ghat, &out.Chat}) {
        const double scale = m->cwiseAbs().maxCoeff();
        if (scale == 0.0) continue;
        out.max_row_sum = std::max(out.max_row_sum, m->rowwise().sum().cwiseAbs().maxCoeff() / scale);
    }
    return out;
}

} // namespace psomodes
