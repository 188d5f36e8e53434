#pragma once
// Randomized invariant checks. Each check draws `cases` independent instances from a seeded
// generator and records the worst deviation; the unit suites and the acceptance gate share them.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "psomodes/build.hpp"
#include "psomodes/canned.hpp"
#include "psomodes/circuit_graph.hpp"
#include "psomodes/compose.hpp"
#include "psomodes/eigenmodes.hpp"
#include "psomodes/microwave.hpp"
#include "psomodes/transfer.hpp"

namespace props {

using namespace psomodes;

struct Report {
    std::string name;
    int cases = 0;
    int failures = 0;
    double worst = 0.0;  ///< largest deviation seen, in the check's own measure
    double limit = 0.0;  ///< pass bound on that measure
    std::string first_failure;

    bool ok() const { return cases > 0 && failures == 0; }

    void record(double deviation, const std::string& what) {
        ++cases;
        worst = std::max(worst, deviation);
        if (!(deviation <= limit)) {
            if (failures++ == 0) {
                std::ostringstream msg;
                msg << what << ": " << std::scientific << deviation;
                first_failure = msg.str();
            }
        }
    }
};

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Eigenvalue errors are measured against the spectrum scale (see oracle::spectrum_distance).
inline constexpr double kNormwise = 1.0;

/// A random point in the right half plane at circuit scale (rad/s).
inline Complex random_s(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> w(0.5e9, 60e9), sigma(0.01, 0.3);
    const double im = w(rng);
    return {sigma(rng) * im, im};
}

inline Matrix well_conditioned(std::mt19937_64& rng, Eigen::Index n) {
    std::normal_distribution<double> nd;
    for (;;) {
        Matrix U(n, n);
        for (Eigen::Index i = 0; i < n * n; ++i) U(i) = nd(rng);
        Eigen::JacobiSVD<Matrix> svd(U);
        const auto& sv = svd.singularValues();
        if (sv(n - 1) > 0 && sv(0) / sv(n - 1) < 1e3) return U;
    }
}

/// Every assembled K, G, C is exactly symmetric and passes validate().
inline Report assembled_matrices_valid(int cases, std::uint64_t seed = 101) {
    Report r{"assembled K, G, C symmetric PSD", 0, 0, 0.0, 0.0, {}};
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> nv(2, 14);
    for (int i = 0; i < cases; ++i) {
        const auto g = oracle::random_circuit(rng, nv(rng));
        const auto m = assemble_pso(g);
        const double asym = (m.K() - m.K().transpose()).norm() + (m.G() - m.G().transpose()).norm() +
                            (m.C() - m.C().transpose()).norm();
        r.record(asym + (validate(m).ok() ? 0.0 : 1.0), "case " + std::to_string(i));
    }
    return r;
}

/// transform(): lambda multiset and Z(s) preserved to 1e-9 relative.
inline Report transform_invariance(int cases, std::uint64_t seed = 102) {
    Report r{"transform preserves spectrum and Z(s)", 0, 0, 0.0, 1e-9, {}};
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> n(1, 7), np(1, 3);
    for (int i = 0; i < cases; ++i) {
        const auto size = n(rng);
        const auto m = oracle::random_model(rng, size, std::min(np(rng), size));
        const auto t = transform(m, well_conditioned(rng, size));
        // Unit-scale models: sample s where the random pencils live.
        const Complex s(std::uniform_real_distribution<double>(0.05, 0.5)(rng),
                        std::uniform_real_distribution<double>(0.1, 5.0)(rng));
        const double dz = oracle::rel_diff(impedance(m, s).matrix, impedance(t, s).matrix);
        const double dl = oracle::spectrum_distance(oracle::expand_spectrum(eigenmodes(m)),
                                                    oracle::expand_spectrum(eigenmodes(t)), kNormwise);
        r.record(std::max(dz, dl), "case " + std::to_string(i));
    }
    return r;
}

/// unite(): lambda multiset is the union; Z(s) is block diagonal with the parts' Z.
inline Report union_invariance(int cases, std::uint64_t seed = 103) {
    Report r{"union is the disjoint spectrum and block Z(s)", 0, 0, 0.0, 1e-9, {}};
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> n(1, 5);
    for (int i = 0; i < cases; ++i) {
        const auto a = oracle::random_model(rng, n(rng), 1);
        auto b = oracle::random_model(rng, n(rng), 1);
        std::vector<std::string> labels;
        for (Eigen::Index k = 0; k < b.size(); ++k) labels.push_back("b" + std::to_string(k));
        b = PsoModel(b.K(), b.G(), b.C(), b.P(), labels, {"pb"});
        const auto u = unite(a, b);
        auto parts = oracle::expand_spectrum(eigenmodes(a));
        const auto sb = oracle::expand_spectrum(eigenmodes(b));
        parts.insert(parts.end(), sb.begin(), sb.end());
        const double dl = oracle::spectrum_distance(parts, oracle::expand_spectrum(eigenmodes(u)), kNormwise);
        const Complex s(0.2, 1.3);
        CMatrix zref = CMatrix::Zero(2, 2);
        zref(0, 0) = impedance(a, s).matrix(0, 0);
        zref(1, 1) = impedance(b, s).matrix(0, 0);
        const double dz = oracle::rel_diff(zref, impedance(u, s).matrix);
        r.record(std::max(dl, dz), "case " + std::to_string(i));
    }
    return r;
}

/// Node flux model of `g` constrained by Phi_a = Phi_b equals the graph with b merged into a:
/// lambda multiset by eigenmodes, Z(s) by nodal analysis of the merged graph.
inline Report constrain_merge_equivalence(int cases, std::uint64_t seed = 104) {
    Report r{"constrain equals direct node merge", 0, 0, 0.0, 1e-9, {}};
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> nv(4, 10);
    int attempts = 0;
    while (r.cases < cases && attempts++ < 20 * cases) {
        const int count = nv(rng);
        auto g = oracle::random_circuit(rng, count, 1);
        std::uniform_int_distribution<int> pick(1, count - 1);
        const int a = pick(rng), b = pick(rng);
        if (a == b) continue;
        const auto& port = g.ports()[0];
        if ((port.from == a && port.to == b) || (port.from == b && port.to == a)) continue;

        CircuitGraph merged;
        for (int v = 1; v < count; ++v) {
            if (v != b) merged.add_vertex(g.name(v));
        }
        auto to_merged = [&](int v) { return v == b ? g.name(a) : g.name(v); };
        for (const auto& [e, val] : g.edges()) {
            if (to_merged(e.first) != to_merged(e.second)) merged.add(to_merged(e.first), to_merged(e.second), val);
        }
        merged.add_port(port.label, to_merged(port.from), to_merged(port.to));

        const auto maps = build_tree_maps(g, TreePolicy{TreeKind::Star});
        const auto full = assemble_pso(g, maps);
        Matrix Y = Matrix::Zero(full.size(), 1);
        Y(maps.coordinate[a], 0) = 1.0;
        Y(maps.coordinate[b], 0) = -1.0;
        const auto reduced = constrain(full, {Y}).first;
        try {
            const auto direct = assemble_pso(merged);
            const double dl = oracle::spectrum_distance(oracle::expand_spectrum(eigenmodes(direct)),
                                                        oracle::expand_spectrum(eigenmodes(reduced)), kNormwise);
            const Complex s = random_s(rng);
            const double dz = oracle::rel_diff(oracle::nodal_impedance(merged, s), impedance(reduced, s).matrix);
            const double sym = validate(reduced).ok() ? 0.0 : 1.0;
            r.record(std::max({dl, dz, sym}), "case " + std::to_string(r.cases));
        } catch (const Error& e) {
            // Merging can leave a vertex with no capacitance or split the graph; redraw.
            if (e.code() != ErrorCode::SingularMassMatrix && e.code() != ErrorCode::DisconnectedGraph) throw;
        }
    }
    return r;
}

/// admittance(s) * impedance(s) = I to 1e-9.
inline Report impedance_admittance_inverse(int cases, std::uint64_t seed = 105) {
    Report r{"Z(s) Y(s) = I", 0, 0, 0.0, 1e-9, {}};
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> nv(2, 12), np(1, 3);
    int attempts = 0;
    while (r.cases < cases && attempts++ < 4 * cases) {
        const auto g = oracle::random_circuit(rng, nv(rng), np(rng));
        const auto m = assemble_pso(g);
        const Complex s = random_s(rng);
        try {
            const CMatrix z = impedance(m, s).matrix;
            const CMatrix y = admittance(m, s).matrix;
            const auto k = z.rows();
            r.record((z * y - CMatrix::Identity(k, k)).norm(), "case " + std::to_string(r.cases));
        } catch (const Error& e) {
            // Ports that are linearly dependent (e.g. a loop of ports) admit no Y; redraw.
            if (e.code() != ErrorCode::RankDeficientPorts && e.code() != ErrorCode::SingularAtPoint) throw;
        }
    }
    return r;
}

/// Re(lambda) <= passivity_tol * max|lambda| for lossy models; lossless ones are on the axis.
inline Report passivity(int cases, std::uint64_t seed = 106) {
    Report r{"passivity Re(lambda) <= tol", 0, 0, 0.0, Tolerances{}.passivity_tol, {}};
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> nv(2, 14);
    std::bernoulli_distribution lossless(0.3);
    for (int i = 0; i < cases; ++i) {
        const bool pure = lossless(rng);
        PsoModel m = assemble_pso(oracle::random_circuit(rng, nv(rng)));
        if (pure) m = with_conductance(m, Matrix::Zero(m.size(), m.size()));
        const auto sol = eigenmodes(m);
        double scale = 0.0, worst = 0.0, off_axis = 0.0;
        for (const auto& mode : sol.modes) scale = std::max(scale, std::abs(mode.lambda));
        for (const auto& mode : sol.modes) {
            worst = std::max(worst, mode.lambda.real() / scale);
            if (pure) off_axis = std::max(off_axis, std::abs(mode.lambda.real()) / scale);
        }
        r.record(std::max(worst, off_axis), "case " + std::to_string(i));
    }
    return r;
}

/// BFS, DFS and star trees give the same spectrum and Z(s).
inline Report tree_independence(int cases, std::uint64_t seed = 107) {
    Report r{"tree choice independence", 0, 0, 0.0, 1e-9, {}};
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> nv(2, 12);
    for (int i = 0; i < cases; ++i) {
        const auto g = oracle::random_circuit(rng, nv(rng));
        const auto a = assemble_pso(g, TreePolicy{TreeKind::Bfs});
        const auto b = assemble_pso(g, TreePolicy{TreeKind::Dfs});
        const auto c = assemble_pso(g, TreePolicy{TreeKind::Star});
        const auto sa = oracle::expand_spectrum(eigenmodes(a));
        const Complex s = random_s(rng);
        const CMatrix za = impedance(a, s).matrix;
        const double d = std::max({oracle::spectrum_distance(sa, oracle::expand_spectrum(eigenmodes(b)), kNormwise),
                                   oracle::spectrum_distance(sa, oracle::expand_spectrum(eigenmodes(c)), kNormwise),
                                   oracle::rel_diff(za, impedance(b, s).matrix),
                                   oracle::rel_diff(za, impedance(c, s).matrix)});
        r.record(d, "case " + std::to_string(i));
    }
    return r;
}

/// Analytic Y_e against the delta = 5 um ladder seen from the transmon port, at random
/// frequencies below the first environment resonance of each circuit.
inline Report analytic_environment(int cases, std::uint64_t seed = 108) {
    Report r{"analytic vs discretized Y_e", 0, 0, 0.0, 5e-3, {}};
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> f(0.1e9, 5.5e9);
    for (const char* name : {"fig1a", "fig1b"}) {
        const auto net = parse_netlist(canned::netlist(name));
        const auto params = environment_params(net);
        BuildOptions o;
        o.delta = 5e-6;
        o.transmon = TransmonMode::Port;
        const auto model = select_ports(build_circuit(net, o).model, {"q"});
        const int share = (cases + 1) / 2;
        for (int i = 0; i < share && r.cases < cases; ++i) {
            const double w = kTwoPi * f(rng);
            const Complex ya = environment_admittance(params, w);
            const Complex yd = admittance(model, Complex(0.0, w)).matrix(0, 0);
            r.record(std::abs(yd - ya) / std::abs(ya), std::string(name) + " at " + std::to_string(w / kTwoPi) + " Hz");
        }
    }
    return r;
}

inline std::vector<std::function<Report(int)>> all_checks() {
    return {[](int n) { return assembled_matrices_valid(n); },   [](int n) { return transform_invariance(n); },
            [](int n) { return union_invariance(n); },           [](int n) { return constrain_merge_equivalence(n); },
            [](int n) { return impedance_admittance_inverse(n); }, [](int n) { return passivity(n); },
            [](int n) { return tree_independence(n); },          [](int n) { return analytic_environment(n); }};
}

} // namespace props
