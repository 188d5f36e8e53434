#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_map>
#include <vector>

#include "psomodes/build.hpp"
#include "psomodes/eigenmodes.hpp"
#include "psomodes/microwave.hpp"

namespace psomodes {

// ---------------------------------------------------------------------------------------------
// Regional support

/// Norm-squared weight of one mode in each region, renormalized over the covered coordinates.
struct RegionalSupport {
    std::vector<double> weights;  ///< sums to 1 unless the mode has no weight on any region
    double covered = 0.0;         ///< raw weight on covered coordinates (the mode has unit norm)
    int dominant = -1;            ///< region with the largest weight
    double distance = std::numeric_limits<double>::quiet_NaN();  ///< to the dominant region's basis vector
    std::array<double, 2> xy{};   ///< position in the plane through the standard basis vectors
};

/// Planar coordinates of a weight vector. The k basis vectors map to a regular k-gon with the
/// simplex's edge length sqrt(2), so for k <= 3 (where the simplex is planar) distances are kept.
inline std::array<double, 2> barycentric_xy(const std::vector<double>& w) {
    const std::size_t k = w.size();
    std::array<double, 2> xy{0.0, 0.0};
    if (k < 2) return xy;
    if (k == 2) return {(w[0] - w[1]) / std::numbers::sqrt2, 0.0};
    const double radius = 1.0 / (std::numbers::sqrt2 * std::sin(std::numbers::pi / static_cast<double>(k)));
    for (std::size_t i = 0; i < k; ++i) {
        const double a = std::numbers::pi / 2 + 2 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(k);
        xy[0] += w[i] * radius * std::cos(a);
        xy[1] += w[i] * radius * std::sin(a);
    }
    return xy;
}

inline RegionalSupport regional_support(const CVector& phi, const RegionMap& regions) {
    RegionalSupport out;
    out.weights.assign(regions.size(), 0.0);
    for (std::size_t r = 0; r < regions.size(); ++r) {
        if (regions[r].coords.empty()) {
            throw Error(ErrorCode::EmptyRegion, "region '" + regions[r].name + "' has no coordinates");
        }
        for (auto c : regions[r].coords) {
            if (c < 0 || c >= phi.size()) {
                throw Error(ErrorCode::InvalidArgument, "region '" + regions[r].name + "' indexes past the mode vector");
            }
            out.weights[r] += std::norm(phi(c));
        }
        out.covered += out.weights[r];
    }
    if (!(out.covered > 0.0)) return out;
    for (auto& w : out.weights) w /= out.covered;
    out.dominant = static_cast<int>(std::max_element(out.weights.begin(), out.weights.end()) - out.weights.begin());
    double d2 = 0.0;
    for (std::size_t r = 0; r < out.weights.size(); ++r) {
        const double e = static_cast<int>(r) == out.dominant ? 1.0 : 0.0;
        d2 += (out.weights[r] - e) * (out.weights[r] - e);
    }
    out.distance = std::sqrt(d2);
    out.xy = barycentric_xy(out.weights);
    return out;
}

inline std::vector<RegionalSupport> regional_support(const EigenSolution& solution, const RegionMap& regions) {
    std::vector<RegionalSupport> out;
    out.reserve(solution.size());
    for (const auto& m : solution.modes) out.push_back(regional_support(m.phi, regions));
    return out;
}

// ---------------------------------------------------------------------------------------------
// Mode tracking

/// |<a, b>| / (|a| |b|) over the coordinates both modes share by label.
inline double mode_overlap(const CVector& a, const std::vector<std::string>& la, const CVector& b,
                           const std::vector<std::string>& lb) {
    if (la == lb) {
        const double n = a.norm() * b.norm();
        return n > 0.0 ? std::abs(a.dot(b)) / n : 0.0;
    }
    std::unordered_map<std::string_view, Eigen::Index> where;
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(lb.size()); ++i) where.emplace(lb[static_cast<std::size_t>(i)], i);
    Complex dot = 0.0;
    double na = 0.0, nb = 0.0;
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(la.size()); ++i) {
        auto it = where.find(la[static_cast<std::size_t>(i)]);
        if (it == where.end()) continue;
        dot += std::conj(a(i)) * b(it->second);
        na += std::norm(a(i));
        nb += std::norm(b(it->second));
    }
    return na > 0.0 && nb > 0.0 ? std::abs(dot) / std::sqrt(na * nb) : 0.0;
}

struct TrackingAmbiguity {
    std::size_t step = 0;
    std::string label;
    double best = 0.0, second = 0.0;
};

struct TrackedModes {
    std::vector<std::string> labels;
    std::vector<std::vector<int>> index;       ///< [step][label] mode index; -1 where the step is missing
    std::vector<std::vector<double>> overlap;  ///< [step][label] overlap with the previous match
    std::vector<TrackingAmbiguity> ambiguities;
};

/// Indices of the first `count` oscillating modes.
inline std::vector<int> oscillating_indices(const EigenSolution& sol, std::size_t count) {
    std::vector<int> out;
    for (std::size_t i = 0; i < sol.size() && out.size() < count; ++i) {
        if (sol.modes[i].kind == ModeKind::Oscillating) out.push_back(static_cast<int>(i));
    }
    return out;
}

/// Labels for the given modes by dominant region; repeats get "#2", "#3", ... in mode order.
inline std::vector<std::string> region_labels(const EigenSolution& sol, const std::vector<int>& modes,
                                              const RegionMap& regions) {
    std::vector<std::string> out;
    std::map<std::string, int> seen;
    for (std::size_t k = 0; k < modes.size(); ++k) {
        std::string base = "m" + std::to_string(k);
        if (!regions.empty()) {
            const auto rs = regional_support(sol.modes[static_cast<std::size_t>(modes[k])].phi, regions);
            if (rs.dominant >= 0) base = regions[static_cast<std::size_t>(rs.dominant)].name;
        }
        const int n = ++seen[base];
        out.push_back(n == 1 ? base : base + "#" + std::to_string(n));
    }
    return out;
}

/// Greedy maximum-overlap matching between consecutive solutions (nullptr marks a failed step).
/// The first available step fixes the labels: `labels` if given, else m0, m1, ...
inline TrackedModes track_modes(const std::vector<const EigenSolution*>& steps, std::size_t count,
                                std::vector<std::string> labels = {}, double ambiguity_ratio = 0.9) {
    TrackedModes out;
    out.index.assign(steps.size(), std::vector<int>(count, -1));
    out.overlap.assign(steps.size(), std::vector<double>(count, 0.0));
    const EigenSolution* prev = nullptr;
    std::vector<int> prev_idx;
    for (std::size_t s = 0; s < steps.size(); ++s) {
        const EigenSolution* cur = steps[s];
        if (!cur) continue;
        if (!prev) {
            prev_idx = oscillating_indices(*cur, count);
            if (prev_idx.size() < count) {
                throw Error(ErrorCode::InvalidArgument, "first sweep point has only " + std::to_string(prev_idx.size()) +
                                                            " oscillating modes, " + std::to_string(count) + " requested");
            }
            if (labels.empty()) {
                for (std::size_t k = 0; k < count; ++k) labels.push_back("m" + std::to_string(k));
            }
            out.labels = labels;
            for (std::size_t k = 0; k < count; ++k) {
                out.index[s][k] = prev_idx[k];
                out.overlap[s][k] = 1.0;
            }
            prev = cur;
            continue;
        }
        const auto cand = oscillating_indices(*cur, count + 4);
        std::vector<std::vector<double>> ov(count, std::vector<double>(cand.size()));
        for (std::size_t k = 0; k < count; ++k) {
            const auto& a = prev->modes[static_cast<std::size_t>(prev_idx[k])].phi;
            for (std::size_t j = 0; j < cand.size(); ++j) {
                ov[k][j] = mode_overlap(a, prev->coord_labels, cur->modes[static_cast<std::size_t>(cand[j])].phi,
                                        cur->coord_labels);
            }
            auto sorted = ov[k];
            std::sort(sorted.rbegin(), sorted.rend());
            if (sorted.size() > 1 && sorted[1] >= ambiguity_ratio * sorted[0]) {
                out.ambiguities.push_back({s, out.labels[k], sorted[0], sorted[1]});
            }
        }
        struct Pair {
            double o;
            std::size_t k, j;
        };
        std::vector<Pair> pairs;
        for (std::size_t k = 0; k < count; ++k) {
            for (std::size_t j = 0; j < cand.size(); ++j) pairs.push_back({ov[k][j], k, j});
        }
        std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& x, const Pair& y) { return x.o > y.o; });
        std::vector<bool> used_k(count, false), used_j(cand.size(), false);
        std::vector<int> next(count, -1);
        for (const auto& p : pairs) {
            if (used_k[p.k] || used_j[p.j]) continue;
            used_k[p.k] = used_j[p.j] = true;
            next[p.k] = cand[p.j];
            out.overlap[s][p.k] = p.o;
        }
        if (std::find(next.begin(), next.end(), -1) != next.end()) {
            throw Error(ErrorCode::InvalidArgument, "sweep step " + std::to_string(s) + " has too few oscillating modes");
        }
        out.index[s] = next;
        prev_idx = next;
        prev = cur;
    }
    return out;
}

// ---------------------------------------------------------------------------------------------
// Sweeps

/// 64-bit FNV-1a.
inline std::uint64_t content_hash(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::vector<double> sweep_grid(double from, double to, int points, bool log) {
    if (points < 1) throw Error(ErrorCode::InvalidArgument, "a sweep needs at least one point");
    if (log && !(from > 0.0 && to > 0.0)) throw Error(ErrorCode::InvalidArgument, "log sweeps need positive bounds");
    if (points == 1) return {from};
    std::vector<double> out(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i) {
        const double t = static_cast<double>(i) / (points - 1);
        out[static_cast<std::size_t>(i)] = log ? from * std::pow(to / from, t) : from + (to - from) * t;
    }
    out.back() = to;
    return out;
}

struct SweepSpec {
    std::string path;
    std::vector<double> values;
    std::size_t track = 6;  ///< oscillating modes followed from the first point
    SolveOptions solve{Tolerances{}, EigenMethod::CholeskyReduced, true};
    BuildOptions build{};
    bool admittance_model = true;  ///< add the admittance-model T1 when the netlist allows it
    unsigned threads = 0;          ///< 0: hardware concurrency
};

/// Spec from the netlist's first sweep statement.
inline SweepSpec sweep_spec(const Netlist& net) {
    const auto sweeps = net.all("sweep");
    if (sweeps.empty()) throw Error(ErrorCode::MissingParameter, "netlist declares no sweep");
    const auto& s = *sweeps.front();
    SweepSpec spec;
    spec.path = s.args[0];
    const double points = resolve_value(net, *s.find("points"));
    if (points != std::floor(points) || points < 1) {
        throw Error(ErrorCode::InvalidArgument, "sweep points must be a positive integer", s.loc);
    }
    spec.values = sweep_grid(resolve_value(net, *s.find("from")), resolve_value(net, *s.find("to")),
                             static_cast<int>(points), s.has_flag("log"));
    return spec;
}

struct ModeSummary {
    std::string label;
    int index = -1;
    double frequency_hz = 0.0, decay_rate_hz = 0.0, t1_s = 0.0;
    std::vector<double> support;  ///< per region, renormalized
    int dominant = -1;
    double distance = std::numeric_limits<double>::quiet_NaN();
    double overlap = 0.0;  ///< with the same label at the previous successful point
};

struct SweepPoint {
    double value = 0.0;
    bool ok = false;
    std::string error;
    Eigen::Index size = 0;
    std::vector<ModeSummary> modes;  ///< in label order
    std::optional<AdmittanceT1> admittance;
};

struct SweepResult {
    std::string path;
    std::vector<std::string> labels;
    std::vector<std::string> region_names;
    std::vector<SweepPoint> points;
    std::vector<TrackingAmbiguity> ambiguities;
    std::uint64_t netlist_hash = 0;
    std::optional<double> delta;

    const ModeSummary* mode(std::size_t point, std::string_view label) const {
        for (const auto& m : points[point].modes) {
            if (m.label == label) return &m;
        }
        return nullptr;
    }

    /// Mode at `point` whose support is largest in `region` (character rather than tracked identity).
    const ModeSummary* mode_by_region(std::size_t point, std::string_view region) const {
        const auto it = std::find(region_names.begin(), region_names.end(), region);
        if (it == region_names.end()) return nullptr;
        const auto r = static_cast<std::size_t>(it - region_names.begin());
        const ModeSummary* best = nullptr;
        for (const auto& m : points[point].modes) {
            if (m.support.size() > r && (!best || m.support[r] > best->support[r])) best = &m;
        }
        return best;
    }
};

namespace detail {

struct PointWork {
    std::optional<EigenSolution> solution;  ///< trimmed to the low oscillating modes
    RegionMap regions;
};

inline void run_parallel(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) body(i);
        });
    }
}

} // namespace detail

/// Rebuilds and solves the circuit at every sweep value, then tracks modes across the points.
/// Points that fail keep their error text and are skipped by the tracking.
inline SweepResult run_sweep(const Netlist& net, const SweepSpec& spec) {
    SweepResult out;
    out.path = spec.path;
    out.netlist_hash = content_hash(serialize(net));
    out.delta = spec.build.delta;
    out.points.resize(spec.values.size());
    std::vector<detail::PointWork> work(spec.values.size());
    const bool has_transmon = !net.all("transmon").empty();
    parameter_value(net, spec.path);  // unresolvable paths fail before any work

    detail::run_parallel(spec.values.size(), spec.threads, [&](std::size_t i) {
        auto& pt = out.points[i];
        pt.value = spec.values[i];
        try {
            const auto local = with_parameter(net, spec.path, pt.value);
            const auto built = build_circuit(local, spec.build);
            pt.size = built.model.size();
            auto sol = eigenmodes(built.model, spec.solve);
            EigenSolution trimmed;
            trimmed.coord_labels = std::move(sol.coord_labels);
            for (auto idx : oscillating_indices(sol, spec.track + 4)) {
                trimmed.modes.push_back(std::move(sol.modes[static_cast<std::size_t>(idx)]));
            }
            work[i].solution = std::move(trimmed);
            work[i].regions = built.regions;
            if (spec.admittance_model && has_transmon) {
                try {
                    const auto p = environment_params(local);
                    pt.admittance = admittance_t1(p, p.lj, fit_reactances(p));
                } catch (const Error&) {
                    // No analytic environment for this netlist or point; the overlay is simply absent.
                }
            }
            pt.ok = true;
        } catch (const std::exception& e) {
            pt.error = e.what();
        }
    });

    std::vector<const EigenSolution*> steps;
    std::size_t first = work.size();
    for (std::size_t i = 0; i < work.size(); ++i) {
        steps.push_back(work[i].solution ? &*work[i].solution : nullptr);
        if (work[i].solution && first == work.size()) first = i;
    }
    if (first == work.size()) return out;
    for (const auto& r : work[first].regions) out.region_names.push_back(r.name);
    const std::size_t count = std::min(spec.track, work[first].solution->size());
    std::vector<int> first_modes(count);
    for (std::size_t k = 0; k < count; ++k) first_modes[k] = static_cast<int>(k);
    const auto tracked = track_modes(steps, count, region_labels(*work[first].solution, first_modes, work[first].regions));
    out.labels = tracked.labels;
    out.ambiguities = tracked.ambiguities;

    for (std::size_t i = 0; i < work.size(); ++i) {
        if (!work[i].solution) continue;
        const auto& sol = *work[i].solution;
        for (std::size_t k = 0; k < count; ++k) {
            const int idx = tracked.index[i][k];
            const auto& m = sol.modes[static_cast<std::size_t>(idx)];
            ModeSummary ms;
            ms.label = out.labels[k];
            ms.index = idx;
            ms.frequency_hz = m.frequency_hz();
            ms.decay_rate_hz = m.decay_rate_hz();
            ms.t1_s = m.t1_seconds();
            ms.overlap = tracked.overlap[i][k];
            if (!work[i].regions.empty()) {
                const auto rs = regional_support(m.phi, work[i].regions);
                ms.support = rs.weights;
                ms.dominant = rs.dominant;
                ms.distance = rs.distance;
            }
            out.points[i].modes.push_back(std::move(ms));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------------------------
// Discretization convergence

struct ConvergenceRow {
    double delta = 0.0;
    double value = 0.0;
    std::string label;
    double f_ref = 0.0, f = 0.0, rel_freq = 0.0;
    double t1_ref = 0.0, t1 = 0.0, rel_t1 = 0.0;
};

struct ConvergenceStudy {
    double reference_delta = 0.0;
    std::vector<double> deltas;
    std::vector<SweepResult> sweeps;  ///< one per delta, same order
    std::vector<ConvergenceRow> rows;

    double max_rel_freq(double delta) const {
        double m = 0.0;
        for (const auto& r : rows) {
            if (r.delta == delta) m = std::max(m, r.rel_freq);
        }
        return m;
    }
};

/// Runs the sweep once per delta and compares every non-reference run with the smallest delta,
/// mode by tracked label, point by point.
inline ConvergenceStudy convergence_study(const Netlist& net, const std::vector<double>& deltas, SweepSpec spec) {
    if (deltas.size() < 2) throw Error(ErrorCode::InvalidArgument, "a convergence study needs at least two deltas");
    ConvergenceStudy out;
    out.deltas = deltas;
    const auto ref = static_cast<std::size_t>(std::min_element(deltas.begin(), deltas.end()) - deltas.begin());
    out.reference_delta = deltas[ref];
    for (double d : deltas) {
        spec.build.delta = d;
        out.sweeps.push_back(run_sweep(net, spec));
    }
    const auto& base = out.sweeps[ref];
    for (std::size_t k = 0; k < deltas.size(); ++k) {
        if (k == ref) continue;
        const auto& run = out.sweeps[k];
        for (std::size_t i = 0; i < base.points.size(); ++i) {
            if (!base.points[i].ok || !run.points[i].ok) continue;
            for (const auto& label : base.labels) {
                const auto* a = base.mode(i, label);
                const auto* b = run.mode(i, label);
                if (!a || !b) continue;
                ConvergenceRow row;
                row.delta = deltas[k];
                row.value = base.points[i].value;
                row.label = label;
                row.f_ref = a->frequency_hz;
                row.f = b->frequency_hz;
                row.rel_freq = std::abs(b->frequency_hz - a->frequency_hz) / a->frequency_hz;
                row.t1_ref = a->t1_s;
                row.t1 = b->t1_s;
                row.rel_t1 = a->t1_s == b->t1_s ? 0.0 : std::abs(b->t1_s - a->t1_s) / a->t1_s;
                out.rows.push_back(std::move(row));
            }
        }
    }
    return out;
}

} // namespace psomodes
