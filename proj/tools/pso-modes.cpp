// pso-modes: command-line front end for the PSO circuit models.
//
//   pso-modes <command> <netlist> [options]
//
// Commands write one CSV (or JSON for lagrangian) to --out, or to stdout without --out.
// With --out a manifest <out>.manifest.json records everything needed to rerun the command;
// --seed-manifest reads one back and fills every option not given on the command line.
//
// Exit codes: 0 ok, 2 usage, 3 netlist error, 4 numeric failure. Failures print one JSON
// record {code, message, line, column} on stderr.

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cli_support.hpp"
#include "psomodes/analysis.hpp"
#include "psomodes/build.hpp"
#include "psomodes/canned.hpp"
#include "psomodes/eigenmodes.hpp"
#include "psomodes/lagrangian.hpp"
#include "psomodes/microwave.hpp"
#include "psomodes/netlist.hpp"
#include "psomodes/transfer.hpp"

#ifndef PSOMODES_VERSION
#define PSOMODES_VERSION "0.0.0"
#endif

namespace {

using namespace psomodes;
using nlohmann::json;
using cli::num;
using cli::Table;
using cli::UsageError;

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kFluxQuantum = 6.62607015e-34 / (2.0 * 1.602176634e-19);

/// Every option is held as text so a manifest can store and replay it verbatim.
struct Options {
    std::map<std::string, std::string> values;
    std::map<std::string, std::vector<CLI::Option*>> handles;

    bool given(const std::string& key) const {
        const auto it = handles.find(key);
        if (it == handles.end()) return false;
        return std::any_of(it->second.begin(), it->second.end(), [](const CLI::Option* h) { return h->count() > 0; });
    }

    const std::string& operator[](const std::string& key) const {
        static const std::string empty;
        const auto it = values.find(key);
        return it == values.end() ? empty : it->second;
    }
    bool has(const std::string& key) const { return !(*this)[key].empty(); }

    double quantity(const std::string& key) const { return cli::quantity((*this)[key], key); }

    int integer(const std::string& key) const {
        const double v = quantity(key);
        if (v != std::floor(v) || v < 1 || v > 1e7) throw UsageError("--" + key + " must be a positive integer");
        return static_cast<int>(v);
    }

    bool flag(const std::string& key) const { return (*this)[key] == "true"; }
};

void add_option(CLI::App& app, Options& opts, const std::string& key, const std::string& help,
                const std::string& fallback = "") {
    opts.values.try_emplace(key, fallback);
    opts.handles[key].push_back(app.add_option("--" + key, opts.values[key], help));
}

void add_flag(CLI::App& app, Options& opts, const std::string& key, const std::string& help) {
    opts.values.try_emplace(key, "false");
    opts.handles[key].push_back(app.add_flag_callback("--" + key, [&opts, key] { opts.values[key] = "true"; }, help));
}

void apply_seed(Options& opts, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open manifest '" + path + "'");
    json seed;
    try {
        seed = json::parse(in);
    } catch (const json::exception& e) {
        throw UsageError("manifest '" + path + "' is not JSON: " + e.what());
    }
    if (!seed.contains("parameters") || !seed["parameters"].is_object()) {
        throw UsageError("manifest '" + path + "' has no parameters object");
    }
    for (auto& [key, value] : opts.values) {
        if (key == "seed-manifest" || opts.given(key)) continue;
        const auto it = seed["parameters"].find(key);
        if (it != seed["parameters"].end() && it->is_string()) value = it->get<std::string>();
    }
}

struct Input {
    std::string path, text;
    Netlist net;
};

/// File path, or a canned circuit name when no such file exists.
Input load_netlist(const std::string& path) {
    Input in;
    in.path = path;
    std::ifstream file(path, std::ios::binary);
    if (file) {
        std::ostringstream buf;
        buf << file.rdbuf();
        in.text = buf.str();
    } else if (path == "fig1a" || path == "fig1b" || path == "fig1c") {
        in.text = std::string(canned::netlist(path));
    } else {
        throw UsageError("cannot open netlist '" + path + "'");
    }
    in.net = parse_netlist(in.text);
    return in;
}

Tolerances tolerances(const Options& o) {
    Tolerances tol;
    if (o.has("tol-psd")) tol.psd_tol = o.quantity("tol-psd");
    if (o.has("tol-sym")) tol.sym_tol = o.quantity("tol-sym");
    return tol;
}

BuildOptions build_options(const Options& o) {
    BuildOptions b;
    if (o.has("delta")) b.delta = o.quantity("delta");
    return b;
}

SolveOptions solve_options(const Options& o, EigenMethod fallback) {
    SolveOptions s;
    s.tol = tolerances(o);
    s.method = fallback;
    if (o["method"] == "qz") s.method = EigenMethod::Qz;
    else if (o["method"] == "cholesky") s.method = EigenMethod::CholeskyReduced;
    else if (o.has("method")) throw UsageError("--method must be qz or cholesky");
    return s;
}

/// Unit suffix of the parameter behind a sweep path; "" when dimensionless.
std::string parameter_unit(const Netlist& net, const std::string& path) {
    auto dim_of = [&](const ParamValue& v) {
        if (v.kind == ParamValue::Kind::Reference) {
            if (const auto* p = net.find("param", v.text)) return p->params[0].second.dim;
        }
        return v.dim;
    };
    if (const auto* p = net.find("param", path)) return base_unit(dim_of(p->params[0].second));
    const auto dot = path.rfind('.');
    if (dot != std::string::npos) {
        for (const auto& s : net.statements) {
            if (s.name() != path.substr(0, dot)) continue;
            if (const auto* v = s.find(path.substr(dot + 1))) return base_unit(dim_of(*v));
        }
    }
    return "";
}

std::string unit_tag(const std::string& unit) {
    std::string out;
    for (char c : unit) out += c == '/' ? '_' : c;
    return out.empty() ? "" : "_" + out;
}

/// Sweep from the netlist's sweep statement, overridden field by field by the options.
SweepSpec sweep_from(const Input& in, const Options& o) {
    SweepSpec spec;
    bool declared = !in.net.all("sweep").empty();
    if (declared) spec = sweep_spec(in.net);
    if (o.has("param") && o["param"] != spec.path) {
        // A different parameter shares nothing with the declared grid.
        declared = false;
        spec.path = o["param"];
        spec.values.clear();
    }
    if (spec.path.empty()) throw UsageError("no sweep in the netlist; give --param, --from, --to, --points");
    if (o.has("from") || o.has("to") || o.has("points") || !declared || o.flag("log")) {
        double from = spec.values.empty() ? 0.0 : spec.values.front();
        double to = spec.values.empty() ? 0.0 : spec.values.back();
        int points = static_cast<int>(spec.values.size());
        if (o.has("from")) from = o.quantity("from");
        if (o.has("to")) to = o.quantity("to");
        if (o.has("points")) points = o.integer("points");
        if (points < 1 || (!declared && !(o.has("from") && o.has("to")))) {
            throw UsageError("--from, --to and --points are required for '" + spec.path + "'");
        }
        bool log = o.flag("log");
        if (!log && declared) log = in.net.all("sweep").front()->has_flag("log");
        spec.values = sweep_grid(from, to, points, log);
    }
    if (o.has("track")) spec.track = static_cast<std::size_t>(o.integer("track"));
    if (o.has("threads")) {
        const double t = o.quantity("threads");
        if (t != std::floor(t) || t < 0 || t > 1024) throw UsageError("--threads must be an integer in [0, 1024]");
        spec.threads = static_cast<unsigned>(t);
    }
    spec.build = build_options(o);
    spec.solve = solve_options(o, EigenMethod::CholeskyReduced);
    // Fail before any point runs if the path is wrong.
    parameter_value(in.net, spec.path);
    return spec;
}

std::vector<std::string> mode_labels(const EigenSolution& sol, const RegionMap& regions) {
    std::vector<int> osc;
    for (std::size_t i = 0; i < sol.size(); ++i) {
        if (sol.modes[i].kind == ModeKind::Oscillating) osc.push_back(static_cast<int>(i));
    }
    const auto named = region_labels(sol, osc, regions);
    std::vector<std::string> out(sol.size());
    for (std::size_t k = 0; k < osc.size(); ++k) out[static_cast<std::size_t>(osc[k])] = named[k];
    int zero = 0, damped = 0;
    for (std::size_t i = 0; i < sol.size(); ++i) {
        if (sol.modes[i].kind == ModeKind::ZeroFrequency) out[i] = "zero" + std::to_string(zero++);
        if (sol.modes[i].kind == ModeKind::Overdamped) out[i] = "overdamped" + std::to_string(damped++);
    }
    return out;
}

struct Result {
    Table table;
    std::optional<json> document;  ///< written instead of the table (lagrangian)
    std::map<std::string, json> sidecars;  ///< extension -> JSON beside the output
    std::string title;
    std::vector<std::string> plot_columns;  ///< x first; empty plots every numeric column
};

Table select_columns(const Table& t, const std::vector<std::string>& names) {
    if (names.empty()) return t;
    std::vector<std::size_t> idx;
    for (const auto& n : names) {
        const auto it = std::find(t.header.begin(), t.header.end(), n);
        if (it != t.header.end()) idx.push_back(static_cast<std::size_t>(it - t.header.begin()));
    }
    Table out;
    for (auto i : idx) out.header.push_back(t.header[i]);
    for (const auto& row : t.rows) {
        std::vector<std::string> cells;
        for (auto i : idx) cells.push_back(row[i]);
        out.rows.push_back(std::move(cells));
    }
    return out;
}

Result cmd_modes(const Input& in, const Options& o) {
    const auto built = build_circuit(in.net, build_options(o));
    const auto sol = eigenmodes(built.model, solve_options(o, EigenMethod::Qz));
    const auto labels = mode_labels(sol, built.regions);
    const auto support = built.regions.empty() ? std::vector<RegionalSupport>{} : regional_support(sol, built.regions);
    Result r;
    r.title = "modes: " + in.path;
    r.table.header = {"mode_label", "kind", "frequency_hz", "decay_rate_hz", "t1_s", "multiplicity"};
    r.plot_columns = {"frequency_hz", "decay_rate_hz"};
    for (const auto& reg : built.regions) r.table.header.push_back("region_" + reg.name);
    if (!built.regions.empty()) r.table.header.push_back("distance");
    const std::size_t limit = o.has("count") ? static_cast<std::size_t>(o.integer("count")) : sol.size();
    for (std::size_t i = 0; i < sol.size() && i < limit; ++i) {
        const auto& m = sol.modes[i];
        std::vector<std::string> row{labels[i], to_string(m.kind), num(m.frequency_hz()), num(m.decay_rate_hz()),
                                     num(m.t1_seconds()), std::to_string(m.multiplicity)};
        if (!support.empty()) {
            for (double w : support[i].weights) row.push_back(num(w));
            row.push_back(num(support[i].distance));
        }
        r.table.rows.push_back(std::move(row));
    }
    return r;
}

Result cmd_transfer(const Input& in, const Options& o) {
    const auto built = build_circuit(in.net, build_options(o));
    std::string kind = o.has("kind") ? o["kind"] : "s";
    if (kind != "s" && kind != "z" && kind != "y") throw UsageError("--kind must be s, z or y");
    std::vector<std::string> ports = cli::split(o["ports"], ',');
    if (ports.empty()) ports = built.model.port_labels();
    if (ports.empty()) throw UsageError("the circuit declares no ports");
    std::vector<double> z0s;
    for (const auto& p : ports) {
        const auto& all = built.model.port_labels();
        const auto it = std::find(all.begin(), all.end(), p);
        if (it == all.end()) throw UsageError("no port named '" + p + "'");
        z0s.push_back(built.port_z0[static_cast<std::size_t>(it - all.begin())]);
    }
    const auto model = select_ports(built.model, ports);

    // S of line ports comes from the loaded model; explicit ports are referenced to --z0.
    bool terminated = kind == "s";
    for (double z : z0s) terminated = terminated && z > 0.0 && z == z0s.front();
    const double z0 = o.has("z0") ? o.quantity("z0") : (z0s.front() > 0.0 ? z0s.front() : 50.0);
    const PsoModel& reference = terminated ? model : select_ports(built.bare_model, ports);

    const double fmin = o.has("fmin") ? o.quantity("fmin") : 1e9;
    const double fmax = o.has("fmax") ? o.quantity("fmax") : 10e9;
    const int points = o.has("points") ? o.integer("points") : 1001;
    if (!(fmin > 0.0) || !(fmax > fmin)) throw UsageError("need 0 < --fmin < --fmax");
    const auto grid = sweep_grid(fmin, fmax, points, o.flag("log"));

    Result r;
    r.title = "transfer |" + kind + "|: " + in.path;
    const std::string sym = kind == "s" ? "S" : kind == "z" ? "Z" : "Y";
    const std::string unit = kind == "s" ? "" : kind == "z" ? "_ohm" : "_S";
    r.table.header = {"frequency_hz"};
    for (const auto& a : ports) {
        for (const auto& b : ports) {
            const std::string base = sym + "_" + a + "_" + b;
            r.table.header.insert(r.table.header.end(), {base + "_re" + unit, base + "_im" + unit, base + "_abs" + unit});
            r.plot_columns.push_back(base + "_abs" + unit);
        }
    }
    r.plot_columns.insert(r.plot_columns.begin(), "frequency_hz");
    const auto m = static_cast<Eigen::Index>(ports.size());
    for (double f : grid) {
        std::vector<std::string> row{num(f)};
        const Complex s(0.0, kTwoPi * f);
        try {
            CMatrix t;
            if (kind == "z") t = impedance(reference, s).matrix;
            else if (kind == "y") t = admittance(reference, s).matrix;
            else t = terminated ? scattering_terminated(reference, s, z0).matrix : scattering(reference, s, z0).matrix;
            for (Eigen::Index i = 0; i < m; ++i) {
                for (Eigen::Index j = 0; j < m; ++j) {
                    row.insert(row.end(), {num(t(i, j).real()), num(t(i, j).imag()), num(std::abs(t(i, j)))});
                }
            }
        } catch (const Error& e) {
            if (e.code() != ErrorCode::SingularAtPoint && e.code() != ErrorCode::PoleAtPoint) throw;
            row.resize(r.table.header.size(), "nan");
        }
        r.table.rows.push_back(std::move(row));
    }
    return r;
}

Result cmd_sweep(const Input& in, const Options& o) {
    const auto spec = sweep_from(in, o);
    const auto res = run_sweep(in.net, spec);
    Result r;
    r.title = "sweep " + spec.path + ": " + in.path;
    r.table.header = {"param_value" + unit_tag(parameter_unit(in.net, spec.path))};
    for (const auto& l : res.labels) {
        r.table.header.insert(r.table.header.end(), {l + "_frequency_hz", l + "_decay_rate_hz", l + "_t1_s",
                                                     l + "_dominant", l + "_distance", l + "_overlap"});
    }
    r.plot_columns.push_back(r.table.header.front());
    for (const auto& l : res.labels) r.plot_columns.push_back(l + "_decay_rate_hz");
    const bool overlay = std::any_of(res.points.begin(), res.points.end(), [](const auto& p) { return p.admittance; });
    if (overlay) r.table.header.insert(r.table.header.end(), {"admittance_t1_s", "admittance_omega_q_rad_s"});
    r.table.header.push_back("error");
    for (std::size_t i = 0; i < res.points.size(); ++i) {
        const auto& p = res.points[i];
        std::vector<std::string> row{num(p.value)};
        for (const auto& l : res.labels) {
            const auto* m = p.ok ? res.mode(i, l) : nullptr;
            if (!m) {
                row.insert(row.end(), 6, "nan");
                continue;
            }
            const std::string dom = m->dominant >= 0 ? res.region_names[static_cast<std::size_t>(m->dominant)] : "";
            row.insert(row.end(), {num(m->frequency_hz), num(m->decay_rate_hz), num(m->t1_s), dom, num(m->distance),
                                   num(m->overlap)});
        }
        if (overlay) {
            row.push_back(p.admittance ? num(p.admittance->t1) : "nan");
            row.push_back(p.admittance ? num(p.admittance->omega_q) : "nan");
        }
        row.push_back(cli::field(p.error));
        r.table.rows.push_back(std::move(row));
    }
    json amb = json::array();
    for (const auto& a : res.ambiguities) {
        amb.push_back({{"step", a.step}, {"label", a.label}, {"best", a.best}, {"second", a.second}});
    }
    r.sidecars[".ambiguities.json"] = amb;
    return r;
}

Result cmd_support(const Input& in, const Options& o) {
    const auto built = build_circuit(in.net, build_options(o));
    if (built.regions.empty()) throw UsageError("the netlist declares no regions");
    const auto sol = eigenmodes(built.model, solve_options(o, EigenMethod::Qz));
    const auto labels = mode_labels(sol, built.regions);
    const auto support = regional_support(sol, built.regions);
    const std::size_t count = o.has("count") ? static_cast<std::size_t>(o.integer("count")) : sol.size();
    Result r;
    r.title = "regional support: " + in.path;
    r.table.header = {"mode_label", "frequency_hz"};
    for (const auto& reg : built.regions) r.table.header.push_back("region_" + reg.name);
    r.table.header.insert(r.table.header.end(), {"covered", "dominant", "distance", "x", "y"});
    std::size_t written = 0;
    for (std::size_t i = 0; i < sol.size() && written < count; ++i) {
        if (sol.modes[i].kind != ModeKind::Oscillating) continue;
        const auto& s = support[i];
        std::vector<std::string> row{labels[i], num(sol.modes[i].frequency_hz())};
        for (double w : s.weights) row.push_back(num(w));
        row.insert(row.end(), {num(s.covered),
                               s.dominant >= 0 ? built.regions[static_cast<std::size_t>(s.dominant)].name : "",
                               num(s.distance), num(s.xy[0]), num(s.xy[1])});
        r.table.rows.push_back(std::move(row));
        ++written;
    }
    return r;
}

Result cmd_convergence(const Input& in, const Options& o) {
    auto spec = sweep_from(in, o);
    std::vector<double> deltas;
    for (const auto& d : cli::split(o.has("deltas") ? o["deltas"] : "40um,50um,60um", ',')) {
        deltas.push_back(cli::quantity(d, "deltas"));
    }
    if (deltas.size() < 2) throw UsageError("--deltas needs at least two values");
    const auto study = convergence_study(in.net, deltas, spec);
    Result r;
    r.title = "convergence: " + in.path;
    r.table.header = {"delta_m", "param_value" + unit_tag(parameter_unit(in.net, spec.path)), "mode_label",
                      "f_ref_hz", "f_hz", "rel_freq", "t1_ref_s", "t1_s", "rel_t1"};
    r.plot_columns = {r.table.header[1], "rel_freq", "rel_t1"};
    for (const auto& row : study.rows) {
        r.table.rows.push_back({num(row.delta), num(row.value), row.label, num(row.f_ref), num(row.f),
                                num(row.rel_freq), num(row.t1_ref), num(row.t1), num(row.rel_t1)});
    }
    json summary = json::object();
    summary["reference_delta_m"] = study.reference_delta;
    for (double d : study.deltas) summary["max_rel_freq"][num(d)] = study.max_rel_freq(d);
    r.sidecars[".summary.json"] = summary;
    return r;
}

Result cmd_admittance(const Input& in, const Options& o) {
    const auto params = environment_params(in.net);
    const double fmin = o.has("fmin") ? o.quantity("fmin") : 0.1e9;
    const double fmax = o.has("fmax") ? o.quantity("fmax") : 12e9;
    const int points = o.has("points") ? o.integer("points") : 1201;
    if (!(fmin > 0.0) || !(fmax > fmin)) throw UsageError("need 0 < --fmin < --fmax");
    const auto grid = sweep_grid(fmin, fmax, points, o.flag("log"));

    std::vector<Complex> y(grid.size());
    std::vector<bool> pole_hit(grid.size(), false);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        try {
            y[i] = environment_admittance(params, kTwoPi * grid[i]);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::PoleAtPoint) throw;
            y[i] = Complex(std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN());
            pole_hit[i] = true;
        }
    }
    std::vector<Complex> finite;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (!pole_hit[i]) finite.push_back(y[i]);
    }
    const auto mask_finite = pole_mask(finite);
    Result r;
    r.title = "environment admittance: " + in.path;
    r.table.header = {"frequency_hz", "re_y_S", "im_y_S", "abs_y_S", "pole"};
    r.plot_columns = {"frequency_hz", "abs_y_S"};
    for (std::size_t i = 0, k = 0; i < grid.size(); ++i) {
        const bool pole = pole_hit[i] || mask_finite[k];
        if (!pole_hit[i]) ++k;
        r.table.rows.push_back({num(grid[i]), num(y[i].real()), num(y[i].imag()), num(std::abs(y[i])), pole ? "1" : "0"});
    }

    const double flo = o.has("fit-lo") ? o.quantity("fit-lo") : 0.1e9;
    const double fhi = o.has("fit-hi") ? o.quantity("fit-hi") : 1e9;
    const int fit_points = o.has("fit-points") ? o.integer("fit-points") : 50;
    const auto fit = fit_reactances(params, flo, fhi, fit_points);
    json side = {{"c_e_F", fit.c_e},       {"l_e_inv_per_H", fit.l_e_inv}, {"f_lo_hz", fit.f_lo},
                 {"f_hi_hz", fit.f_hi},    {"points", fit.points},         {"relative_residual", fit.residual},
                 {"c_c_F", params.cc}};
    try {
        const auto t1 = admittance_t1(params, params.lj, fit);
        side["transmon"] = {{"lj_H", params.lj}, {"omega_q_rad_s", t1.omega_q}, {"t1_s", t1.t1}};
    } catch (const Error& e) {
        side["transmon"] = {{"lj_H", params.lj}, {"error", std::string(to_string(e.code()))}};
    }
    r.sidecars[".fit.json"] = side;
    return r;
}

Result cmd_lagrangian(const Input& in, const Options& o) {
    auto bo = build_options(o);
    bo.transmon = TransmonMode::NoLj;
    const auto built = build_circuit(in.net, bo);
    const auto maps = build_tree_maps(built.graph, bo.tree);
    std::vector<JunctionTerm> junctions;
    const double phi0_red = kFluxQuantum / kTwoPi;
    for (const auto& t : built.transmons) {
        const Eigen::VectorXi m = maps.m(built.graph.index_of(t.n1), built.graph.index_of(t.n2));
        junctions.push_back({std::vector<int>(m.data(), m.data() + m.size()), phi0_red * phi0_red / t.lj, 0.0, t.name});
    }
    Result r;
    r.document = export_lagrangian(built.bare_model, std::move(junctions), tolerances(o).sym_tol).to_json();
    return r;
}

std::string timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw UsageError("cannot write '" + path + "'");
    out << text;
}

void emit(const Result& r, const Input& in, const std::string& command, const Options& o) {
    std::ostringstream body;
    if (r.document) body << r.document->dump(2) << '\n';
    else r.table.write(body);

    const std::string out = o["out"];
    if (out.empty()) {
        std::cout << body.str();
        return;
    }
    write_text(out, body.str());
    for (const auto& [ext, doc] : r.sidecars) write_text(cli::sibling(out, ext), doc.dump(2) + "\n");
    if (o.flag("plot") && !r.document) {
        std::ostringstream svg;
        cli::write_svg(select_columns(r.table, r.plot_columns), r.title, svg);
        write_text(cli::sibling(out, ".svg"), svg.str());
    }
    json params = json::object();
    for (const auto& [k, v] : o.values) {
        if (k != "seed-manifest" && k != "out") params[k] = v;
    }
    std::ostringstream hash;
    hash << std::hex << content_hash(in.text);
    const json manifest = {{"tool", "pso-modes"},
                           {"version", PSOMODES_VERSION},
                           {"command", command},
                           {"netlist", {{"path", in.path}, {"fnv1a64", hash.str()}}},
                           {"parameters", params},
                           {"output", out},
                           {"timestamp", timestamp()}};
    write_text(out + ".manifest.json", manifest.dump(2) + "\n");
}

int fail(int code, const std::string& kind, const std::string& message, Location where = {}) {
    const json rec = {{"code", kind}, {"message", message}, {"line", where.line}, {"column", where.column}};
    std::cerr << rec.dump() << '\n';
    return code;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"PSO circuit models: eigenmodes, transfer functions, sweeps", "pso-modes"};
    app.require_subcommand(1, 1);
    app.fallthrough();
    app.set_version_flag("--version", PSOMODES_VERSION);

    Options opts;
    add_option(app, opts, "out", "output file (stdout when absent)");
    add_flag(app, opts, "plot", "also write an SVG plot beside --out");
    add_option(app, opts, "delta", "override every line's cell length, e.g. 40um");
    add_option(app, opts, "tol-psd", "relative PSD tolerance");
    add_option(app, opts, "tol-sym", "relative symmetry tolerance");
    add_option(app, opts, "seed-manifest", "take unset options from a previous run's manifest");
    add_option(app, opts, "method", "eigensolver: qz or cholesky");

    std::string netlist_path;
    struct Command {
        const char* name;
        const char* help;
        Result (*run)(const Input&, const Options&);
    };
    const std::vector<Command> commands{
        {"modes", "eigenmode summary", cmd_modes},
        {"transfer", "S, Z or Y between ports versus frequency", cmd_transfer},
        {"sweep", "tracked modes versus one parameter", cmd_sweep},
        {"support", "regional support of each mode", cmd_support},
        {"convergence", "sweep repeated at several cell lengths", cmd_convergence},
        {"admittance", "analytic environment admittance and its reactance fit", cmd_admittance},
        {"lagrangian", "lossless model with junction cosines, as JSON", cmd_lagrangian},
    };
    std::map<std::string, CLI::App*> subs;
    for (const auto& c : commands) {
        auto* sub = app.add_subcommand(c.name, c.help);
        sub->add_option("netlist", netlist_path, "netlist file or fig1a|fig1b|fig1c")->required();
        subs[c.name] = sub;
    }
    for (const char* name : {"modes", "support"}) add_option(*subs[name], opts, "count", "number of modes to list");
    auto& tr = *subs["transfer"];
    add_option(tr, opts, "kind", "s, z or y");
    add_option(tr, opts, "ports", "comma-separated port labels (default all)");
    add_option(tr, opts, "z0", "reference impedance for explicit ports");
    for (const char* name : {"transfer", "admittance"}) {
        add_option(*subs[name], opts, "fmin", "lowest frequency");
        add_option(*subs[name], opts, "fmax", "highest frequency");
        add_option(*subs[name], opts, "points", "frequency samples");
        add_flag(*subs[name], opts, "log", "log-spaced frequencies");
    }
    for (const char* name : {"sweep", "convergence"}) {
        auto& s = *subs[name];
        add_option(s, opts, "param", "parameter path, e.g. Lj or res.len");
        add_option(s, opts, "from", "first value");
        add_option(s, opts, "to", "last value");
        add_option(s, opts, "points", "number of values");
        add_flag(s, opts, "log", "log-spaced values");
        add_option(s, opts, "track", "oscillating modes to follow");
        add_option(s, opts, "threads", "worker threads (0: all cores)");
    }
    add_option(*subs["convergence"], opts, "deltas", "comma-separated cell lengths (default 40um,50um,60um)");
    auto& ad = *subs["admittance"];
    add_option(ad, opts, "fit-lo", "fit window low edge (default 0.1GHz)");
    add_option(ad, opts, "fit-hi", "fit window high edge (default 1GHz)");
    add_option(ad, opts, "fit-points", "fit samples (default 50)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail(2, "UsageError", e.what());
    }

    std::string command;
    for (const auto& [name, sub] : subs) {
        if (sub->parsed()) command = name;
    }
    try {
        if (opts.has("seed-manifest")) apply_seed(opts, opts["seed-manifest"]);
        const auto input = load_netlist(netlist_path);
        for (const auto& c : commands) {
            if (command == c.name) emit(c.run(input, opts), input, command, opts);
        }
    } catch (const UsageError& e) {
        return fail(2, "UsageError", e.what());
    } catch (const Error& e) {
        return fail(e.is_parse_error() ? 3 : 4, std::string(to_string(e.code())), e.detail(), e.where());
    } catch (const std::exception& e) {
        return fail(4, "InternalError", e.what());
    }
    return 0;
}
