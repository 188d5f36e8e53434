// Compares the detuned transmon's lifetime with and without the Purcell filter, then walks the
// junction inductance through the resonator crossing of circuit (a).

#include <cstdio>
#include <exception>

#include "psomodes/analysis.hpp"
#include "psomodes/canned.hpp"

using namespace psomodes;

namespace {

SweepResult at(const char* name, const std::vector<double>& lj) {
    const auto net = parse_netlist(canned::netlist(name));
    auto spec = sweep_spec(net);
    spec.values = lj;
    spec.track = 4;
    return run_sweep(net, spec);
}

void summary(const char* name, const SweepResult& r) {
    std::printf("circuit %s\n", name);
    for (const auto& m : r.points[0].modes) {
        std::printf("  %-5s %9.4f GHz  decay %10.4g Hz  T1 %10.4g s\n", m.label.c_str(), m.frequency_hz / 1e9,
                    m.decay_rate_hz, m.t1_s);
    }
}

} // namespace

int main() {
    try {
        const auto a = at("fig1a", {10e-9});
        const auto b = at("fig1b", {10e-9});
        summary("a", a);
        summary("b", b);
        const double ta = a.mode_by_region(0, "q")->t1_s, tb = b.mode_by_region(0, "q")->t1_s;
        std::printf("transmon T1 gain from the filter: %.1fx\n\n", tb / ta);

        std::printf("%10s %10s %12s %12s\n", "Lj [nH]", "f_q [GHz]", "T1 eig [s]", "T1 adm [s]");
        const auto crossing = at("fig1a", sweep_grid(5e-9, 9e-9, 17, false));
        for (std::size_t i = 0; i < crossing.points.size(); ++i) {
            const auto& p = crossing.points[i];
            const auto* q = crossing.mode_by_region(i, "q");
            if (!p.ok || !q) continue;
            std::printf("%10.3f %10.4f %12.4g %12.4g\n", p.value * 1e9, q->frequency_hz / 1e9, q->t1_s,
                        p.admittance ? p.admittance->t1 : 0.0);
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "purcell_demo: %s\n", e.what());
        return 1;
    }
}
