#pragma once
// Netlists for the three reference circuits (direct feedline, Purcell filter, shared filter). Kept byte-identical
// to circuits/*.net (checked by the test suite).

#include <string>
#include <string_view>

#include "psomodes/error.hpp"

namespace psomodes::canned {

inline constexpr std::string_view fig1a = R"net(# Circuit (a): transmon -> quarter-wave readout resonator -> feedline.
#
# The resonator is shorted at its left end (x = 0) and open at x = lr. The transmon
# couples through Cc at distance xc from the short; the open end couples through Cr to
# a through feedline, modeled as two matched semi-infinite lines meeting at one node.

param lr    = 4.99171mm
param xc    = 800um
param Cr    = 10fF
param Cc    = 7fF
param Cj    = 100fF
param Lj    = 10nH
param nu    = 1.2e8m/s
param Z0    = 50ohm
param delta = 50um

transmon q qj gnd Lj=Lj Cj=Cj

tline res gnd res_open len=lr z0=Z0 v=nu delta=delta
tap res res_c at=xc

branch qj res_c C=Cc
branch res_open feed C=Cr

semi_infinite feed gnd z0=Z0 port=p1
semi_infinite feed gnd z0=Z0 port=p2

region q = qj
region r = res

sweep Lj from=0.5nH to=25nH points=80 log
)net";

inline constexpr std::string_view fig1b = R"net(# Circuit (b): transmon -> quarter-wave readout resonator -> half-wave Purcell filter.
#
# The resonator is shorted at x = 0 and open at x = lr; the transmon couples through Cc
# at xc from the short. The filter is shorted at both ends. The resonator's open end
# couples through Cr to the filter at xr, measured from the filter's left short. Two
# matched semi-infinite lines tap the filter galvanically at xt from each short.

param lr    = 5.03299mm
param lf    = 10.2522mm
param xc    = 800um
param xt    = 880um
param xr    = 5mm
param Cr    = 2.6fF
param Cc    = 7fF
param Cj    = 100fF
param Lj    = 10nH
param nu    = 1.2e8m/s
param Z0    = 50ohm
param delta = 50um

transmon q qj gnd Lj=Lj Cj=Cj

tline res gnd res_open len=lr z0=Z0 v=nu delta=delta
tap res res_c at=xc

tline filt gnd gnd len=lf z0=Z0 v=nu delta=delta short=both
tap filt filt_r at=xr
tap filt filt_in at=xt
tap filt filt_out at=xt from=right

branch qj res_c C=Cc
branch res_open filt_r C=Cr

semi_infinite filt_in gnd z0=Z0 port=p1
semi_infinite filt_out gnd z0=Z0 port=p2

region q = qj
region r = res
region f = filt

sweep Lj from=0.5nH to=25nH points=80 log
)net";

inline constexpr std::string_view fig1c = R"net(# Circuit (c): two quarter-wave resonators sharing one half-wave Purcell filter.
#
# Each resonator is shorted at x = 0 and open at its far end, which couples through Cr
# to the filter. Resonator r0 attaches at xr from the filter's left short and r1 at xr
# from its right short. Matched semi-infinite lines tap the filter at xt from each short.
# The xc taps mark the transmon coupling points of the readout resonators; no transmon is
# attached in this circuit.

param l0    = 5.1mm
param l1    = 5.05mm
param lf    = 10.1mm
param xc    = 800um
param xt    = 1.5mm
param xr    = 4.8mm
param Cr    = 12fF
param nu    = 1.2e8m/s
param Z0    = 50ohm
param delta = 50um

tline res0 gnd r0_open len=l0 z0=Z0 v=nu delta=delta
tap res0 r0_c at=xc
tline res1 gnd r1_open len=l1 z0=Z0 v=nu delta=delta
tap res1 r1_c at=xc

tline filt gnd gnd len=lf z0=Z0 v=nu delta=delta short=both
tap filt filt_r0 at=xr
tap filt filt_r1 at=xr from=right
tap filt filt_in at=xt
tap filt filt_out at=xt from=right

branch r0_open filt_r0 C=Cr
branch r1_open filt_r1 C=Cr

semi_infinite filt_in gnd z0=Z0 port=p1
semi_infinite filt_out gnd z0=Z0 port=p2

region f = filt
region r0 = res0
region r1 = res1

sweep xt from=50um to=3mm points=60
)net";

/// Canned netlist by name ("fig1a", "fig1b", "fig1c").
inline std::string_view netlist(std::string_view name) {
    if (name == "fig1a") return fig1a;
    if (name == "fig1b") return fig1b;
    if (name == "fig1c") return fig1c;
    throw Error(ErrorCode::InvalidArgument, "no canned circuit named '" + std::string(name) + "'");
}

} // namespace psomodes::canned
