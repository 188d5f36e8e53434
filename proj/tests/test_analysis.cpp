#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "psomodes/analysis.hpp"
#include "psomodes/canned.hpp"

using namespace psomodes;

namespace {

RegionMap three_regions() { return {{"a", {0, 1}}, {"b", {2}}, {"c", {3, 4}}}; }

CVector unit(std::initializer_list<Complex> v) {
    CVector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (auto x : v) out(i++) = x;
    return out.normalized();
}

double dist(const std::array<double, 2>& a, const std::array<double, 2>& b) { return std::hypot(a[0] - b[0], a[1] - b[1]); }

double vdist(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

} // namespace

TEST(RegionalSupport, DecoupledBlocksGiveBasisVectors) {
    // Three independent LC blocks: every mode lives in exactly one region.
    const Matrix K = Vector::LinSpaced(3, 1.0, 3.0).asDiagonal();
    const Matrix C = Matrix::Identity(3, 3);
    const PsoModel m(K, Matrix::Zero(3, 3), C, Matrix::Zero(3, 0));
    const auto sol = eigenmodes(m);
    const RegionMap regions{{"x", {0}}, {"y", {1}}, {"z", {2}}};
    for (const auto& rs : regional_support(sol, regions)) {
        EXPECT_NEAR(rs.distance, 0.0, 1e-12);
        EXPECT_NEAR(rs.weights[static_cast<std::size_t>(rs.dominant)], 1.0, 1e-12);
    }
}

TEST(RegionalSupport, EvenSplitIsOneOverRootTwoFromBasis) {
    const auto rs = regional_support(unit({1, 0, 1, 0, 0}), three_regions());
    EXPECT_NEAR(rs.weights[0], 0.5, 1e-15);
    EXPECT_NEAR(rs.weights[1], 0.5, 1e-15);
    EXPECT_NEAR(rs.weights[2], 0.0, 1e-15);
    EXPECT_NEAR(rs.distance, 1.0 / std::numbers::sqrt2, 1e-15);
}

TEST(RegionalSupport, RenormalizesOverCoveredCoordinates) {
    const RegionMap partial{{"a", {0}}, {"b", {1}}};
    const auto rs = regional_support(unit({1, 1, 2}), partial);
    EXPECT_NEAR(rs.covered, 2.0 / 6.0, 1e-15);
    EXPECT_NEAR(rs.weights[0] + rs.weights[1], 1.0, 1e-15);
}

TEST(RegionalSupport, EmptyRegionRejected) {
    const RegionMap bad{{"a", {0}}, {"void", {}}};
    try {
        regional_support(unit({1, 1}), bad);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::EmptyRegion);
    }
}

TEST(RegionalSupport, PropertyEntriesAndPlanarIsometry) {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n;
    const auto regions = three_regions();
    std::vector<RegionalSupport> all;
    for (int t = 0; t < 200; ++t) {
        CVector v(5);
        for (int i = 0; i < 5; ++i) v(i) = Complex(n(rng), n(rng));
        const auto rs = regional_support(v.normalized(), regions);
        double sum = 0;
        for (double w : rs.weights) {
            EXPECT_GE(w, 0.0);
            sum += w;
        }
        EXPECT_NEAR(sum, 1.0, 1e-12);
        all.push_back(rs);
    }
    // With three regions the plane through the basis vectors is mapped isometrically.
    for (std::size_t i = 0; i + 1 < all.size(); ++i) {
        EXPECT_NEAR(dist(all[i].xy, all[i + 1].xy), vdist(all[i].weights, all[i + 1].weights), 1e-12);
    }
    EXPECT_NEAR(dist(barycentric_xy({1, 0, 0}), barycentric_xy({0, 1, 0})), std::numbers::sqrt2, 1e-12);
}

TEST(Tracking, IdenticalStepsMatchIdentically) {
    std::mt19937_64 rng(2);
    const Matrix A = Matrix::Random(6, 6);
    const PsoModel m(A * A.transpose() + Matrix::Identity(6, 6), Matrix::Zero(6, 6), Matrix::Identity(6, 6),
                     Matrix::Zero(6, 0));
    const auto sol = eigenmodes(m);
    const auto tr = track_modes({&sol, &sol, &sol}, 6);
    for (const auto& step : tr.index) {
        for (int k = 0; k < 6; ++k) EXPECT_EQ(step[static_cast<std::size_t>(k)], k);
    }
    EXPECT_TRUE(tr.ambiguities.empty());
}

TEST(Tracking, FailedStepsAreSkipped) {
    const PsoModel m(Vector::LinSpaced(2, 1.0, 4.0).asDiagonal(), Matrix::Zero(2, 2), Matrix::Identity(2, 2),
                     Matrix::Zero(2, 0));
    const auto sol = eigenmodes(m);
    const auto tr = track_modes({nullptr, &sol, nullptr, &sol}, 2, {"lo", "hi"});
    EXPECT_EQ(tr.labels, (std::vector<std::string>{"lo", "hi"}));
    EXPECT_EQ(tr.index[0][0], -1);
    EXPECT_EQ(tr.index[3][1], 1);
}

TEST(Tracking, IsolatedOscillatorKeepsLabel) {
    const auto net = parse_netlist("param L = 10nH\nbranch a gnd L=L C=100fF\nbranch a b C=5fF\nbranch b gnd L=3nH C=80fF\n"
                                   "region x = a\nregion y = b\n");
    SweepSpec spec;
    spec.path = "L";
    spec.values = sweep_grid(5e-9, 20e-9, 15, true);
    spec.track = 2;
    const auto r = run_sweep(net, spec);
    EXPECT_EQ(r.labels, (std::vector<std::string>{"x", "y"}));
    for (std::size_t i = 0; i < r.points.size(); ++i) {
        ASSERT_TRUE(r.points[i].ok);
        EXPECT_EQ(r.points[i].modes[0].dominant, 0);
        EXPECT_EQ(r.points[i].modes[1].dominant, 1);
    }
}

TEST(Tracking, DenseAvoidedCrossingKeepsHighOverlap) {
    const auto net = parse_netlist(canned::fig1a);
    SweepSpec spec;
    spec.path = "Lj";
    spec.values = sweep_grid(6.4e-9, 7.4e-9, 200, false);
    spec.track = 2;
    const auto r = run_sweep(net, spec);
    ASSERT_EQ(r.labels.size(), 2u);
    for (std::size_t i = 1; i < r.points.size(); ++i) {
        for (const auto& m : r.points[i].modes) EXPECT_GT(m.overlap, 0.7) << "step " << i << " " << m.label;
    }
    // Labels follow the branches, so the mode that starts transmon-like ends resonator-like.
    const auto& first = r.points.front().modes;
    const auto& last = r.points.back().modes;
    for (std::size_t k = 0; k < 2; ++k) EXPECT_NE(first[k].dominant, last[k].dominant);
}

TEST(Sweep, GridsAndSpec) {
    const auto lin = sweep_grid(1.0, 2.0, 5, false);
    EXPECT_EQ(lin, (std::vector<double>{1.0, 1.25, 1.5, 1.75, 2.0}));
    const auto lg = sweep_grid(1e-9, 1e-7, 3, true);
    EXPECT_NEAR(lg[1], 1e-8, 1e-22);
    const auto spec = sweep_spec(parse_netlist(canned::fig1a));
    EXPECT_EQ(spec.path, "Lj");
    ASSERT_EQ(spec.values.size(), 80u);
    EXPECT_DOUBLE_EQ(spec.values.front(), 0.5e-9);
    EXPECT_DOUBLE_EQ(spec.values.back(), 25e-9);
    EXPECT_THROW(sweep_spec(parse_netlist("branch a gnd C=1fF\n")), Error);
}

TEST(Sweep, FailedPointsAreRecorded) {
    const auto net = parse_netlist("param d = 100um\ntline t gnd o len=1mm z0=50ohm v=1e8 delta=d\nbranch o gnd C=10fF\n");
    SweepSpec spec;
    spec.path = "d";
    spec.values = {100e-6, 5e-3, 200e-6};
    spec.track = 1;
    const auto r = run_sweep(net, spec);
    EXPECT_TRUE(r.points[0].ok);
    EXPECT_FALSE(r.points[1].ok);
    EXPECT_NE(r.points[1].error.find("DegenerateDiscretization"), std::string::npos);
    EXPECT_TRUE(r.points[2].ok);
    EXPECT_TRUE(r.points[1].modes.empty());
    EXPECT_EQ(r.points[2].modes.size(), 1u);
}

TEST(Sweep, UnknownPathFailsUpFront) {
    SweepSpec spec;
    spec.path = "nope";
    spec.values = {1.0};
    EXPECT_THROW(run_sweep(parse_netlist("branch a gnd C=1fF L=1nH\n"), spec), Error);
}

TEST(Sweep, ThreadCountDoesNotChangeResults) {
    const auto net = parse_netlist(canned::fig1a);
    SweepSpec spec = sweep_spec(net);
    spec.values.resize(6);
    spec.track = 3;
    spec.threads = 1;
    const auto a = run_sweep(net, spec);
    spec.threads = 3;
    const auto b = run_sweep(net, spec);
    for (std::size_t i = 0; i < a.points.size(); ++i) {
        for (std::size_t k = 0; k < 3; ++k) {
            EXPECT_EQ(a.points[i].modes[k].frequency_hz, b.points[i].modes[k].frequency_hz);
            EXPECT_EQ(a.points[i].modes[k].t1_s, b.points[i].modes[k].t1_s);
        }
    }
    EXPECT_EQ(a.netlist_hash, b.netlist_hash);
}

TEST(Sweep, AdmittanceOverlayPresentForTransmonCircuits) {
    const auto net = parse_netlist(canned::fig1a);
    SweepSpec spec;
    spec.path = "Lj";
    spec.values = {10e-9};
    spec.track = 2;
    const auto r = run_sweep(net, spec);
    ASSERT_TRUE(r.points[0].admittance.has_value());
    const auto* q = r.mode_by_region(0, "q");
    ASSERT_NE(q, nullptr);
    EXPECT_NEAR(r.points[0].admittance->t1 / q->t1_s, 1.0, 0.1);
}

TEST(Convergence, RepeatedDeltaGivesZeroDifferences) {
    const auto net = parse_netlist(canned::fig1a);
    SweepSpec spec = sweep_spec(net);
    spec.values = {3e-9, 10e-9};
    spec.track = 2;
    const auto study = convergence_study(net, {50e-6, 50e-6}, spec);
    ASSERT_FALSE(study.rows.empty());
    for (const auto& row : study.rows) {
        EXPECT_EQ(row.rel_freq, 0.0);
        EXPECT_EQ(row.rel_t1, 0.0);
    }
    EXPECT_THROW(convergence_study(net, {50e-6}, spec), Error);
}

TEST(Convergence, RefinementImprovesMonotonically) {
    const auto net = parse_netlist(canned::fig1a);
    SweepSpec spec;
    spec.path = "Lj";
    spec.values = {10e-9};
    spec.track = 2;
    const auto study = convergence_study(net, {25e-6, 50e-6, 100e-6}, spec);
    for (const auto& label : study.sweeps[0].labels) {
        double e50 = -1, e100 = -1;
        for (const auto& row : study.rows) {
            if (row.label != label) continue;
            (row.delta == 50e-6 ? e50 : e100) = row.rel_freq;
        }
        EXPECT_LE(e50, e100) << label;
        EXPECT_LT(e50, 1e-3) << label;
    }
}

TEST(Hybridization, ResonatorsLessHybridizedAtLargerTap) {
    const auto net = parse_netlist(canned::fig1c);
    SweepSpec spec;
    spec.path = "xt";
    spec.values = {0.5e-3, 1.5e-3};
    spec.track = 3;
    const auto r = run_sweep(net, spec);
    for (const char* region : {"r0", "r1"}) {
        const auto* near = r.mode_by_region(0, region);
        const auto* far = r.mode_by_region(1, region);
        ASSERT_NE(near, nullptr);
        ASSERT_NE(far, nullptr);
        EXPECT_GT(near->distance, far->distance) << region;
    }
}

TEST(Hash, Fnv1aKnownValues) {
    EXPECT_EQ(content_hash(""), 0xcbf29ce484222325ULL);
    EXPECT_EQ(content_hash("a"), 0xaf63dc4c8601ec8cULL);
}
