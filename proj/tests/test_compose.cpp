#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "psomodes/circuit_graph.hpp"
#include "psomodes/compose.hpp"
#include "psomodes/eigenmodes.hpp"
#include "psomodes/transfer.hpp"

using namespace psomodes;

namespace {

PsoModel lc(double f_hz, const std::string& name, double c = 100e-15) {
    const double w = 2 * std::numbers::pi * f_hz;
    const double k = w * w * c;
    return PsoModel(Matrix::Constant(1, 1, k), Matrix::Zero(1, 1), Matrix::Constant(1, 1, c), Matrix::Ones(1, 1),
                    {name}, {name + "_port"});
}

} // namespace

TEST(Transform, IdentityLeavesModelUnchanged) {
    std::mt19937_64 rng(1);
    const auto m = oracle::random_model(rng, 4, 2);
    const auto t = transform(m, Matrix::Identity(4, 4));
    EXPECT_EQ(t.K(), m.K());
    EXPECT_EQ(t.C(), m.C());
    EXPECT_EQ(t.P(), m.P());
    EXPECT_EQ(t.coord_labels(), m.coord_labels());
}

TEST(Transform, ScalarSimilarity) {
    const auto m = lc(5e9, "q");
    const auto t = transform(m, 2 * Matrix::Identity(1, 1));
    EXPECT_DOUBLE_EQ(t.K()(0, 0), 4 * m.K()(0, 0));
    EXPECT_DOUBLE_EQ(t.C()(0, 0), 4 * m.C()(0, 0));
    EXPECT_NEAR(eigenmodes(t)[0].frequency_hz() / 5e9, 1.0, 1e-12);
}

TEST(Transform, RandomUPreservesImpedanceAndSpectrum) {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> nd;
    const auto m = oracle::random_model(rng, 5, 2);
    Matrix U(5, 5);
    for (Eigen::Index i = 0; i < 25; ++i) U(i) = nd(rng);
    const auto t = transform(m, U);
    std::uniform_real_distribution<double> w(0.05, 4.0);
    for (int i = 0; i < 20; ++i) {
        const Complex s(0.01 * w(rng), w(rng));
        EXPECT_LT(oracle::rel_diff(impedance(m, s).matrix, impedance(t, s).matrix), 1e-9);
    }
    EXPECT_LT(oracle::spectrum_distance(oracle::expand_spectrum(eigenmodes(m)),
                                        oracle::expand_spectrum(eigenmodes(t))),
              1e-9);
}

TEST(Transform, EigenvectorsMapByInverseTranspose) {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> nd;
    const auto m = oracle::random_model(rng, 4, 1);
    Matrix U(4, 4);
    for (Eigen::Index i = 0; i < 16; ++i) U(i) = nd(rng);
    const auto t = transform(m, U);
    for (const auto& mode : eigenmodes(m).modes) {
        const CVector v = transform_mode(U, mode.phi);
        const Complex l = mode.lambda;
        const CMatrix Q = t.K().cast<Complex>() + l * t.G().cast<Complex>() + l * l * t.C().cast<Complex>();
        EXPECT_LT((Q * v).norm() / (Q.norm() * v.norm()), 1e-10);
    }
}

TEST(Transform, SingularURejected) {
    const auto m = lc(5e9, "q");
    try {
        transform(m, Matrix::Zero(1, 1));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NotInvertible);
    }
}

TEST(Unite, TwoOscillators) {
    const auto u = unite(lc(5e9, "a"), lc(6e9, "b"));
    const auto sol = eigenmodes(u);
    ASSERT_EQ(sol.size(), 2u);
    EXPECT_NEAR(sol[0].frequency_hz() / 5e9, 1.0, 1e-12);
    EXPECT_NEAR(sol[1].frequency_hz() / 6e9, 1.0, 1e-12);
    EXPECT_EQ(u.port_labels(), (std::vector<std::string>{"a_port", "b_port"}));
}

TEST(Unite, EmptyModelIsIdentity) {
    const auto a = lc(5e9, "a");
    const auto u = unite(a, PsoModel());
    EXPECT_EQ(u.K(), a.K());
    EXPECT_EQ(u.coord_labels(), a.coord_labels());
}

TEST(Unite, SpectrumIsDisjointUnion) {
    std::mt19937_64 rng(12);
    auto a = oracle::random_model(rng, 3, 1);
    auto b = oracle::random_model(rng, 4, 1);
    b = PsoModel(b.K(), b.G(), b.C(), b.P(), {"b0", "b1", "b2", "b3"}, {"bp"});
    auto sa = oracle::expand_spectrum(eigenmodes(a));
    const auto sb = oracle::expand_spectrum(eigenmodes(b));
    sa.insert(sa.end(), sb.begin(), sb.end());
    EXPECT_LT(oracle::spectrum_distance(sa, oracle::expand_spectrum(eigenmodes(unite(a, b)))), 1e-12);
}

TEST(Unite, DuplicateLabelRejected) {
    try {
        unite(lc(5e9, "a"), lc(6e9, "a"));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DuplicateLabel);
    }
}

TEST(Constrain, MergedCapacitorsAddUp) {
    const double c0 = 30e-15;
    const PsoModel one(Matrix::Zero(1, 1), Matrix::Zero(1, 1), Matrix::Constant(1, 1, c0), Matrix::Ones(1, 1),
                       {"a"}, {"pa"});
    const PsoModel two(Matrix::Zero(1, 1), Matrix::Zero(1, 1), Matrix::Constant(1, 1, c0), Matrix::Zero(1, 0),
                       {"b"}, {});
    Matrix Y(2, 1);
    Y << 1, -1;
    const auto [reduced, report] = constrain(unite(one, two), {Y});
    ASSERT_EQ(reduced.size(), 1);
    // The null basis is orthonormal, so the coordinate is sqrt(2) * Phi_a. Read the merged
    // capacitance off the port impedance, which is basis independent.
    const Complex s(0, 2 * std::numbers::pi * 4e9);
    const Complex z = impedance(reduced, s).matrix(0, 0);
    EXPECT_LT(std::abs(z * s * (2 * c0) - 1.0), 1e-12);
    EXPECT_NEAR(reduced.C()(0, 0), c0, 1e-27);
    EXPECT_LT((Y.transpose() * report.null_basis).norm(), 1e-15);
    EXPECT_NEAR(report.drive_constraint(0, 0), 1.0, 1e-15);
}

TEST(Constrain, EmptyConstraintSetIsIdentity) {
    std::mt19937_64 rng(13);
    const auto m = oracle::random_model(rng, 4, 1);
    const auto [reduced, report] = constrain(m, {Matrix::Zero(4, 0)});
    EXPECT_EQ(reduced.K(), m.K());
    EXPECT_LT(oracle::spectrum_distance(oracle::expand_spectrum(eigenmodes(m)),
                                        oracle::expand_spectrum(eigenmodes(reduced))),
              1e-12);
}

TEST(Constrain, DependentColumnsArePruned) {
    std::mt19937_64 rng(14);
    const auto m = oracle::random_model(rng, 4, 1);
    Matrix Y = Matrix::Zero(4, 3);
    Y(0, 0) = 1;
    Y(1, 0) = -1;
    Y.col(1) = 2 * Y.col(0);
    Y(2, 2) = 1;
    const auto [reduced, report] = constrain(m, {Y});
    EXPECT_EQ(reduced.size(), 2);
    EXPECT_EQ(report.kept_columns.size(), 2u);
    EXPECT_TRUE(validate(reduced).ok());
}

TEST(Constrain, OverConstrained) {
    std::mt19937_64 rng(15);
    const auto m = oracle::random_model(rng, 2, 1);
    try {
        constrain(m, {Matrix::Identity(2, 2)});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::OverConstrained);
    }
}

TEST(Constrain, RankAmbiguity) {
    std::mt19937_64 rng(16);
    const auto m = oracle::random_model(rng, 3, 1);
    Matrix Y = Matrix::Zero(3, 2);
    Y(0, 0) = 1;
    Y(1, 1) = 1e-10;
    try {
        constrain(m, {Y, 2e-10});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::RankAmbiguity);
    }
}

TEST(Constrain, JoinedFragmentsMatchDirectAssembly) {
    // Two LC fragments sharing a boundary node, joined by Phi_a = Phi_b.
    CircuitGraph left;
    left.add_vertex("a");
    left.add_inductor("a", "gnd", 8e-9);
    left.add_capacitor("a", "gnd", 60e-15);
    CircuitGraph right;
    right.add_vertex("b");
    right.add_vertex("c");
    right.add_capacitor("b", "gnd", 40e-15);
    right.add_inductor("b", "c", 3e-9);
    right.add_capacitor("c", "gnd", 90e-15);
    right.add_inductor("c", "gnd", 12e-9);
    const auto ml = assemble_pso(left, TreePolicy{TreeKind::Star});
    const auto mr = assemble_pso(right, TreePolicy{TreeKind::Star});
    Matrix Y = Matrix::Zero(3, 1);
    Y(0, 0) = 1;
    Y(1, 0) = -1;
    const auto [joined, report] = constrain(unite(ml, mr), {Y});

    CircuitGraph merged;
    merged.add_vertex("a");
    merged.add_vertex("c");
    merged.add_inductor("a", "gnd", 8e-9);
    merged.add_capacitor("a", "gnd", 60e-15);
    merged.add_capacitor("a", "gnd", 40e-15);
    merged.add_inductor("a", "c", 3e-9);
    merged.add_capacitor("c", "gnd", 90e-15);
    merged.add_inductor("c", "gnd", 12e-9);
    const auto direct = assemble_pso(merged);
    EXPECT_LT(oracle::spectrum_distance(oracle::expand_spectrum(eigenmodes(joined)),
                                        oracle::expand_spectrum(eigenmodes(direct))),
              1e-9);
}
