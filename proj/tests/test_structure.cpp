#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oqrw/registry.hpp"
#include "oqrw/spectral.hpp"
#include "oqrw/structure.hpp"
#include "oracles.hpp"
#include "random_walks.hpp"

using namespace oqrw;

namespace {

CVector v2(Complex a, Complex b) {
    CVector v(2);
    v << a, b;
    return v;
}

CMatrix m2(Complex a, Complex b, Complex c, Complex d) {
    CMatrix m(2, 2);
    m << a, b, c, d;
    return m;
}

BlockSubspace per_site(const WalkModel& w, const std::vector<std::vector<CVector>>& bases) {
    std::vector<int> amb;
    for (std::size_t i = 0; i < w.site_count(); ++i) amb.push_back(w.dim(i));
    return BlockSubspace(amb, bases);
}

// The two enclosures of the lazy swap walk in its natural basis.
BlockSubspace lazy_swap_first(const WalkModel& w) { return per_site(w, {{v2(1, 0)}, {v2(0, 1)}}); }
BlockSubspace lazy_swap_second(const WalkModel& w) { return per_site(w, {{v2(0, 1)}, {v2(1, 0)}}); }

BlockState lazy_swap_state(const WalkModel& w, double t, Complex s) {
    return BlockState::from_map(w, {{"1", 0.5 * m2(t, s, std::conj(s), 1 - t)},
                                    {"2", 0.5 * m2(1 - t, std::conj(s), s, t)}});
}

BlockSubspace without(const BlockSubspace& v, std::size_t site, std::size_t k) {
    auto bases = v.bases();
    bases[site].erase(bases[site].begin() + static_cast<long>(k));
    return BlockSubspace(v.ambient(), bases);
}

}  // namespace

TEST(EnclosureOf, DiagonalCycleBasisVector) {
    const auto w = builtin("ex-6.4");
    const auto enc = enclosure_of(w, 0, v2(1, 0));
    EXPECT_EQ(enc.dim(), 3);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(enc.dim(i), 1);
        EXPECT_LT(enc.residual(i, v2(1, 0)), 1e-12);
    }
}

TEST(EnclosureOf, DiagonalCycleMixedVectorFillsSpace) {
    const auto w = builtin("ex-6.4");
    EXPECT_EQ(enclosure_of(w, 0, v2(1, 1)).dim(), 6);
}

TEST(EnclosureOf, SwapPairSymmetricVector) {
    const auto w = builtin("ex-6.11");
    const auto enc = enclosure_of(w, 0, v2(1, 1) / std::sqrt(2.0));
    EXPECT_EQ(enc.dim(), 2);
    EXPECT_LT(enc.residual(0, v2(1, 1)), 1e-12);
    EXPECT_LT(enc.residual(1, v2(1, 1)), 1e-12);
}

TEST(EnclosureOf, RejectsZeroVector) { EXPECT_THROW(enclosure_of(builtin("m3"), 0, CVector::Zero(2)), PreconditionError); }

TEST(EnclosureOf, AgreesWithPathEnumeration) {
    std::mt19937_64 rng(31);
    std::vector<WalkModel> walks;
    for (auto name : builtin_names())
        if (builtin(name).total_dim() <= 6) walks.push_back(builtin(name));
    for (int k = 0; k < 10; ++k) walks.push_back(testutil::random_walk(rng, {2, 3, 2, testutil::Shape::sparse}));
    for (const auto& w : walks) {
        for (std::size_t site = 0; site < w.site_count(); ++site) {
            const CVector x = testutil::random_vector(rng, w.dim(site));
            const auto enc = enclosure_of(w, site, x);
            // Paths of length total_dim reach every generated direction.
            const auto dims = oracle::reachable_dims(w, site, x, w.total_dim());
            for (std::size_t i = 0; i < w.site_count(); ++i) EXPECT_EQ(enc.dim(i), dims[i]) << w.name();
        }
    }
}

TEST(EnclosureOf, RemovingAnyDirectionBreaksIt) {
    for (auto name : {"ex-6.4", "ex-6.11", "ex-9.2", "ex-9.6"}) {
        const auto w = builtin(name);
        const CVector x = v2(1, 0);
        const auto enc = enclosure_of(w, 0, x);
        ASSERT_TRUE(is_enclosure(w, enc));
        for (std::size_t i = 0; i < w.site_count(); ++i)
            for (int k = 0; k < enc.dim(i); ++k) {
                const auto smaller = without(enc, i, static_cast<std::size_t>(k));
                EXPECT_TRUE(!is_enclosure(w, smaller) || smaller.residual(0, x) > 1e-9) << name;
            }
    }
}

TEST(IsEnclosure, Examples) {
    EXPECT_TRUE(is_enclosure(builtin("m3"), BlockSubspace::full(builtin("m3"))));
    const auto swap = builtin("ex-6.11");
    const CVector plus = v2(1, 1) / std::sqrt(2.0);
    EXPECT_TRUE(is_enclosure(swap, per_site(swap, {{plus}, {plus}})));
    const auto diag = builtin("ex-6.4");
    EXPECT_FALSE(is_enclosure(diag, per_site(diag, {{v2(1, 0)}, {}, {}})));
}

TEST(RecurrentSpace, AbsorbingPair) {
    const auto w = builtin("ex-9.2");
    const auto r = recurrent_space(w);
    EXPECT_EQ(r.dim(), 1);
    EXPECT_EQ(r.dim(1), 1);
    EXPECT_LT(r.residual(1, v2(1, 0)), 1e-9);
    EXPECT_EQ(r.complement().dim(), 3);
}

TEST(RecurrentSpace, CyclicWalkIsEverything) { EXPECT_EQ(recurrent_space(builtin("m3")).dim(), 6); }

TEST(RecurrentSpace, AbsorbingClassicalChain) {
    Eigen::MatrixXd p(2, 2);
    p << 1, 0, 0.5, 0.5;
    const auto w = minimal_dilation(p, {"1", "2"});
    const auto r = recurrent_space(w);
    EXPECT_EQ(r.dim(0), 1);
    EXPECT_EQ(r.dim(1), 0);
}

TEST(Restriction, CompressesAndLifts) {
    const auto w = builtin("ex-9.2");
    const auto r = restrict_to(w, recurrent_space(w));
    ASSERT_EQ(r.walk.site_count(), 1u);
    EXPECT_EQ(r.walk.site_id(0), "2");
    EXPECT_TRUE(validate(r.walk).ok);
    const auto lifted = enclosure_state(w, recurrent_space(w));
    EXPECT_LT((lifted - BlockState::from_map(w, {{"2", m2(1, 0, 0, 0)}})).trace_norm(), 1e-9);
}

TEST(MinimalEnclosures, DiagonalCycle) {
    const auto w = builtin("ex-6.4");
    const auto dec = minimal_enclosures(w);
    EXPECT_EQ(dec.transient.dim(), 0);
    ASSERT_EQ(dec.singletons.size(), 2u);
    EXPECT_TRUE(dec.families.empty());
    EXPECT_EQ(dec.singletons[0].dim(), 3);
    EXPECT_EQ(dec.singletons[1].dim(), 3);
    EXPECT_TRUE(dec.singletons[0].orthogonal_to(dec.singletons[1]));
    // The classes are e_1 and e_2 throughout.
    for (const auto& e : dec.singletons) {
        const bool first = e.residual(0, v2(1, 0)) < 1e-8;
        for (std::size_t i = 0; i < 3; ++i) EXPECT_LT(e.residual(i, first ? v2(1, 0) : v2(0, 1)), 1e-8);
    }
}

TEST(MinimalEnclosures, LazySwapFamily) {
    const auto w = builtin("ex-9.6");
    const auto dec = minimal_enclosures(w);
    EXPECT_EQ(dec.transient.dim(), 0);
    EXPECT_TRUE(dec.singletons.empty());
    ASSERT_EQ(dec.families.size(), 1u);
    const auto& f = dec.families[0];
    ASSERT_EQ(f.members.size(), 2u);
    EXPECT_EQ(f.members[0].dim(), 2);
    EXPECT_EQ(f.members[1].dim(), 2);
    ASSERT_EQ(f.isometries.count({0, 1}), 1u);
    const auto& q = f.isometries.at({0, 1});
    EXPECT_LT((q.adjoint() * q - f.members[0].projector()).max_abs(), 1e-8);
    EXPECT_LT((q * q.adjoint() - f.members[1].projector()).max_abs(), 1e-8);
}

TEST(MinimalEnclosures, AbsorbingPair) {
    const auto dec = minimal_enclosures(builtin("ex-9.2"));
    EXPECT_EQ(dec.transient.dim(), 3);
    ASSERT_EQ(dec.singletons.size(), 1u);
    EXPECT_EQ(dec.singletons[0].dim(), 1);
    EXPECT_TRUE(dec.families.empty());
}

TEST(MinimalEnclosures, EachPieceIsMinimal) {
    for (auto name : builtin_names()) {
        const auto w = builtin(name);
        const auto dec = minimal_enclosures(w);
        int total = dec.transient.dim();
        for (const auto& e : dec.enclosures()) {
            total += e.dim();
            EXPECT_TRUE(is_enclosure(w, e, 1e-8)) << name;
            const auto r = restrict_to(w, e);
            const auto fp = invariant_states(r.walk);
            ASSERT_EQ(fp.hermitian_basis.size(), 1u) << name;
            EXPECT_GT(min_block_eigenvalue(fp.states[0]), 1e-9) << name;
        }
        EXPECT_EQ(total, w.total_dim()) << name;
    }
}

TEST(LinkIsometry, LazySwapPaperPair) {
    const auto w = builtin("ex-9.6");
    const auto e1 = lazy_swap_first(w), e2 = lazy_swap_second(w);
    const auto q = link_isometry(w, e1, e2);
    ASSERT_TRUE(q.has_value());
    // e_1 (x) 1 -> e_2 (x) 1 and e_2 (x) 2 -> e_1 (x) 2.
    EXPECT_LT(((*q)[0] - m2(0, 0, 1, 0)).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LT(((*q)[1] - m2(0, 1, 0, 0)).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LT((q->adjoint() * *q - e1.projector()).max_abs(), 1e-8);
}

TEST(LinkIsometry, DiagonalCycleClassesAreNotLinked) {
    const auto w = builtin("ex-6.4");
    const auto e1 = per_site(w, {{v2(1, 0)}, {v2(1, 0)}, {v2(1, 0)}});
    const auto e2 = per_site(w, {{v2(0, 1)}, {v2(0, 1)}, {v2(0, 1)}});
    EXPECT_FALSE(link_isometry(w, e1, e2).has_value());
}

TEST(LinkIsometry, RejectsOverlappingEnclosures) {
    const auto w = builtin("ex-9.6");
    EXPECT_THROW(link_isometry(w, lazy_swap_first(w), lazy_swap_first(w)), PreconditionError);
}

TEST(Accessible, SwapPair) {
    const auto w = builtin("ex-6.11");
    EXPECT_TRUE(accessible(w, 0, v2(1, 1), 1, v2(1, 1)));
    EXPECT_FALSE(accessible(w, 0, v2(1, 1), 0, v2(1, -1)));
    std::mt19937_64 rng(32);
    const CVector phi = testutil::random_vector(rng, 2);
    EXPECT_TRUE(accessible(w, 1, phi, 1, phi));
}

TEST(StateStructure, LazySwapRecoversParameters) {
    const auto w = builtin("ex-9.6");
    const auto dec = decomposition_from_enclosures(w, {lazy_swap_first(w), lazy_swap_second(w)});
    ASSERT_EQ(dec.families.size(), 1u);
    const double t = 0.3;
    const Complex s(0.1, -0.25);
    const auto rho = lazy_swap_state(w, t, s);
    const auto rep = invariant_state_structure(w, dec, rho);
    ASSERT_EQ(rep.weights.size(), 2u);
    EXPECT_NEAR(rep.weights[0], t, 1e-12);
    EXPECT_NEAR(rep.weights[1], 1 - t, 1e-12);
    ASSERT_EQ(rep.coherences.size(), 1u);
    EXPECT_LT(std::abs(rep.coherences[0].s - s), 1e-12);
    EXPECT_LT(rep.residual, 1e-8);
}

TEST(StateStructure, ExtremalStateHasSingleWeight) {
    const auto w = builtin("ex-9.6");
    const auto dec = decomposition_from_enclosures(w, {lazy_swap_first(w), lazy_swap_second(w)});
    const auto rep = invariant_state_structure(w, dec, enclosure_state(w, lazy_swap_first(w)));
    EXPECT_NEAR(rep.weights[0], 1.0, 1e-12);
    EXPECT_NEAR(rep.weights[1], 0.0, 1e-12);
    EXPECT_LT(std::abs(rep.coherences[0].s), 1e-12);
    EXPECT_LT(rep.residual, 1e-8);
}

TEST(StateStructure, DiagonalCycleMixture) {
    const auto w = builtin("ex-6.4");
    const auto dec = minimal_enclosures(w);
    auto rho = BlockState::zeros(w);
    for (std::size_t i = 0; i < 3; ++i) rho[i] = m2(0.3, 0, 0, 0.7) / 3.0;
    const auto rep = invariant_state_structure(w, dec, rho);
    ASSERT_EQ(rep.weights.size(), 2u);
    const bool first = dec.singletons[0].residual(0, v2(1, 0)) < 1e-8;
    EXPECT_NEAR(rep.weights[first ? 0 : 1], 0.3, 1e-10);
    EXPECT_NEAR(rep.weights[first ? 1 : 0], 0.7, 1e-10);
    EXPECT_TRUE(rep.coherences.empty());
    EXPECT_LT(rep.residual, 1e-8);
}

TEST(StateStructure, RejectsNonInvariantState) {
    const auto w = builtin("ex-9.6");
    const auto dec = minimal_enclosures(w);
    EXPECT_THROW(invariant_state_structure(w, dec, default_initial_state(w)), PreconditionError);
}

TEST(RotationPair, ComplexEigenvectorsSpanEnclosures) {
    const auto w = builtin("remark-4.6");
    for (Complex phase : {Complex(0, 1), Complex(0, -1)}) {
        const CVector x = v2(1, phase) / std::sqrt(2.0);
        const auto v = per_site(w, {{x}, {x}});
        EXPECT_TRUE(is_enclosure(w, v));
        EXPECT_EQ(enclosure_of(w, 0, x).dim(), 2);
    }
    EXPECT_FALSE(is_irreducible(w));
    const auto dec = minimal_enclosures(w);
    EXPECT_EQ(dec.enclosures().size(), 2u);
    EXPECT_EQ(dec.transient.dim(), 0);
}

TEST(RotationPair, RealVectorsGiveTwoCycles) {
    // For real unit x the pair |x><x|, |Rx><Rx| on both sites is swapped by the dual map.
    const auto w = builtin("remark-4.6");
    const double a = 0.4;
    const CVector x = v2(std::cos(a), std::sin(a)), rx = v2(-std::sin(a), std::cos(a));
    const CMatrix px = x * x.adjoint(), prx = rx * rx.adjoint();
    const auto p0 = BlockObservable({px, px}), p1 = BlockObservable({prx, prx});
    EXPECT_LT((apply_dual(w, p0) - p1).max_abs(), 1e-14);
    EXPECT_LT((apply_dual(w, p1) - p0).max_abs(), 1e-14);
}
