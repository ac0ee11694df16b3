#include "doctest.h"

#include "dfrc/majorization.hpp"
#include "fixtures.hpp"
#include "oracle.hpp"

#include <Eigen/Eigenvalues>

using namespace dfrc;
using testing::rel_err;

namespace {

// N_T = 1 scene on a two-angle grid with G_d = [1, 0], so b = [0, -1].
RadarScene scalar_scene(int L) {
    const AngleGrid grid({0.0, 30.0}, 30.0);
    return RadarScene(ArrayGeometry(1), grid, DesiredBeamPattern(grid, {1.0, 0.0}), TargetSet({0.0}, 1), L);
}

CVector vec_outer(const CVector& x) { return vec(CMatrix(x * x.adjoint())); }

}  // namespace

TEST_CASE("diagonal upper bound examples") {
    CMatrix q(2, 2);
    q << 1.0, -2.0, -2.0, 1.0;
    const RVector r = diagonal_upper_bound(q);
    CHECK(r[0] == 3.0);
    CHECK(r[1] == 3.0);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(CMatrix(r.cast<cd>().asDiagonal()) - q);
    CHECK(es.eigenvalues()[0] == doctest::Approx(0.0).scale(1.0));
    CHECK(es.eigenvalues()[1] == doctest::Approx(4.0));

    CMatrix d = CMatrix::Zero(3, 3);
    d.diagonal() << 1.0, 2.0, 5.0;
    CHECK((diagonal_upper_bound(d).cast<cd>() - d.diagonal()).cwiseAbs().maxCoeff() == 0.0);

    CMatrix bad = q;
    bad(0, 1) = cd(-2.0, 0.1);
    CHECK_THROWS_AS(diagonal_upper_bound(bad), std::domain_error);
}

TEST_CASE("diagonal upper bound dominates random Hermitian matrices") {
    auto rng = make_rng(31, RngStream::test);
    for (int trial = 0; trial < 100; ++trial) {
        CMatrix q = testing::random_hermitian(rng, 16);
        q /= std::sqrt(oracle::lambda_max(q * q));  // spectral norm 1
        const RVector r = diagonal_upper_bound(q);
        CHECK(oracle::lambda_min(CMatrix(r.cast<cd>().asDiagonal()) - q) >= -1e-10);
    }
}

TEST_CASE("E and lambda on the scalar scene") {
    const RadarScene one = scalar_scene(1);
    const Weights w(1, 0, 0);
    const RMatrix E = precompute_E(one, w);
    REQUIRE(E.rows() == 1);
    CHECK(E(0, 0) == doctest::Approx(1.0));
    CHECK(lambda_psi(one, w) == doctest::Approx(1.0));

    // single nonzero term B = -I_2: rank one with ||B||_F^2 = 2
    const RadarScene two = scalar_scene(2);
    CHECK(lambda_psi(two, w) == doctest::Approx(2.0));
    const auto psi = oracle::assemble_psi(oracle::SceneParams::from(two), w);
    CHECK(oracle::lambda_max(psi.psi) == doctest::Approx(2.0));
}

TEST_CASE("all-zero B terms leave Phi = -2 E .* x x^H") {
    const AngleGrid grid({10.0}, 1.0);
    const RadarScene s(ArrayGeometry(1), grid, DesiredBeamPattern(grid, {1.0}), TargetSet({0.0}, 1), 3);
    const MajorizerContext ctx(s, Weights(1, 0, 0), MajorizerKind::diagonal);
    auto rng = make_rng(1, RngStream::test);
    const CVector x = random_cm_vector(rng, 3, 1.0);
    const CMatrix expected = -2.0 * (ctx.E().cast<cd>().array() * (x * x.adjoint()).array()).matrix();
    CHECK((build_phi(x, ctx) - expected).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("E and lambda match the dense kernel") {
    for (auto [nt, L, P] : {std::tuple{2, 3, 2}, {3, 4, 3}, {4, 4, 4}, {2, 8, 4}}) {
        const RadarScene scene = testing::small_scene(nt, L, P, {-30.0, 40.0}, 10.0);
        for (const Weights& w : {Weights(1, 2, 2), Weights(0, 1, 0), Weights(0, 0, 1), Weights(1, 0, 0)}) {
            const auto psi = oracle::assemble_psi(oracle::SceneParams::from(scene), w);
            const RMatrix E = precompute_E(scene, w);
            const RMatrix Eo = oracle::dense_E(psi, scene.n());
            CHECK((E - Eo).cwiseAbs().maxCoeff() <= 1e-10 * std::max(1.0, Eo.maxCoeff()));
            CHECK((E - E.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, E.maxCoeff()));
            CHECK(E.minCoeff() >= 0.0);

            const double lam = lambda_psi(scene, w);
            const double lam_o = oracle::lambda_max(psi.psi);
            CHECK(rel_err(lam, lam_o) <= 1e-8);
            CHECK(lam >= psi.psi.diagonal().real().maxCoeff() * (1 - 1e-12));
        }
    }
}

TEST_CASE("Psi identities at a constant-modulus point") {
    const RadarScene scene = testing::small_scene(4, 4, 3, {-30.0, 40.0}, 10.0);
    const Weights w(1, 2, 2);
    const auto psi = oracle::assemble_psi(oracle::SceneParams::from(scene), w);
    const RMatrix E = precompute_E(scene, w);
    const double p_total = 2.0;
    const double amp = cm_amplitude(p_total, 4);
    const RVector rowsum = psi.psi.cwiseAbs().rowwise().sum();
    auto rng = make_rng(41, RngStream::test);
    for (int trial = 0; trial < 5; ++trial) {
        const CVector x = random_cm_vector(rng, 16, amp);
        const CVector xt = random_cm_vector(rng, 16, amp);
        CHECK(rel_err(psi.evaluate(x), total_objective(x, scene, w)) <= 1e-8);

        const CVector v = vec_outer(x);
        const double lhs = (v.adjoint() * rowsum.cast<cd>().asDiagonal() * v)(0, 0).real();
        CHECK(rel_err(lhs, p_total * p_total / 16.0 * E.sum()) <= 1e-8);

        const cd bil = (v.adjoint() * rowsum.cast<cd>().asDiagonal() * vec_outer(xt))(0, 0);
        const cd rhs = (x.adjoint() * (E.cast<cd>().array() * (xt * xt.adjoint()).array()).matrix() * x)(0, 0);
        CHECK(std::abs(bil - rhs) <= 1e-9 * std::max(1.0, std::abs(rhs)));
    }
    CHECK(oracle::lambda_min(psi.psi) >= -1e-8 * oracle::lambda_max(psi.psi));
}

TEST_CASE("kernel capacity") {
    const RadarScene wide = testing::small_scene(33, 1, 1, {0.0}, 30.0);
    CHECK_THROWS_AS(precompute_E(wide, Weights(1, 0, 0)), CapacityError);
    CHECK_THROWS_AS(lambda_psi(wide, Weights(1, 0, 0)), CapacityError);
    CHECK_THROWS_AS(oracle::assemble_psi(oracle::SceneParams::from(testing::small_scene(3, 6, 2)), Weights(1, 0, 0)),
                    CapacityError);
}

TEST_CASE("quartic gradient equals mat(Psi vec(x x^H))") {
    const RadarScene scene = testing::small_scene(3, 4, 3, {-20.0, 35.0}, 10.0);
    const Weights w(1, 2, 2);
    const auto psi = oracle::assemble_psi(oracle::SceneParams::from(scene), w);
    auto rng = make_rng(42, RngStream::test);
    const CVector xt = testing::random_vector(rng, 12);
    const CVector pv = psi.psi * vec_outer(xt);
    const CMatrix expected = mat(pv, 12, 12);
    const CMatrix got = quartic_gradient_matrix(xt, scene, w);
    CHECK((got - expected).cwiseAbs().maxCoeff() <= 1e-9 * std::max(1.0, expected.cwiseAbs().maxCoeff()));
}

TEST_CASE("Phi is Hermitian and the quadratic surrogate dominates") {
    const RadarScene scene = testing::small_scene(4, 4, 3);
    const Weights w(1, 2, 2);
    auto rng = make_rng(43, RngStream::test);
    for (MajorizerKind kind : {MajorizerKind::diagonal, MajorizerKind::max_eigen}) {
        const MajorizerContext ctx(scene, w, kind);
        for (int trial = 0; trial < 3; ++trial) {
            const CVector xt = random_cm_vector(rng, 16, 0.5);
            const CMatrix phi = build_phi(xt, ctx);
            CHECK((phi - phi.adjoint()).cwiseAbs().maxCoeff() <= 1e-12 * phi.norm());
            const double gt = total_objective(xt, scene, w);
            const double qt = (xt.adjoint() * phi * xt)(0, 0).real();
            double worst = -1e300;
            for (int s = 0; s < 1000; ++s) {
                const CVector x = random_cm_vector(rng, 16, 0.5);
                const double lhs = total_objective(x, scene, w) - gt;
                const double rhs = (x.adjoint() * phi * x)(0, 0).real() - qt;
                worst = std::max(worst, (lhs - rhs) / std::max(1.0, gt));
            }
            CHECK(worst <= 1e-9);
        }
    }
}

TEST_CASE("linear surrogate") {
    auto rng = make_rng(44, RngStream::test);
    const CVector xt = random_cm_vector(rng, 8, 1.0);
    for (MajorizerKind kind : {MajorizerKind::diagonal, MajorizerKind::max_eigen}) {
        const auto s = build_d(xt, 3.0 * CMatrix::Identity(8, 8), kind);
        CHECK(s.d.cwiseAbs().maxCoeff() < 1e-14);
    }

    const RadarScene scene = testing::small_scene(4, 4, 3);
    const Weights w(1, 2, 2);
    for (MajorizerKind kind : {MajorizerKind::diagonal, MajorizerKind::max_eigen}) {
        const MajorizerContext ctx(scene, w, kind);
        for (int trial = 0; trial < 3; ++trial) {
            const CVector x_t = random_cm_vector(rng, 16, 0.5);
            const auto lin = build_d(x_t, build_phi(x_t, ctx), kind);
            CHECK(std::abs(x_t.dot(lin.d).real() + lin.const_offset) < 1e-12 * std::max(1.0, std::abs(lin.const_offset)));
            const double gt = total_objective(x_t, scene, w);
            double worst = -1e300;
            for (int s = 0; s < 1000; ++s) {
                const CVector x = random_cm_vector(rng, 16, 0.5);
                const double lhs = total_objective(x, scene, w) - gt;
                const double rhs = (x - x_t).dot(lin.d).real();
                worst = std::max(worst, (lhs - rhs) / std::max(1.0, gt));
            }
            CHECK(worst <= 1e-9);
        }
    }
}

TEST_CASE("kernel terms skip lags outside the block") {
    const RadarScene scene = testing::small_scene(2, 3, 4);
    for (const auto& t : quartic_kernel_terms(scene, Weights(0, 1, 1))) CHECK(std::abs(t.lag) < 3);
}
