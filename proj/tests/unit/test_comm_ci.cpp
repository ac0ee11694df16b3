#include "doctest.h"

#include "dfrc/comm_ci.hpp"
#include "fixtures.hpp"
#include "oracle.hpp"

#include <cmath>
#include <map>

using namespace dfrc;

TEST_CASE("db conversion") {
    CHECK(db_to_linear(0.0) == 1.0);
    CHECK(db_to_linear(10.0) == doctest::Approx(10.0));
    CHECK(db_to_linear(6.0) == doctest::Approx(3.981071705534972));
}

TEST_CASE("channels are deterministic per seed with unit variance") {
    CHECK(draw_channels(3, 4, 42) == draw_channels(3, 4, 42));
    CHECK(draw_channels(3, 4, 42) != draw_channels(3, 4, 43));

    const CMatrix h = draw_channels(100, 1000, 1);  // 1e5 entries
    double mag2 = 0.0, re2 = 0.0;
    cd mean = 0.0;
    for (Eigen::Index i = 0; i < h.size(); ++i) {
        mag2 += std::norm(h.data()[i]);
        re2 += h.data()[i].real() * h.data()[i].real();
        mean += h.data()[i];
    }
    const double n = static_cast<double>(h.size());
    // |h|^2 is Exp(1): sd 1, so 3 sigma of the mean is 3 / sqrt(n).
    CHECK(std::abs(mag2 / n - 1.0) < 3.0 / std::sqrt(n));
    CHECK(std::abs(re2 / n - 0.5) < 3.0 * std::sqrt(0.5) / std::sqrt(n));
    CHECK(std::abs(mean / n) < 3.0 / std::sqrt(n));
}

TEST_CASE("symbol alphabets") {
    const CMatrix b = draw_symbols(3, 50, 2, 9);
    for (Eigen::Index i = 0; i < b.size(); ++i) CHECK((b.data()[i] == cd(1.0) || b.data()[i] == cd(-1.0)));

    const CMatrix q = draw_symbols(4, 100, 4, 9);
    std::map<int, int> seen;
    for (Eigen::Index i = 0; i < q.size(); ++i) {
        CHECK(std::abs(q.data()[i]) == doctest::Approx(1.0));
        const double k = std::arg(q.data()[i]) / (kPi / 2.0);
        CHECK(std::abs(k - std::round(k)) < 1e-12);
        seen[(static_cast<int>(std::round(k)) + 4) % 4]++;
    }
    CHECK(seen.size() == 4);
    CHECK_THROWS_AS(draw_symbols(1, 1, 1, 1), std::domain_error);
}

TEST_CASE("symbol histogram passes a chi-square test at 1%") {
    const int M = 8;
    const CMatrix s = draw_symbols(100, 1000, M, 77);
    std::vector<double> counts(M, 0.0);
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        double ph = std::arg(s.data()[i]);
        if (ph < 0) ph += 2.0 * kPi;
        counts[static_cast<int>(std::lround(ph / (2.0 * kPi / M))) % M] += 1.0;
    }
    const double expected = static_cast<double>(s.size()) / M;
    double chi2 = 0.0;
    for (double c : counts) chi2 += (c - expected) * (c - expected) / expected;
    CHECK(chi2 < 18.475);  // 99th percentile, 7 degrees of freedom
}

TEST_CASE("CommSetup invariants") {
    const CMatrix h = draw_channels(3, 2, 1);
    const CMatrix s = draw_symbols(3, 4, 4, 1);
    CHECK_THROWS(CommSetup(h, s, {1, 1, 1}, 0.01, 4));  // K > N_T
    const CMatrix h2 = draw_channels(2, 3, 1);
    const CMatrix s2 = draw_symbols(2, 4, 4, 1);
    CHECK_THROWS(CommSetup(h2, s2, {1, 1}, 0.0, 4));
    CHECK_THROWS(CommSetup(h2, s2, {1, -1}, 0.01, 4));
    CHECK_THROWS(CommSetup(h2, 2.0 * s2, {1, 1}, 0.01, 4));
    CHECK_NOTHROW(CommSetup(h2, s2, {1, 1}, 0.01, 4));
}

TEST_CASE("hand example N_T = K = L = 1, QPSK") {
    CMatrix h(1, 1);
    h(0, 0) = 1.0;
    CMatrix s(1, 1);
    s(0, 0) = std::polar(1.0, kPi / 4);
    const double gamma = 4.0, sigma2 = 0.25;
    const auto set = build_ci_constraints(CommSetup(h, s, {gamma}, sigma2, 4), 1);
    REQUIRE(set.size() == 2);
    const cd rot = std::polar(1.0, -kPi / 4);
    const double sl = std::sin(kPi / 4), cl = std::cos(kPi / 4);
    const CMatrix ht = set.h_tilde();
    CHECK(std::abs(ht(0, 0) - rot * cd(sl, -cl)) < 1e-15);
    CHECK(std::abs(ht(1, 0) - rot * cd(sl, cl)) < 1e-15);
    const double g = 0.5 * 2.0 * sl;
    CHECK(set.gamma_vec()[0] == doctest::Approx(g));
    CHECK(set.gamma_vec()[1] == doctest::Approx(g));
}

TEST_CASE("sign test on the symbol ray") {
    CMatrix h(1, 1);
    h(0, 0) = 1.0;
    CMatrix s(1, 1);
    s(0, 0) = std::polar(1.0, 3 * kPi / 4);
    const double gamma = 2.0, sigma2 = 0.5;  // sigma sqrt(gamma) = 1
    const auto set = build_ci_constraints(CommSetup(h, s, {gamma}, sigma2, 4), 1);
    for (double c : {0.5, 1.0, 2.0}) {
        CVector x(1);
        x[0] = c * s(0, 0);
        const RVector m = ci_margin(x, set);
        const double expected = (c - 1.0) * std::sin(kPi / 4);
        CHECK(m[0] == doctest::Approx(expected).scale(1.0));
        CHECK(m[1] == doctest::Approx(expected).scale(1.0));
        CHECK(geometric_ci_check(x, CVector::Ones(1), s(0, 0), gamma, std::sqrt(sigma2), 4) == (c >= 1.0));
    }
}

TEST_CASE("rows match the dense definition and have channel norm") {
    const auto comm = testing::random_comm(3, 2, 4, 5, 8);
    const auto set = build_ci_constraints(comm, 5);
    REQUIRE(set.size() == 2 * 2 * 5);
    const CMatrix dense = oracle::dense_h_tilde(comm.channels(), comm.symbols(), 8);
    const CMatrix ht = set.h_tilde();
    CHECK((ht - dense).cwiseAbs().maxCoeff() < 1e-14);
    for (int m = 0; m < set.size(); ++m) {
        const int l = set.block_of(m);
        const int k = set.user_of(m);
        CHECK(ht.row(m).norm() == doctest::Approx(comm.channels().row(k).norm()));
        for (int c = 0; c < set.n(); ++c)
            if (c / 4 != l) CHECK(ht(m, c) == cd(0.0));
        CHECK((set.block_row(m) - ht.block(m, l * 4, 1, 4)).cwiseAbs().maxCoeff() == 0.0);
    }
    // the pair (k, l) shares Gamma
    for (int l = 0; l < 5; ++l)
        for (int k = 0; k < 2; ++k) CHECK(set.gamma_vec()[2 * l * 2 + k] == set.gamma_vec()[(2 * l + 1) * 2 + k]);
}

TEST_CASE("margins at zero and with zero gamma") {
    const auto comm = testing::random_comm(4, 2, 3, 4, 4);
    const auto set = build_ci_constraints(comm, 4);
    const RVector m0 = ci_margin(CVector::Zero(12), set);
    CHECK((m0 + set.gamma_vec()).cwiseAbs().maxCoeff() == 0.0);

    const CommSetup silent(comm.channels(), comm.symbols(), {0.0, 0.0}, 0.01, 4);
    CHECK(ci_margin(CVector::Zero(12), build_ci_constraints(silent, 4)).cwiseAbs().maxCoeff() == 0.0);
    CHECK_THROWS(ci_margin(CVector::Zero(11), set));
}

TEST_CASE("margins are invariant under co-rotation of block and symbol") {
    auto rng = make_rng(21, RngStream::test);
    const auto comm = testing::random_comm(5, 2, 3, 3, 4);
    const CVector x = testing::random_vector(rng, 9);
    const RVector before = ci_margin(x, build_ci_constraints(comm, 3));
    const double phi = 0.77;
    const int l = 1;
    CMatrix sym = comm.symbols();
    sym.col(l) *= std::polar(1.0, phi);
    CVector y = x;
    y.segment(l * 3, 3) *= std::polar(1.0, phi);
    const RVector after = ci_margin(y, build_ci_constraints(CommSetup(comm.channels(), sym, comm.gamma(), 0.01, 4), 3));
    CHECK((before - after).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("compact form agrees with the decision-region geometry") {
    auto rng = make_rng(22, RngStream::test);
    for (int M : {2, 4, 8}) {
        int agree = 0;
        for (int trial = 0; trial < 1000; ++trial) {
            const auto comm = testing::random_comm(100 + trial, 1, 2, 1, M, 0.0, 0.1);
            const auto set = build_ci_constraints(comm, 1);
            const CVector x = 0.7 * testing::random_vector(rng, 2);
            const RVector m = ci_margin(x, set);
            const bool compact = m.minCoeff() >= -1e-10;
            const bool geo = geometric_ci_check(x, comm.channels().row(0).adjoint(), comm.symbols()(0, 0),
                                                comm.gamma()[0], comm.sigma(), M);
            agree += compact == geo;
        }
        CHECK(agree == 1000);
    }
}

TEST_CASE("zero channel with positive gamma is reported") {
    CMatrix h = draw_channels(2, 2, 1);
    h.row(1).setZero();
    const auto set = build_ci_constraints(CommSetup(h, draw_symbols(2, 2, 4, 1), {1.0, 1.0}, 0.01, 4), 2);
    CHECK_FALSE(set.warnings().empty());
    const auto rows = strictly_infeasible_rows(set, 0.5);
    CHECK(rows.size() == 4);
    for (int m : rows) CHECK(set.user_of(m) == 1);
}
