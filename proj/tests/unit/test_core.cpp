#include "doctest.h"

#include "dfrc/core.hpp"
#include "dfrc/waveform_io.hpp"
#include "fixtures.hpp"

#include <filesystem>
#include <sstream>

using namespace dfrc;

TEST_CASE("vec stacks columns") {
    CMatrix x(2, 2);
    x << 1.0, 3.0, 2.0, 4.0;
    const CVector v = vec(x);
    CHECK(v.size() == 4);
    for (int i = 0; i < 4; ++i) CHECK(v[i] == cd(i + 1.0));

    const CVector id = vec(CMatrix::Identity(2, 2));
    CHECK(id[0] == cd(1.0));
    CHECK(id[1] == cd(0.0));
    CHECK(id[2] == cd(0.0));
    CHECK(id[3] == cd(1.0));
}

TEST_CASE("mat inverts vec") {
    auto rng = make_rng(7, RngStream::test);
    for (auto [r, c] : {std::pair{3, 4}, {1, 5}, {4, 1}, {2, 2}}) {
        const CMatrix x = testing::random_matrix(rng, r, c);
        CHECK(mat(vec(x), r, c) == x);
    }
    CHECK_THROWS(mat(CVector::Zero(5), 2, 2));
}

TEST_CASE("WaveformMatrix from_vec places entry (n, l) at l*N_T + n") {
    CVector x(6);
    for (int i = 0; i < 6; ++i) x[i] = cd(i, 0.0);
    const auto w = WaveformMatrix::from_vec(x, 3, 2, 1.0);
    CHECK(w.entries()(2, 1) == cd(5.0));
    CHECK(w.entries()(1, 0) == cd(1.0));
    CHECK(w.vec() == x);
}

TEST_CASE("modulus error measures deviation from the amplitude") {
    const double amp = cm_amplitude(1.0, 4);
    CHECK(amp == doctest::Approx(0.5));
    auto rng = make_rng(1, RngStream::test);
    const CVector x = random_cm_vector(rng, 8, amp);
    const auto w = WaveformMatrix::from_vec(x, 4, 2, 1.0, true);
    CHECK(w.modulus_error() < 1e-15);
    CVector bad = x;
    bad[3] *= 1.1;
    CHECK(WaveformMatrix::from_vec(bad, 4, 2, 1.0, true).modulus_error() == doctest::Approx(0.05));
}

TEST_CASE("rel_close is relative above 1 and absolute below") {
    CHECK(rel_close(1e6, 1e6 + 1.0, 1e-5));
    CHECK_FALSE(rel_close(1e6, 1e6 + 100.0, 1e-5));
    CHECK(rel_close(0.0, 1e-9, 1e-8));
    CHECK_FALSE(rel_close(0.0, 1e-7, 1e-8));
}

TEST_CASE("KahanSum keeps small addends") {
    KahanSum s;
    s.add(1.0);
    for (int i = 0; i < 1000000; ++i) s.add(1e-16);
    CHECK(s.value() == doctest::Approx(1.0 + 1e-10).epsilon(1e-14));
}

TEST_CASE("Weights reject all-zero and negative values") {
    CHECK_THROWS_AS(Weights(0, 0, 0), std::invalid_argument);
    CHECK_THROWS_AS(Weights(-1, 1, 1), std::invalid_argument);
    CHECK_NOTHROW(Weights(1, 0, 0));
}

TEST_CASE("SolverConfig validation") {
    SolverConfig c;
    CHECK_NOTHROW(c.validate());
    CHECK(c.eps1 == 1e-4);
    CHECK(c.eps2 == 1e-4);
    CHECK(c.eps3 == 3e-5);
    CHECK(c.max_outer_iters == 5000);
    CHECK(c.max_bisect_iters == 200);
    c.eps1 = 0.0;
    CHECK_THROWS(c.validate());
    c = SolverConfig{};
    c.max_outer_iters = 0;
    CHECK_THROWS(c.validate());
}

TEST_CASE("enum names round trip") {
    CHECK(parse_majorizer_kind(to_string(MajorizerKind::max_eigen)) == MajorizerKind::max_eigen);
    CHECK(parse_solve_mode(to_string(SolveMode::radar_only)) == SolveMode::radar_only);
    CHECK_THROWS(parse_solve_mode("bogus"));
}

TEST_CASE("rng streams are reproducible and independent") {
    auto a = make_rng(5, RngStream::channels);
    auto b = make_rng(5, RngStream::channels);
    auto c = make_rng(5, RngStream::symbols);
    const auto va = a();
    CHECK(va == b());
    CHECK(va != c());
}

TEST_CASE("AngleGrid::uniform includes both ends") {
    const auto g = AngleGrid::uniform(-90, 90, 1);
    CHECK(g.size() == 181);
    CHECK(g.angles_deg().front() == -90.0);
    CHECK(g.angles_deg().back() == 90.0);
}

TEST_CASE("rectangular desired pattern") {
    const auto g = AngleGrid::uniform(-90, 90, 1);
    const auto d = DesiredBeamPattern::rectangular(g, {-30, 40}, 20);
    int ones = 0;
    for (double v : d.values()) ones += v == 1.0;
    CHECK(ones == 42);
    CHECK(d.values()[60] == 1.0);   // -30
    CHECK(d.values()[49] == 0.0);   // -41
    CHECK(d.values()[140] == 1.0);  // 50
}

TEST_CASE("waveform save and load is bit-identical") {
    auto rng = make_rng(11, RngStream::test);
    const CMatrix x = testing::random_matrix(rng, 4, 8);
    const WaveformMatrix w(x, 2.5);
    const auto path = std::filesystem::temp_directory_path() / "dfrc_test_waveform.txt";
    save_waveform(w, path);
    const auto back = load_waveform(path);
    std::filesystem::remove(path);
    REQUIRE(back.n_tx() == 4);
    REQUIRE(back.block_length() == 8);
    CHECK(back.p_total() == 2.5);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        CHECK(back.entries().data()[i].real() == x.data()[i].real());
        CHECK(back.entries().data()[i].imag() == x.data()[i].imag());
    }
}

TEST_CASE("waveform parse errors name line and field") {
    std::istringstream in(
        "dfrc-waveform n_tx=2 block_length=3 p_total=1 constant_modulus=0\n"
        "1:0,2:0,3:0\n"
        "1:0,2:0\n");
    try {
        read_waveform(in, "bad.txt");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
        CHECK(e.field().find("row 2") != std::string::npos);
    }

    std::istringstream bad_num(
        "dfrc-waveform n_tx=1 block_length=2 p_total=1 constant_modulus=0\n"
        "1:0,x:0\n");
    CHECK_THROWS_AS(read_waveform(bad_num), ParseError);

    std::istringstream bad_header("not-a-waveform\n");
    CHECK_THROWS_AS(read_waveform(bad_header), ParseError);
}

TEST_CASE("constant-modulus flagged file checks |x_n|") {
    std::istringstream good(
        "dfrc-waveform n_tx=1 block_length=2 p_total=1 constant_modulus=1\n"
        "1:0,0:-1\n");
    CHECK(read_waveform(good).constant_modulus());

    std::istringstream off(
        "dfrc-waveform n_tx=1 block_length=2 p_total=1 constant_modulus=1\n"
        "1:0,0:-1.000001\n");
    CHECK_THROWS_AS(read_waveform(off), ParseError);
}

TEST_CASE("format_double round trips") {
    for (double v : {0.1, -1e-300, 123456789.123456789, 5e-324, 1.0 / 3.0}) CHECK(parse_double(format_double(v)) == v);
    CHECK_THROWS(parse_double("1.0abc"));
}
