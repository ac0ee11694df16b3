#pragma once

// Small random instances shared by the unit and acceptance tests.

#include "dfrc/comm_ci.hpp"
#include "dfrc/core.hpp"
#include "dfrc/radar_metrics.hpp"

#include <random>
#include <vector>

namespace dfrc::testing {

inline CMatrix random_matrix(std::mt19937_64& rng, int rows, int cols) {
    std::normal_distribution<double> n(0.0, 1.0);
    CMatrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = cd(n(rng), n(rng));
    return m;
}

inline CVector random_vector(std::mt19937_64& rng, int n) { return random_matrix(rng, n, 1).col(0); }

inline CMatrix random_hermitian(std::mt19937_64& rng, int n) {
    const CMatrix a = random_matrix(rng, n, n);
    return (a + a.adjoint()) / 2.0;
}

/// Scene with a coarse grid so dense oracles stay cheap.
inline RadarScene small_scene(int n_tx, int L, int P, std::vector<double> targets = {-30.0, 40.0},
                              double grid_step = 5.0) {
    const AngleGrid grid = AngleGrid::uniform(-90.0, 90.0, grid_step);
    auto desired = DesiredBeamPattern::rectangular(grid, targets, 20.0);
    return RadarScene(ArrayGeometry(n_tx), grid, desired, TargetSet(std::move(targets), P), L);
}

/// Full 1-degree grid, as the solver uses.
inline RadarScene desk_scene(int n_tx = 4, int L = 8, int P = 4) {
    const AngleGrid grid = AngleGrid::uniform(-90.0, 90.0, 1.0);
    std::vector<double> targets{-30.0, 40.0};
    auto desired = DesiredBeamPattern::rectangular(grid, targets, 20.0);
    return RadarScene(ArrayGeometry(n_tx), grid, desired, TargetSet(targets, P), L);
}

inline CommSetup random_comm(std::uint64_t seed, int K, int n_tx, int L, int M, double gamma_db = 6.0,
                             double sigma2 = 0.01) {
    return CommSetup(draw_channels(K, n_tx, seed), draw_symbols(K, L, M, seed), std::vector<double>(K, db_to_linear(gamma_db)),
                     sigma2, M);
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)}); }

}  // namespace dfrc::testing
