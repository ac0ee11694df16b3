#pragma once

// Multi-user downlink model and constructive-interference (CI) constraints
// for M-PSK symbols, evaluated block-level over the whole waveform.

#include "dfrc/core.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace dfrc {

double db_to_linear(double db);

class CommSetup {
public:
    /// channels: K x N_T with row k holding h_k^H; symbols: K x L unit-modulus
    /// M-PSK points; gamma: linear SNR targets; sigma2: noise variance.
    CommSetup(CMatrix channels, CMatrix symbols, std::vector<double> gamma, double sigma2, int m_points);

    int users() const { return static_cast<int>(channels_.rows()); }
    int n_tx() const { return static_cast<int>(channels_.cols()); }
    int block_length() const { return static_cast<int>(symbols_.cols()); }
    const CMatrix& channels() const { return channels_; }
    const CMatrix& symbols() const { return symbols_; }
    const std::vector<double>& gamma() const { return gamma_; }
    double sigma2() const { return sigma2_; }
    double sigma() const;
    int m_points() const { return m_points_; }

private:
    CMatrix channels_;
    CMatrix symbols_;
    std::vector<double> gamma_;
    double sigma2_;
    int m_points_;
};

/// i.i.d. CN(0, 1) entries (real and imaginary parts each variance 1/2).
CMatrix draw_channels(int users, int n_tx, std::uint64_t seed);
CMatrix draw_channels(int users, int n_tx, std::mt19937_64& rng);

/// Uniform i.i.d. M-PSK symbols exp(j 2 pi i / M). Throws std::domain_error for M < 2.
CMatrix draw_symbols(int users, int block_length, int m_points, std::uint64_t seed);
CMatrix draw_symbols(int users, int block_length, int m_points, std::mt19937_64& rng);

struct ConstraintWarning {
    int row;  // 0-based constraint index m
    std::string message;
};

/// The 2KL half-space constraints Re{h~_m^H x} >= Gamma_m.
///
/// Row ordering (0-based, l = block, k = user):
///   m = 2 l K + k        factor e^{-j arg s_{k,l}} (sin L - j cos L)
///   m = (2 l + 1) K + k  factor e^{-j arg s_{k,l}} (sin L + j cos L)
/// with L = pi / M. Row m is nonzero only on the N_T entries of block l.
class CIConstraintSet {
public:
    int size() const { return static_cast<int>(gamma_.size()); }
    int users() const { return users_; }
    int n_tx() const { return n_tx_; }
    int block_length() const { return block_length_; }
    int n() const { return n_tx_ * block_length_; }
    double half_angle() const { return half_angle_; }

    int block_of(int m) const { return m / (2 * users_); }
    int user_of(int m) const { return m % users_; }

    /// Dense 2KL x N matrix whose row m is h~_m^H.
    CMatrix h_tilde() const;
    /// The N_T nonzero entries of row m (a row vector on block block_of(m)).
    Eigen::RowVectorXcd block_row(int m) const;
    /// Gamma_m for every row.
    const RVector& gamma_vec() const { return gamma_; }

    const std::vector<ConstraintWarning>& warnings() const { return warnings_; }

private:
    friend CIConstraintSet build_ci_constraints(const CommSetup& setup, int block_length);

    int users_ = 0;
    int n_tx_ = 0;
    int block_length_ = 0;
    double half_angle_ = 0.0;
    CMatrix channel_rows_;  // K x N_T, rows h_k^H
    std::vector<cd> factors_;  // per row m
    RVector gamma_;
    std::vector<ConstraintWarning> warnings_;
};

CIConstraintSet build_ci_constraints(const CommSetup& setup, int block_length);

/// margin_m = Re{h~_m^H x} - Gamma_m; feasible iff every margin >= 0.
RVector ci_margin(const CVector& x, const CIConstraintSet& set);

/// Direct decision-region test for one precoded symbol:
///   Re{h^H x e^{-j arg s} - sigma sqrt(gamma)} tan L - |Im{h^H x e^{-j arg s}}| >= -tol.
/// For M = 2 (tan L unbounded) the test reduces to the real-part threshold.
bool geometric_ci_check(const CVector& x_ell, const CVector& h_k, cd s, double gamma_k, double sigma, int m_points,
                        double tol = 1e-10);

/// Rows for which even the best-aligned constant-modulus block cannot satisfy
/// the constraint strictly: Re{h~_m^H amp e^{j arg h~_m}} <= Gamma_m.
std::vector<int> strictly_infeasible_rows(const CIConstraintSet& set, double amplitude);

}  // namespace dfrc
