#pragma once

// Transmit beam pattern, beam-pattern shaping cost and space-time
// correlation sidelobe metrics of a waveform block.
//
// Steering convention: a_n(theta) = exp(j 2 pi d (n - 1) sin theta), theta in
// degrees measured from broadside, grid defaulting to [-90, 90].
//
// The N x N matrices of the vectorized forms (A_u, B_u, D_{tau,q,q'}) are
// Kronecker products with an N_T x N_T factor. Hot paths evaluate them through
// that factor; the dense N x N versions are only materialized on request and
// only up to kMaxDenseN.

#include "dfrc/core.hpp"

#include <vector>

namespace dfrc {

inline constexpr int kMaxDenseN = 64;

CVector steering_vector(const ArrayGeometry& geometry, double theta_deg);

/// [J_tau]_{i,j} = 1 iff j - i == tau. All-zero when |tau| >= L.
RMatrix shift_matrix(int tau, int L);

/// ||a^H(theta) X||^2
double beam_pattern(const WaveformMatrix& X, const ArrayGeometry& geometry, double theta_deg);
double beam_pattern(const CMatrix& X, const CVector& steering);

/// a^H(theta_q) X J_tau X^H a(theta_q'); its squared modulus is chi_{tau,q,q'}.
cd correlation_coefficient(const CMatrix& X, int tau, const CVector& a_q, const CVector& a_qp);

/// chi_{tau,q,q'} = |a^H(theta_q) X J_tau X^H a(theta_q')|^2
double correlation(const CMatrix& X, int tau, const CVector& a_q, const CVector& a_qp);

class RadarScene {
public:
    RadarScene(ArrayGeometry geometry, AngleGrid grid, DesiredBeamPattern desired, TargetSet targets,
               int block_length);

    const ArrayGeometry& geometry() const { return geometry_; }
    const AngleGrid& grid() const { return grid_; }
    const DesiredBeamPattern& desired() const { return desired_; }
    const TargetSet& targets() const { return targets_; }

    int n_tx() const { return geometry_.n_tx(); }
    int block_length() const { return block_length_; }
    /// Length of the vectorized waveform, L * N_T.
    int n() const { return block_length_ * geometry_.n_tx(); }
    int max_lag() const { return targets_.max_lag(); }
    int n_targets() const { return targets_.size(); }
    int n_angles() const { return static_cast<int>(grid_.size()); }

    /// Columns are a(theta_u) for every grid angle.
    const CMatrix& grid_steering() const { return grid_steering_; }
    /// Columns are a(theta_q) for every target.
    const CMatrix& target_steering() const { return target_steering_; }

    /// sum_u G_d(theta_u)^2
    double desired_energy() const { return desired_energy_; }
    /// s = sum_u G_d(theta_u) a_u a_u^H / sum_u G_d(theta_u)^2, so alpha* = sum_l x_l^H s x_l.
    const CMatrix& pattern_projector() const { return projector_; }

    /// N_T x N_T factor b_u of B_u = I_L (x) b_u.
    CMatrix b_factor(int u) const;
    /// N_T x N_T factor a(theta_q') a^H(theta_q) of D_{tau,q,q'} = J_{-tau} (x) factor.
    CMatrix d_factor(int q, int qp) const;

    /// Dense N x N B_u. Throws CapacityError when N > kMaxDenseN.
    CMatrix b_matrix(int u) const;
    /// Dense N x N D_{tau,q,q'}. Throws CapacityError when N > kMaxDenseN.
    CMatrix d_matrix(int tau, int q, int qp) const;

private:
    ArrayGeometry geometry_;
    AngleGrid grid_;
    DesiredBeamPattern desired_;
    TargetSet targets_;
    int block_length_;
    CMatrix grid_steering_;
    CMatrix target_steering_;
    CMatrix projector_;
    double desired_energy_ = 0.0;
};

/// Lag-indexed correlation coefficients r_{tau,q,q'} for tau in [-P+1, P-1].
class CorrelationTable {
public:
    CorrelationTable(const CMatrix& X, const RadarScene& scene);

    cd at(int tau, int q, int qp) const;
    int max_lag() const { return max_lag_; }
    int n_targets() const { return n_targets_; }

private:
    int max_lag_;
    int n_targets_;
    std::vector<cd> r_;
};

/// G(x, theta_u) for every grid angle.
RVector pattern_on_grid(const CVector& x, const RadarScene& scene);

/// alpha* = sum_u G(x,theta_u) G_d(theta_u) / sum_u G_d(theta_u)^2
double optimal_alpha(const CVector& x, const RadarScene& scene);

/// sum_u |x^H B_u x|^2 = min over alpha of sum_u |alpha G_d(theta_u) - G(x,theta_u)|^2
double beampattern_cost(const CVector& x, const RadarScene& scene);

double autocorr_isl(const CVector& x, const RadarScene& scene);
double crosscorr_isl(const CVector& x, const RadarScene& scene);

struct ObjectiveTerms {
    double bp = 0.0;
    double ac = 0.0;
    double cc = 0.0;

    double weighted(const Weights& w) const { return w.bp() * bp + w.ac() * ac + w.cc() * cc; }
};

ObjectiveTerms objective_terms(const CVector& x, const RadarScene& scene);

/// w_bp g_bp + w_ac g_ac + w_cc g_cc
double total_objective(const CVector& x, const RadarScene& scene, const Weights& weights);

}  // namespace dfrc
