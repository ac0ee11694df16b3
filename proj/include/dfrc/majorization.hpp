#pragma once

// Two-stage majorization of the quartic radar objective.
//
// The objective is g(x) = v^H Psi v with v = vec(x x^H) and
//   Psi = sum_k c_k vec(M_k) vec(M_k)^H,  M_k in {B_u, D_{tau,q,q}, D_{tau,q,q'}}.
// Stage one bounds Psi by a diagonal R (row sums of |Psi|, or lambda_max(Psi) I)
// which yields the quadratic surrogate x^H Phi x. Stage two bounds Phi the same
// way which yields the linear surrogate Re{x^H d}. Both stages are tight at x_t
// and the dropped terms are constant under the constant-modulus constraint.
//
// Every M_k is J_delta (x) F_k with F_k an N_T x N_T factor, so Psi only couples
// entries of vec(x x^H) that share the same block lag delta. Restricted to one
// lag, Psi is (1 1^T) (x) Psi_delta with Psi_delta of size N_T^2 x N_T^2, which
// gives E and lambda_max(Psi) exactly without ever forming the N^2 x N^2 matrix.

#include "dfrc/core.hpp"
#include "dfrc/radar_metrics.hpp"

#include <vector>

namespace dfrc {

/// Largest N_T supported by the lag-factored kernel (Psi_delta is N_T^2 square).
inline constexpr int kMaxKernelNt = 32;

/// One rank-one contribution c * vec(J_lag (x) F) vec(J_lag (x) F)^H to Psi.
struct KernelTerm {
    int lag;  // column block minus row block; J_lag has ones where j - i == lag
    double weight;
    CMatrix factor;
};

/// All weighted terms of Psi, skipping zero weights and lags with |lag| >= L.
std::vector<KernelTerm> quartic_kernel_terms(const RadarScene& scene, const Weights& weights);

/// r_i = sum_j |Q_ij|; diag(r) - Q is positive semidefinite for Hermitian Q.
/// Throws std::domain_error if Q is not Hermitian to 1e-12 (relative to max |Q_ij|).
RVector diagonal_upper_bound(const CMatrix& Q);

/// E = mat(|Psi| 1), real symmetric and entrywise nonnegative, N x N.
/// Throws CapacityError when N_T > kMaxKernelNt.
RMatrix precompute_E(const RadarScene& scene, const Weights& weights);

/// lambda_max(Psi) = max over lags of (L - |lag|) lambda_max(Psi_lag).
double lambda_psi(const RadarScene& scene, const Weights& weights);

class MajorizerContext {
public:
    MajorizerContext(const RadarScene& scene, const Weights& weights, MajorizerKind kind);

    MajorizerKind kind() const { return kind_; }
    const RadarScene& scene() const { return *scene_; }
    const Weights& weights() const { return weights_; }
    /// Only populated for the diagonal kind.
    const RMatrix& E() const { return E_; }
    /// Only meaningful for the max-eigenvalue kind.
    double lambda_psi() const { return lambda_psi_; }

private:
    const RadarScene* scene_;
    Weights weights_;
    MajorizerKind kind_;
    RMatrix E_;
    double lambda_psi_ = 0.0;
};

/// Phi = 2 (w_bp Phi1 + w_ac Phi2 + w_cc Phi3 - S(x_t)), Hermitian N x N, with
/// S(x_t) = E .* x_t x_t^H (diagonal kind) or lambda_psi x_t x_t^H (eigen kind).
CMatrix build_phi(const CVector& x_t, const MajorizerContext& ctx);

/// w_bp Phi1 + w_ac Phi2 + w_cc Phi3 alone (the Psi v_t contraction), Hermitian.
CMatrix quartic_gradient_matrix(const CVector& x_t, const RadarScene& scene, const Weights& weights);

struct SurrogateLinear {
    CVector d;
    /// -Re{x_t^H d}: Re{x^H d} + const_offset bounds g(x) - g(x_t) on the
    /// constant-modulus set. Diagnostics only.
    double const_offset = 0.0;
};

/// d = 2 (Phi - diag(|Phi| 1)) x_t (diagonal) or 2 (Phi - lambda_max(Phi) I) x_t (eigen).
SurrogateLinear build_d(const CVector& x_t, const CMatrix& phi, MajorizerKind kind);

}  // namespace dfrc
