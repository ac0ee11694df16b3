#include "dfrc/majorization.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

namespace dfrc {

std::vector<KernelTerm> quartic_kernel_terms(const RadarScene& scene, const Weights& weights) {
    std::vector<KernelTerm> terms;
    const int L = scene.block_length();
    if (weights.bp() > 0.0)
        for (int u = 0; u < scene.n_angles(); ++u) terms.push_back({0, weights.bp(), scene.b_factor(u)});

    const int P = scene.max_lag();
    const int Q = scene.n_targets();
    for (int q = 0; q < Q; ++q) {
        for (int qp = 0; qp < Q; ++qp) {
            const double w = q == qp ? weights.ac() : weights.cc();
            if (w == 0.0) continue;
            for (int tau = -P + 1; tau <= P - 1; ++tau) {
                if (q == qp && tau == 0) continue;
                // D_{tau,q,q'} = J_{-tau} (x) a_q' a_q^H
                if (std::abs(tau) >= L) continue;
                terms.push_back({-tau, w, scene.d_factor(q, qp)});
            }
        }
    }
    return terms;
}

RVector diagonal_upper_bound(const CMatrix& Q) {
    if (Q.rows() != Q.cols()) throw std::domain_error("diagonal_upper_bound: matrix must be square");
    const double scale = std::max(1.0, Q.cwiseAbs().maxCoeff());
    if ((Q - Q.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw std::domain_error("diagonal_upper_bound: matrix is not Hermitian");
    RVector r(Q.rows());
    for (Eigen::Index i = 0; i < Q.rows(); ++i) {
        KahanSum s;
        for (Eigen::Index j = 0; j < Q.cols(); ++j) s.add(std::abs(Q(i, j)));
        r[i] = s.value();
    }
    return r;
}

namespace {

void require_kernel_capacity(const RadarScene& scene) {
    if (scene.n_tx() > kMaxKernelNt)
        throw CapacityError("lag-factored quartic kernel supports N_T <= " + std::to_string(kMaxKernelNt) +
                            " (requested N_T = " + std::to_string(scene.n_tx()) + ")");
}

// Columns sqrt(c_k) vec(F_k) of every term sharing one lag; Psi_lag = G G^H.
std::map<int, CMatrix> lag_factors(const RadarScene& scene, const Weights& weights) {
    const auto terms = quartic_kernel_terms(scene, weights);
    std::map<int, int> counts;
    for (const auto& t : terms) ++counts[t.lag];
    std::map<int, CMatrix> g;
    std::map<int, int> filled;
    const int nt2 = scene.n_tx() * scene.n_tx();
    for (const auto& [lag, c] : counts) g[lag] = CMatrix(nt2, c);
    for (const auto& t : terms) {
        g[t.lag].col(filled[t.lag]++) = std::sqrt(t.weight) * vec(t.factor);
    }
    return g;
}

}  // namespace

RMatrix precompute_E(const RadarScene& scene, const Weights& weights) {
    require_kernel_capacity(scene);
    const int nt = scene.n_tx();
    const int L = scene.block_length();
    RMatrix E = RMatrix::Zero(scene.n(), scene.n());
    for (const auto& [lag, G] : lag_factors(scene, weights)) {
        const CMatrix psi = G * G.adjoint();
        const double multiplicity = static_cast<double>(L - std::abs(lag));
        RMatrix block(nt, nt);
        for (int c = 0; c < nt; ++c) {
            for (int r = 0; r < nt; ++r) {
                const Eigen::Index i = r + static_cast<Eigen::Index>(c) * nt;
                KahanSum s;
                for (Eigen::Index j = 0; j < psi.cols(); ++j) s.add(std::abs(psi(i, j)));
                block(r, c) = multiplicity * s.value();
            }
        }
        for (int l = 0; l < L; ++l) {
            const int lc = l + lag;
            if (lc >= 0 && lc < L) E.block(l * nt, lc * nt, nt, nt) = block;
        }
    }
    return E;
}

double lambda_psi(const RadarScene& scene, const Weights& weights) {
    require_kernel_capacity(scene);
    const int L = scene.block_length();
    double best = 0.0;
    for (const auto& [lag, G] : lag_factors(scene, weights)) {
        // Nonzero spectrum of G G^H equals that of the smaller Gram matrix.
        const CMatrix gram = G.cols() <= G.rows() ? CMatrix(G.adjoint() * G) : CMatrix(G * G.adjoint());
        Eigen::SelfAdjointEigenSolver<CMatrix> es(gram, Eigen::EigenvaluesOnly);
        best = std::max(best, static_cast<double>(L - std::abs(lag)) * es.eigenvalues().maxCoeff());
    }
    return best;
}

MajorizerContext::MajorizerContext(const RadarScene& scene, const Weights& weights, MajorizerKind kind)
    : scene_(&scene), weights_(weights), kind_(kind) {
    if (kind_ == MajorizerKind::diagonal)
        E_ = precompute_E(scene, weights);
    else
        lambda_psi_ = dfrc::lambda_psi(scene, weights);
}

CMatrix quartic_gradient_matrix(const CVector& x_t, const RadarScene& scene, const Weights& weights) {
    const int nt = scene.n_tx();
    const int L = scene.block_length();
    CMatrix phi = CMatrix::Zero(scene.n(), scene.n());

    if (weights.bp() > 0.0) {
        // x_t^H B_u x_t = alpha* G_d(u) - G(x_t, u), real.
        const RVector g = pattern_on_grid(x_t, scene);
        const auto& gd = scene.desired().values();
        const double alpha = optimal_alpha(x_t, scene);
        RVector coeff(scene.n_angles());
        KahanSum gd_weighted;
        for (int u = 0; u < scene.n_angles(); ++u) {
            coeff[u] = alpha * gd[u] - g[u];
            gd_weighted.add(coeff[u] * gd[u]);
        }
        // sum_u c_u b_u = (sum_u c_u G_d(u)) s - A diag(c) A^H
        const CMatrix& A = scene.grid_steering();
        const CMatrix block = weights.bp() * (gd_weighted.value() * scene.pattern_projector() -
                                              A * coeff.cast<cd>().asDiagonal() * A.adjoint());
        for (int l = 0; l < L; ++l) phi.block(l * nt, l * nt, nt, nt) += block;
    }

    if (weights.ac() > 0.0 || weights.cc() > 0.0) {
        const CorrelationTable table(mat(x_t, nt, L), scene);
        const int P = scene.max_lag();
        const int Q = scene.n_targets();
        for (int q = 0; q < Q; ++q) {
            for (int qp = 0; qp < Q; ++qp) {
                const double w = q == qp ? weights.ac() : weights.cc();
                if (w == 0.0) continue;
                const CMatrix f = scene.d_factor(q, qp);
                for (int tau = -P + 1; tau <= P - 1; ++tau) {
                    if ((q == qp && tau == 0) || std::abs(tau) >= L) continue;
                    // conj(x_t^H D x_t) D with D = J_{-tau} (x) f
                    const cd kappa = w * std::conj(table.at(tau, q, qp));
                    const int lag = -tau;
                    for (int l = 0; l < L; ++l) {
                        const int lc = l + lag;
                        if (lc >= 0 && lc < L) phi.block(l * nt, lc * nt, nt, nt) += kappa * f;
                    }
                }
            }
        }
    }
    // Paired (tau, q, q') / (-tau, q', q) terms make this Hermitian; remove rounding asymmetry.
    return (phi + phi.adjoint()) / 2.0;
}

CMatrix build_phi(const CVector& x_t, const MajorizerContext& ctx) {
    CMatrix phi = quartic_gradient_matrix(x_t, ctx.scene(), ctx.weights());
    const CMatrix outer = x_t * x_t.adjoint();
    if (ctx.kind() == MajorizerKind::diagonal)
        phi -= (ctx.E().cast<cd>().array() * outer.array()).matrix();
    else
        phi -= ctx.lambda_psi() * outer;
    phi *= 2.0;
    return (phi + phi.adjoint()) / 2.0;
}

SurrogateLinear build_d(const CVector& x_t, const CMatrix& phi, MajorizerKind kind) {
    SurrogateLinear s;
    if (kind == MajorizerKind::diagonal) {
        const RVector r = diagonal_upper_bound(phi);
        s.d = 2.0 * (phi * x_t - (r.cast<cd>().array() * x_t.array()).matrix());
    } else {
        Eigen::SelfAdjointEigenSolver<CMatrix> es(phi, Eigen::EigenvaluesOnly);
        const double lmax = es.eigenvalues().maxCoeff();
        s.d = 2.0 * (phi * x_t - lmax * x_t);
    }
    s.const_offset = -x_t.dot(s.d).real();
    return s;
}

}  // namespace dfrc
