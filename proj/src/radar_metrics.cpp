#include "dfrc/radar_metrics.hpp"

#include <cmath>
#include <string>

namespace dfrc {

CVector steering_vector(const ArrayGeometry& geometry, double theta_deg) {
    const double phase_step = 2.0 * kPi * geometry.spacing() * std::sin(deg_to_rad(theta_deg));
    CVector a(geometry.n_tx());
    for (int n = 0; n < geometry.n_tx(); ++n) a[n] = std::polar(1.0, phase_step * n);
    return a;
}

RMatrix shift_matrix(int tau, int L) {
    RMatrix j = RMatrix::Zero(L, L);
    for (int i = 0; i < L; ++i) {
        const int col = i + tau;
        if (col >= 0 && col < L) j(i, col) = 1.0;
    }
    return j;
}

double beam_pattern(const CMatrix& X, const CVector& steering) {
    // a^H X as a row; squared norm of that row.
    return (steering.adjoint() * X).squaredNorm();
}

double beam_pattern(const WaveformMatrix& X, const ArrayGeometry& geometry, double theta_deg) {
    return beam_pattern(X.entries(), steering_vector(geometry, theta_deg));
}

cd correlation_coefficient(const CMatrix& X, int tau, const CVector& a_q, const CVector& a_qp) {
    const Eigen::Index L = X.cols();
    // y = X^H a, so a_q^H X J_tau X^H a_qp = sum_i conj(y_q[i]) y_qp[i + tau].
    const CVector y_q = X.adjoint() * a_q;
    const CVector y_qp = X.adjoint() * a_qp;
    cd acc = 0.0;
    for (Eigen::Index i = 0; i < L; ++i) {
        const Eigen::Index j = i + tau;
        if (j >= 0 && j < L) acc += std::conj(y_q[i]) * y_qp[j];
    }
    return acc;
}

double correlation(const CMatrix& X, int tau, const CVector& a_q, const CVector& a_qp) {
    return std::norm(correlation_coefficient(X, tau, a_q, a_qp));
}

// --------------------------------------------------------------------------

RadarScene::RadarScene(ArrayGeometry geometry, AngleGrid grid, DesiredBeamPattern desired, TargetSet targets,
                       int block_length)
    : geometry_(geometry),
      grid_(std::move(grid)),
      desired_(std::move(desired)),
      targets_(std::move(targets)),
      block_length_(block_length) {
    if (block_length_ < 1) throw std::invalid_argument("RadarScene: block length must be >= 1");
    if (desired_.values().size() != grid_.size())
        throw std::invalid_argument("RadarScene: desired pattern length differs from grid length");
    if (targets_.max_lag() - 1 > block_length_)
        throw std::invalid_argument("RadarScene: requires P - 1 <= L");

    const int nt = geometry_.n_tx();
    const int U = n_angles();
    grid_steering_.resize(nt, U);
    for (int u = 0; u < U; ++u) grid_steering_.col(u) = steering_vector(geometry_, grid_.angles_deg()[u]);
    target_steering_.resize(nt, n_targets());
    for (int q = 0; q < n_targets(); ++q)
        target_steering_.col(q) = steering_vector(geometry_, targets_.angles_deg()[q]);

    KahanSum energy;
    projector_ = CMatrix::Zero(nt, nt);
    for (int u = 0; u < U; ++u) {
        const double gd = desired_.values()[u];
        energy.add(gd * gd);
        if (gd != 0.0) projector_.noalias() += gd * grid_steering_.col(u) * grid_steering_.col(u).adjoint();
    }
    desired_energy_ = energy.value();
    if (desired_energy_ > 0.0) projector_ /= desired_energy_;
}

CMatrix RadarScene::b_factor(int u) const {
    const auto a = grid_steering_.col(u);
    return desired_.values()[u] * projector_ - a * a.adjoint();
}

CMatrix RadarScene::d_factor(int q, int qp) const {
    return target_steering_.col(qp) * target_steering_.col(q).adjoint();
}

namespace {

void require_dense(int n) {
    if (n > kMaxDenseN)
        throw CapacityError("dense N x N scene matrices are capped at N <= " + std::to_string(kMaxDenseN) +
                            " (requested N = " + std::to_string(n) + ")");
}

// J (x) F for an L x L 0/1 shift matrix J with a single nonzero diagonal.
CMatrix kron_shift(int lag, int L, const CMatrix& f) {
    const Eigen::Index nt = f.rows();
    CMatrix m = CMatrix::Zero(L * nt, L * nt);
    for (int i = 0; i < L; ++i) {
        const int j = i + lag;
        if (j >= 0 && j < L) m.block(i * nt, j * nt, nt, nt) = f;
    }
    return m;
}

}  // namespace

CMatrix RadarScene::b_matrix(int u) const {
    require_dense(n());
    return kron_shift(0, block_length_, b_factor(u));
}

CMatrix RadarScene::d_matrix(int tau, int q, int qp) const {
    require_dense(n());
    return kron_shift(-tau, block_length_, d_factor(q, qp));
}

// --------------------------------------------------------------------------

CorrelationTable::CorrelationTable(const CMatrix& X, const RadarScene& scene)
    : max_lag_(scene.max_lag()), n_targets_(scene.n_targets()) {
    const Eigen::Index L = X.cols();
    const CMatrix Y = X.adjoint() * scene.target_steering();  // column q is X^H a_q
    const int span = 2 * max_lag_ - 1;
    r_.assign(static_cast<std::size_t>(span) * n_targets_ * n_targets_, cd(0.0));
    for (int tau = -max_lag_ + 1; tau <= max_lag_ - 1; ++tau) {
        for (int q = 0; q < n_targets_; ++q) {
            for (int qp = 0; qp < n_targets_; ++qp) {
                cd acc = 0.0;
                for (Eigen::Index i = 0; i < L; ++i) {
                    const Eigen::Index j = i + tau;
                    if (j >= 0 && j < L) acc += std::conj(Y(i, q)) * Y(j, qp);
                }
                r_[(static_cast<std::size_t>(tau + max_lag_ - 1) * n_targets_ + q) * n_targets_ + qp] = acc;
            }
        }
    }
}

cd CorrelationTable::at(int tau, int q, int qp) const {
    if (tau <= -max_lag_ || tau >= max_lag_) throw std::out_of_range("CorrelationTable: lag outside [-P+1, P-1]");
    return r_[(static_cast<std::size_t>(tau + max_lag_ - 1) * n_targets_ + q) * n_targets_ + qp];
}

namespace {

CMatrix as_block(const CVector& x, const RadarScene& scene) {
    if (x.size() != scene.n())
        throw std::invalid_argument("waveform length " + std::to_string(x.size()) + " does not match L*N_T = " +
                                    std::to_string(scene.n()));
    return mat(x, scene.n_tx(), scene.block_length());
}

}  // namespace

RVector pattern_on_grid(const CVector& x, const RadarScene& scene) {
    const CMatrix X = as_block(x, scene);
    // Row u of A^H X holds a_u^H x_l for every l.
    const CMatrix proj = scene.grid_steering().adjoint() * X;
    return proj.rowwise().squaredNorm();
}

double optimal_alpha(const CVector& x, const RadarScene& scene) {
    const RVector g = pattern_on_grid(x, scene);
    KahanSum num;
    for (int u = 0; u < scene.n_angles(); ++u) num.add(g[u] * scene.desired().values()[u]);
    return num.value() / scene.desired_energy();
}

double beampattern_cost(const CVector& x, const RadarScene& scene) {
    const RVector g = pattern_on_grid(x, scene);
    const auto& gd = scene.desired().values();
    KahanSum num;
    for (int u = 0; u < scene.n_angles(); ++u) num.add(g[u] * gd[u]);
    const double alpha = num.value() / scene.desired_energy();
    KahanSum cost;
    for (int u = 0; u < scene.n_angles(); ++u) {
        const double r = alpha * gd[u] - g[u];
        cost.add(r * r);
    }
    return cost.value();
}

namespace {

ObjectiveTerms isl_terms(const CVector& x, const RadarScene& scene) {
    const CorrelationTable table(as_block(x, scene), scene);
    const int P = scene.max_lag();
    const int Q = scene.n_targets();
    KahanSum ac, cc;
    for (int q = 0; q < Q; ++q) {
        for (int qp = 0; qp < Q; ++qp) {
            for (int tau = -P + 1; tau <= P - 1; ++tau) {
                const double chi = std::norm(table.at(tau, q, qp));
                if (q == qp) {
                    if (tau != 0) ac.add(chi);
                } else {
                    cc.add(chi);
                }
            }
        }
    }
    return {0.0, ac.value(), cc.value()};
}

}  // namespace

double autocorr_isl(const CVector& x, const RadarScene& scene) { return isl_terms(x, scene).ac; }
double crosscorr_isl(const CVector& x, const RadarScene& scene) { return isl_terms(x, scene).cc; }

ObjectiveTerms objective_terms(const CVector& x, const RadarScene& scene) {
    ObjectiveTerms t = isl_terms(x, scene);
    t.bp = beampattern_cost(x, scene);
    return t;
}

double total_objective(const CVector& x, const RadarScene& scene, const Weights& weights) {
    return objective_terms(x, scene).weighted(weights);
}

}  // namespace dfrc
