#include "dfrc/comm_ci.hpp"

#include <cmath>
#include <limits>

namespace dfrc {

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

CommSetup::CommSetup(CMatrix channels, CMatrix symbols, std::vector<double> gamma, double sigma2, int m_points)
    : channels_(std::move(channels)),
      symbols_(std::move(symbols)),
      gamma_(std::move(gamma)),
      sigma2_(sigma2),
      m_points_(m_points) {
    if (channels_.rows() < 1) throw std::invalid_argument("CommSetup: at least one user required");
    if (symbols_.rows() != channels_.rows())
        throw std::invalid_argument("CommSetup: symbol rows must equal the number of users");
    if (static_cast<Eigen::Index>(gamma_.size()) != channels_.rows())
        throw std::invalid_argument("CommSetup: one gamma per user required");
    if (channels_.rows() > channels_.cols()) throw std::invalid_argument("CommSetup: requires K <= N_T");
    if (!(sigma2_ > 0.0)) throw std::invalid_argument("CommSetup: sigma2 must be > 0");
    if (m_points_ < 2) throw std::domain_error("CommSetup: PSK order must be >= 2");
    for (double g : gamma_)
        if (!(g >= 0.0)) throw std::invalid_argument("CommSetup: gamma must be nonnegative");
    if ((symbols_.array().abs() - 1.0).abs().maxCoeff() > 1e-12)
        throw std::invalid_argument("CommSetup: symbols must have unit modulus");
}

double CommSetup::sigma() const { return std::sqrt(sigma2_); }

CMatrix draw_channels(int users, int n_tx, std::mt19937_64& rng) {
    if (users < 1 || n_tx < 1) throw std::invalid_argument("draw_channels: dimensions must be >= 1");
    std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
    CMatrix h(users, n_tx);
    // Fill row-major so that row k is contiguous in draw order.
    for (int k = 0; k < users; ++k)
        for (int n = 0; n < n_tx; ++n) {
            const double re = normal(rng);
            const double im = normal(rng);
            h(k, n) = cd(re, im);
        }
    return h;
}

CMatrix draw_channels(int users, int n_tx, std::uint64_t seed) {
    auto rng = make_rng(seed, RngStream::channels);
    return draw_channels(users, n_tx, rng);
}

CMatrix draw_symbols(int users, int block_length, int m_points, std::mt19937_64& rng) {
    if (m_points < 2) throw std::domain_error("draw_symbols: PSK order must be >= 2");
    if (users < 1 || block_length < 1) throw std::invalid_argument("draw_symbols: dimensions must be >= 1");
    std::uniform_int_distribution<int> index(0, m_points - 1);
    CMatrix s(users, block_length);
    for (int l = 0; l < block_length; ++l)
        for (int k = 0; k < users; ++k) {
            const int i = index(rng);
            // Exact points on the axes keep BPSK/QPSK symbols free of rounding noise.
            if ((4 * i) % m_points == 0) {
                static constexpr cd axis[4] = {cd(1, 0), cd(0, 1), cd(-1, 0), cd(0, -1)};
                s(k, l) = axis[(4 * i / m_points) % 4];
            } else {
                s(k, l) = std::polar(1.0, 2.0 * kPi * i / m_points);
            }
        }
    return s;
}

CMatrix draw_symbols(int users, int block_length, int m_points, std::uint64_t seed) {
    auto rng = make_rng(seed, RngStream::symbols);
    return draw_symbols(users, block_length, m_points, rng);
}

CIConstraintSet build_ci_constraints(const CommSetup& setup, int block_length) {
    if (setup.block_length() != block_length)
        throw std::invalid_argument("build_ci_constraints: symbol block length differs from L");
    const int K = setup.users();
    const double lam = kPi / setup.m_points();
    const double sin_l = std::sin(lam);
    const double cos_l = std::cos(lam);

    CIConstraintSet set;
    set.users_ = K;
    set.n_tx_ = setup.n_tx();
    set.block_length_ = block_length;
    set.half_angle_ = lam;
    set.channel_rows_ = setup.channels();
    set.factors_.resize(static_cast<std::size_t>(2) * K * block_length);
    set.gamma_.resize(2 * K * block_length);

    for (int l = 0; l < block_length; ++l) {
        for (int k = 0; k < K; ++k) {
            const cd derotate = std::conj(setup.symbols()(k, l));  // e^{-j arg s}, |s| = 1
            const double gm = setup.sigma() * std::sqrt(setup.gamma()[k]) * sin_l;
            const int lower = 2 * l * K + k;
            const int upper = (2 * l + 1) * K + k;
            set.factors_[lower] = derotate * cd(sin_l, -cos_l);
            set.factors_[upper] = derotate * cd(sin_l, cos_l);
            set.gamma_[lower] = gm;
            set.gamma_[upper] = gm;
        }
    }
    for (int k = 0; k < K; ++k) {
        if (setup.channels().row(k).squaredNorm() == 0.0 && setup.gamma()[k] > 0.0) {
            for (int l = 0; l < block_length; ++l)
                for (int m : {2 * l * K + k, (2 * l + 1) * K + k})
                    set.warnings_.push_back({m, "user " + std::to_string(k + 1) +
                                                    " has an all-zero channel but a positive SNR target; "
                                                    "constraint is infeasible"});
        }
    }
    return set;
}

Eigen::RowVectorXcd CIConstraintSet::block_row(int m) const {
    return channel_rows_.row(user_of(m)) * factors_[m];
}

CMatrix CIConstraintSet::h_tilde() const {
    CMatrix h = CMatrix::Zero(size(), n());
    for (int m = 0; m < size(); ++m) h.block(m, block_of(m) * n_tx_, 1, n_tx_) = block_row(m);
    return h;
}

RVector ci_margin(const CVector& x, const CIConstraintSet& set) {
    if (x.size() != set.n())
        throw std::invalid_argument("ci_margin: waveform length " + std::to_string(x.size()) + " does not match N = " +
                                    std::to_string(set.n()));
    RVector margin(set.size());
    for (int m = 0; m < set.size(); ++m) {
        const auto xl = x.segment(set.block_of(m) * set.n_tx(), set.n_tx());
        margin[m] = (set.block_row(m) * xl).value().real() - set.gamma_vec()[m];
    }
    return margin;
}

bool geometric_ci_check(const CVector& x_ell, const CVector& h_k, cd s, double gamma_k, double sigma, int m_points,
                        double tol) {
    if (m_points < 2) throw std::domain_error("geometric_ci_check: PSK order must be >= 2");
    const cd rotated = h_k.dot(x_ell) * std::conj(s) / std::abs(s);  // h^H x e^{-j arg s}
    const double threshold = sigma * std::sqrt(gamma_k);
    if (m_points == 2) return rotated.real() - threshold >= -tol;
    const double lam = kPi / m_points;
    return (rotated.real() - threshold) * std::tan(lam) - std::abs(rotated.imag()) >= -tol;
}

std::vector<int> strictly_infeasible_rows(const CIConstraintSet& set, double amplitude) {
    std::vector<int> rows;
    for (int m = 0; m < set.size(); ++m) {
        // Best alignment x = amp * exp(j arg h~_m) attains amp * ||h~_m||_1.
        const double best = amplitude * set.block_row(m).cwiseAbs().sum();
        if (!(best > set.gamma_vec()[m])) rows.push_back(m);
    }
    return rows;
}

}  // namespace dfrc
