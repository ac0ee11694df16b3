#include "dfrc/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dfrc {

ParseError::ParseError(std::string file, int line, std::string field, const std::string& what)
    : std::runtime_error(file + ":" + std::to_string(line) + ": field '" + field + "': " + what),
      line_(line),
      field_(std::move(field)) {}

bool rel_close(double a, double b, double tol) {
    return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

void KahanSum::add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
        comp_ += (sum_ - t) + v;
    else
        comp_ += (v - t) + sum_;
    sum_ = t;
}

ArrayGeometry::ArrayGeometry(int n_tx, double spacing) : n_tx_(n_tx), spacing_(spacing) {
    if (n_tx < 1) throw std::invalid_argument("ArrayGeometry: n_tx must be >= 1");
    if (!(spacing > 0.0)) throw std::invalid_argument("ArrayGeometry: spacing must be > 0");
}

double cm_amplitude(double p_total, int n_tx) { return std::sqrt(p_total / n_tx); }

WaveformMatrix::WaveformMatrix(CMatrix entries, double p_total, bool constant_modulus)
    : entries_(std::move(entries)), p_total_(p_total), constant_modulus_(constant_modulus) {
    if (entries_.rows() < 1 || entries_.cols() < 1)
        throw std::invalid_argument("WaveformMatrix: empty block");
    if (!(p_total_ > 0.0)) throw std::invalid_argument("WaveformMatrix: p_total must be > 0");
}

WaveformMatrix WaveformMatrix::from_vec(const CVector& x, int n_tx, int block_length, double p_total,
                                        bool constant_modulus) {
    return WaveformMatrix(mat(x, n_tx, block_length), p_total, constant_modulus);
}

CVector WaveformMatrix::vec() const { return dfrc::vec(entries_); }

double WaveformMatrix::modulus_error() const {
    const double amp = cm_amplitude(p_total_, n_tx());
    return (entries_.array().abs() - amp).abs().maxCoeff();
}

CVector vec(const CMatrix& m) {
    // Eigen storage is column-major, which is exactly vec().
    return Eigen::Map<const CVector>(m.data(), m.size());
}

CMatrix mat(const CVector& x, int rows, int cols) {
    if (x.size() != static_cast<Eigen::Index>(rows) * cols)
        throw std::invalid_argument("mat: vector length does not match rows * cols");
    return Eigen::Map<const CMatrix>(x.data(), rows, cols);
}

AngleGrid::AngleGrid(std::vector<double> angles_deg, double resolution_deg)
    : angles_(std::move(angles_deg)), resolution_(resolution_deg) {
    if (angles_.empty()) throw std::invalid_argument("AngleGrid: at least one angle required");
    for (std::size_t i = 1; i < angles_.size(); ++i)
        if (!(angles_[i] > angles_[i - 1]))
            throw std::invalid_argument("AngleGrid: angles must be strictly increasing");
}

AngleGrid AngleGrid::uniform(double min_deg, double max_deg, double step_deg) {
    if (!(step_deg > 0.0)) throw std::invalid_argument("AngleGrid: step must be > 0");
    if (max_deg < min_deg) throw std::invalid_argument("AngleGrid: max < min");
    const auto count = static_cast<std::size_t>(std::floor((max_deg - min_deg) / step_deg + 0.5)) + 1;
    std::vector<double> a(count);
    for (std::size_t i = 0; i < count; ++i) a[i] = min_deg + static_cast<double>(i) * step_deg;
    return AngleGrid(std::move(a), step_deg);
}

DesiredBeamPattern::DesiredBeamPattern(const AngleGrid& grid, std::vector<double> values)
    : values_(std::move(values)) {
    if (values_.size() != grid.size())
        throw std::invalid_argument("DesiredBeamPattern: length must equal the grid length");
    bool any_positive = false;
    for (double v : values_) {
        if (!(v >= 0.0)) throw std::invalid_argument("DesiredBeamPattern: values must be nonnegative");
        any_positive = any_positive || v > 0.0;
    }
    if (!any_positive) throw std::domain_error("DesiredBeamPattern: at least one value must be > 0");
}

DesiredBeamPattern DesiredBeamPattern::rectangular(const AngleGrid& grid, const std::vector<double>& targets_deg,
                                                   double beam_width_deg) {
    std::vector<double> v(grid.size(), 0.0);
    const double half = beam_width_deg / 2.0;
    for (std::size_t u = 0; u < grid.size(); ++u) {
        const double th = grid.angles_deg()[u];
        for (double tq : targets_deg)
            if (th >= tq - half - 1e-12 && th <= tq + half + 1e-12) v[u] = 1.0;
    }
    return DesiredBeamPattern(grid, std::move(v));
}

TargetSet::TargetSet(std::vector<double> angles_deg, int max_lag) : angles_(std::move(angles_deg)), max_lag_(max_lag) {
    if (angles_.empty()) throw std::invalid_argument("TargetSet: at least one target required");
    if (max_lag_ < 1) throw std::invalid_argument("TargetSet: max_lag must be >= 1");
}

Weights::Weights(double bp, double ac, double cc) : bp_(bp), ac_(ac), cc_(cc) {
    if (!(bp >= 0.0 && ac >= 0.0 && cc >= 0.0)) throw std::invalid_argument("Weights: must be nonnegative");
    if (bp == 0.0 && ac == 0.0 && cc == 0.0) throw std::invalid_argument("Weights: not all weights may be zero");
}

std::string_view to_string(MajorizerKind k) { return k == MajorizerKind::diagonal ? "diagonal" : "max_eigen"; }
std::string_view to_string(SolveMode m) { return m == SolveMode::dfrc ? "dfrc" : "radar_only"; }

MajorizerKind parse_majorizer_kind(std::string_view s) {
    if (s == "diagonal") return MajorizerKind::diagonal;
    if (s == "max_eigen") return MajorizerKind::max_eigen;
    throw std::invalid_argument("unknown majorizer kind '" + std::string(s) + "'");
}

SolveMode parse_solve_mode(std::string_view s) {
    if (s == "dfrc") return SolveMode::dfrc;
    if (s == "radar_only") return SolveMode::radar_only;
    throw std::invalid_argument("unknown mode '" + std::string(s) + "'");
}

void SolverConfig::validate() const {
    if (!(eps1 > 0.0 && eps2 > 0.0 && eps3 >= 0.0 && feas_tol >= 0.0))
        throw std::invalid_argument("SolverConfig: tolerances must be positive");
    if (max_outer_iters < 1 || max_bisect_iters < 1 || max_sweeps < 1)
        throw std::invalid_argument("SolverConfig: iteration caps must be >= 1");
}

std::mt19937_64 make_rng(std::uint64_t seed, RngStream stream) {
    const auto lo = static_cast<std::uint32_t>(seed & 0xffffffffu);
    const auto hi = static_cast<std::uint32_t>(seed >> 32);
    std::seed_seq seq{lo, hi, static_cast<std::uint32_t>(stream)};
    return std::mt19937_64(seq);
}

CVector random_cm_vector(std::mt19937_64& rng, int length, double amplitude) {
    std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
    CVector x(length);
    for (int i = 0; i < length; ++i) x[i] = std::polar(amplitude, phase(rng));
    return x;
}

}  // namespace dfrc
