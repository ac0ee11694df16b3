#pragma once

// Shared domain types for constant-modulus DFRC waveform design.
//
// Conventions used throughout the library:
//  * A waveform block X is N_T x L (antennas x time samples). Its
//    vectorization x = vec(X) stacks the columns x_1..x_L, so entry
//    (n, l) of X lives at x[l * N_T + n].
//  * Angles are carried in degrees at every public interface and converted
//    to radians only where a trigonometric function is evaluated.

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dfrc {

using cd = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

inline constexpr double kPi = 3.14159265358979323846;

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }

/// Raised when a computation would exceed a documented size cap.
class CapacityError : public std::length_error {
public:
    using std::length_error::length_error;
};

/// Malformed input file. Carries the 1-based line number and the offending field.
class ParseError : public std::runtime_error {
public:
    ParseError(std::string file, int line, std::string field, const std::string& what);

    int line() const noexcept { return line_; }
    const std::string& field() const noexcept { return field_; }

private:
    int line_;
    std::string field_;
};

// |a - b| <= tol * max(1, |a|, |b|)
bool rel_close(double a, double b, double tol);

/// Compensated (Kahan-Babuska) accumulator for long real sums.
class KahanSum {
public:
    void add(double v);
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

// --------------------------------------------------------------------------
// Array and waveform
// --------------------------------------------------------------------------

class ArrayGeometry {
public:
    explicit ArrayGeometry(int n_tx, double spacing = 0.5);

    int n_tx() const { return n_tx_; }
    /// Element spacing in wavelengths.
    double spacing() const { return spacing_; }

private:
    int n_tx_;
    double spacing_;
};

/// sqrt(P_T / N_T), the per-sample modulus of a constant-modulus waveform.
double cm_amplitude(double p_total, int n_tx);

class WaveformMatrix {
public:
    WaveformMatrix(CMatrix entries, double p_total, bool constant_modulus = false);

    /// Build from a column-major vector x of length n_tx * block_length.
    static WaveformMatrix from_vec(const CVector& x, int n_tx, int block_length, double p_total,
                                   bool constant_modulus = false);

    const CMatrix& entries() const { return entries_; }
    int n_tx() const { return static_cast<int>(entries_.rows()); }
    int block_length() const { return static_cast<int>(entries_.cols()); }
    double p_total() const { return p_total_; }
    bool constant_modulus() const { return constant_modulus_; }

    CVector vec() const;

    /// Largest deviation of |x_n| from sqrt(P_T / N_T).
    double modulus_error() const;

private:
    CMatrix entries_;
    double p_total_;
    bool constant_modulus_;
};

CVector vec(const CMatrix& m);
CMatrix mat(const CVector& x, int rows, int cols);

// --------------------------------------------------------------------------
// Radar scene inputs
// --------------------------------------------------------------------------

class AngleGrid {
public:
    AngleGrid(std::vector<double> angles_deg, double resolution_deg);

    /// Inclusive grid min, min + step, ..., up to max (within half a step).
    static AngleGrid uniform(double min_deg, double max_deg, double step_deg);

    const std::vector<double>& angles_deg() const { return angles_; }
    double resolution_deg() const { return resolution_; }
    std::size_t size() const { return angles_.size(); }

private:
    std::vector<double> angles_;
    double resolution_;
};

class DesiredBeamPattern {
public:
    DesiredBeamPattern(const AngleGrid& grid, std::vector<double> values);

    /// 1 inside [theta_q - width/2, theta_q + width/2] for some target q, 0 elsewhere.
    static DesiredBeamPattern rectangular(const AngleGrid& grid, const std::vector<double>& targets_deg,
                                          double beam_width_deg);

    const std::vector<double>& values() const { return values_; }

private:
    std::vector<double> values_;
};

class TargetSet {
public:
    TargetSet(std::vector<double> angles_deg, int max_lag);

    const std::vector<double>& angles_deg() const { return angles_; }
    int size() const { return static_cast<int>(angles_.size()); }
    /// P; lags tau range over [-P + 1, P - 1].
    int max_lag() const { return max_lag_; }

private:
    std::vector<double> angles_;
    int max_lag_;
};

class Weights {
public:
    Weights(double bp, double ac, double cc);

    double bp() const { return bp_; }
    double ac() const { return ac_; }
    double cc() const { return cc_; }

private:
    double bp_, ac_, cc_;
};

// --------------------------------------------------------------------------
// Solver configuration
// --------------------------------------------------------------------------

enum class MajorizerKind { diagonal, max_eigen };
enum class SolveMode { dfrc, radar_only };

std::string_view to_string(MajorizerKind k);
std::string_view to_string(SolveMode m);
MajorizerKind parse_majorizer_kind(std::string_view s);
SolveMode parse_solve_mode(std::string_view s);

struct SolverConfig {
    double eps1 = 1e-4;  // relative dual-value change between sweeps
    double eps2 = 1e-4;  // bisection residual band (-eps2, 0]
    double eps3 = 3e-5;  // relative objective change between MM iterations
    int max_outer_iters = 5000;
    int max_bisect_iters = 200;
    int max_sweeps = 1000;
    // Primal feasibility required of the inner dual iterate before its sweeps stop.
    double feas_tol = 1e-9;
    MajorizerKind majorizer_kind = MajorizerKind::diagonal;
    SolveMode mode = SolveMode::dfrc;
    std::uint64_t seed = 1;

    /// Throws std::invalid_argument listing the first violated invariant.
    void validate() const;
};

// --------------------------------------------------------------------------
// Deterministic randomness
// --------------------------------------------------------------------------

/// Independent random streams derived from one user seed. Each stream is an
/// mt19937_64 seeded through std::seed_seq{seed, stream}; draws are
/// reproducible for a given standard library implementation.
enum class RngStream : std::uint64_t { channels = 1, symbols = 2, init = 3, test = 99 };

std::mt19937_64 make_rng(std::uint64_t seed, RngStream stream);

/// Uniform random phases in [0, 2 pi) scaled to the constant-modulus amplitude.
CVector random_cm_vector(std::mt19937_64& rng, int length, double amplitude);

}  // namespace dfrc
