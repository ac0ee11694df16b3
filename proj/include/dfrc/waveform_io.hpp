#pragma once

// Text serialization for waveform blocks.
//
//   dfrc-waveform n_tx=<N_T> block_length=<L> p_total=<P_T> constant_modulus=<0|1>
//   <re>:<im>,<re>:<im>,...      one line per antenna, L pairs each
//
// Numbers use the shortest decimal form that round-trips to the same binary
// double, so save followed by load reproduces every entry bit-for-bit.

#include "dfrc/core.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>

namespace dfrc {

/// Tolerance applied to |x_n| when a file is flagged constant-modulus.
inline constexpr double kModulusTolerance = 1e-12;

std::string format_double(double v);
double parse_double(std::string_view s);  // throws std::invalid_argument

void write_waveform(std::ostream& out, const WaveformMatrix& w);
WaveformMatrix read_waveform(std::istream& in, const std::string& source_name = "<stream>");

void save_waveform(const WaveformMatrix& w, const std::filesystem::path& path);
WaveformMatrix load_waveform(const std::filesystem::path& path);

}  // namespace dfrc
