#include "dfrc/waveform_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace dfrc {

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw std::invalid_argument("not a number: '" + std::string(s) + "'");
    return v;
}

void write_waveform(std::ostream& out, const WaveformMatrix& w) {
    out << "dfrc-waveform n_tx=" << w.n_tx() << " block_length=" << w.block_length()
        << " p_total=" << format_double(w.p_total()) << " constant_modulus=" << (w.constant_modulus() ? 1 : 0)
        << '\n';
    const CMatrix& e = w.entries();
    for (Eigen::Index n = 0; n < e.rows(); ++n) {
        for (Eigen::Index l = 0; l < e.cols(); ++l) {
            if (l) out << ',';
            out << format_double(e(n, l).real()) << ':' << format_double(e(n, l).imag());
        }
        out << '\n';
    }
}

namespace {

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    for (;;) {
        const auto pos = s.find(sep, start);
        parts.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return parts;
}

int parse_positive_int(const std::string& src, int line, const std::string& field, const std::string& text) {
    int v = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size() || v < 1)
        throw ParseError(src, line, field, "expected a positive integer, got '" + text + "'");
    return v;
}

}  // namespace

WaveformMatrix read_waveform(std::istream& in, const std::string& source_name) {
    std::string header;
    if (!std::getline(in, header)) throw ParseError(source_name, 1, "header", "missing header line");
    if (!header.empty() && header.back() == '\r') header.pop_back();

    std::istringstream hs(header);
    std::string magic;
    hs >> magic;
    if (magic != "dfrc-waveform") throw ParseError(source_name, 1, "header", "expected 'dfrc-waveform' tag");
    std::map<std::string, std::string> kv;
    for (std::string tok; hs >> tok;) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) throw ParseError(source_name, 1, tok, "expected key=value");
        kv[tok.substr(0, eq)] = tok.substr(eq + 1);
    }
    for (const char* key : {"n_tx", "block_length", "p_total"})
        if (!kv.count(key)) throw ParseError(source_name, 1, key, "missing header field");

    const int n_tx = parse_positive_int(source_name, 1, "n_tx", kv["n_tx"]);
    const int block_length = parse_positive_int(source_name, 1, "block_length", kv["block_length"]);
    double p_total = 0.0;
    try {
        p_total = parse_double(kv["p_total"]);
    } catch (const std::invalid_argument& e) {
        throw ParseError(source_name, 1, "p_total", e.what());
    }
    if (!(p_total > 0.0)) throw ParseError(source_name, 1, "p_total", "must be > 0");
    bool cm = false;
    if (kv.count("constant_modulus")) {
        const auto& f = kv["constant_modulus"];
        if (f != "0" && f != "1") throw ParseError(source_name, 1, "constant_modulus", "expected 0 or 1");
        cm = f == "1";
    }

    CMatrix e(n_tx, block_length);
    std::string row;
    for (int n = 0; n < n_tx; ++n) {
        const int line_no = n + 2;
        if (!std::getline(in, row)) throw ParseError(source_name, line_no, "row " + std::to_string(n + 1), "missing row");
        if (!row.empty() && row.back() == '\r') row.pop_back();
        const auto cells = split(row, ',');
        if (static_cast<int>(cells.size()) != block_length)
            throw ParseError(source_name, line_no, "row " + std::to_string(n + 1),
                             "expected " + std::to_string(block_length) + " columns, got " +
                                 std::to_string(cells.size()));
        for (int l = 0; l < block_length; ++l) {
            const std::string field = "row " + std::to_string(n + 1) + " column " + std::to_string(l + 1);
            const auto parts = split(cells[l], ':');
            if (parts.size() != 2) throw ParseError(source_name, line_no, field, "expected re:im pair");
            try {
                e(n, l) = cd(parse_double(parts[0]), parse_double(parts[1]));
            } catch (const std::invalid_argument& ex) {
                throw ParseError(source_name, line_no, field, ex.what());
            }
        }
    }
    for (int line_no = n_tx + 2; std::getline(in, row); ++line_no) {
        if (row.find_first_not_of(" \t\r") != std::string::npos)
            throw ParseError(source_name, line_no, "trailer", "unexpected content after the last row");
    }

    WaveformMatrix w(std::move(e), p_total, cm);
    if (cm && w.modulus_error() > kModulusTolerance)
        throw ParseError(source_name, 1, "constant_modulus",
                         "flagged constant-modulus but max | |x_n| - sqrt(P_T/N_T) | = " +
                             format_double(w.modulus_error()));
    return w;
}

void save_waveform(const WaveformMatrix& w, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    write_waveform(out, w);
    if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

WaveformMatrix load_waveform(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "' for reading");
    return read_waveform(in, path.string());
}

}  // namespace dfrc
