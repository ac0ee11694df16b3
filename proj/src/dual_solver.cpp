#include "dfrc/dual_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace dfrc {

CVector cm_phase_align(const CVector& v, double amplitude) {
    CVector x(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i)
        x[i] = v[i] == cd(0.0) ? cd(amplitude, 0.0) : std::polar(amplitude, std::arg(v[i]));
    return x;
}

namespace {

constexpr int kSafeguardSweeps = 20;

// Cached per-constraint data for residual evaluations restricted to one block.
class BlockView {
public:
    BlockView(const CIConstraintSet& set, const CVector& d) : set_(set), d_(d) {
        rows_.reserve(set.size());
        for (int m = 0; m < set.size(); ++m) rows_.push_back(set.block_row(m));
    }

    // sum_{m' in block} nu_m' h~_m' - d restricted to block `l`, with nu_m replaced by `value` when m >= 0.
    CVector block_argument(int l, const RVector& nu, int m, double value) const {
        const int nt = set_.n_tx();
        const int K = set_.users();
        CVector z = -d_.segment(l * nt, nt);
        for (int mm = 2 * l * K; mm < 2 * (l + 1) * K; ++mm) {
            const double v = mm == m ? value : nu[mm];
            if (v != 0.0) z += v * rows_[mm].adjoint();
        }
        return z;
    }

    double residual(int m, const RVector& nu, double value, double amplitude) const {
        const int l = set_.block_of(m);
        const CVector xl = cm_phase_align(block_argument(l, nu, m, value), amplitude);
        return set_.gamma_vec()[m] - (rows_[m] * xl).value().real();
    }

    CVector full_solution(const RVector& nu, double amplitude) const {
        const int nt = set_.n_tx();
        CVector x(set_.n());
        for (int l = 0; l < set_.block_length(); ++l)
            x.segment(l * nt, nt) = cm_phase_align(block_argument(l, nu, -1, 0.0), amplitude);
        return x;
    }

private:
    const CIConstraintSet& set_;
    const CVector& d_;
    std::vector<Eigen::RowVectorXcd> rows_;
};

void require_sizes(const RVector& nu, const CVector& d, const CIConstraintSet& set) {
    if (nu.size() != set.size()) throw std::invalid_argument("multiplier vector length differs from 2KL");
    if (d.size() != set.n()) throw std::invalid_argument("surrogate vector length differs from N");
}

}  // namespace

CVector solve_inner(const RVector& nu, const CVector& d, const CIConstraintSet& constraints, double amplitude) {
    require_sizes(nu, d, constraints);
    for (Eigen::Index m = 0; m < nu.size(); ++m)
        if (!(nu[m] >= 0.0)) throw std::invalid_argument("solve_inner: multipliers must be nonnegative");
    return BlockView(constraints, d).full_solution(nu, amplitude);
}

RVector constraint_values(const CVector& x, const CIConstraintSet& constraints) {
    return -ci_margin(x, constraints);
}

double lagrangian(const CVector& x, const RVector& nu, const CVector& d, const CIConstraintSet& constraints) {
    return x.dot(d).real() + nu.dot(constraint_values(x, constraints));
}

BisectOutcome bisect_residual(const std::function<double(double)>& residual, double eps2, int max_iters) {
    BisectOutcome out;
    auto g = [&](double v) {
        ++out.evaluations;
        return residual(v);
    };
    if (g(0.0) <= 0.0) {
        out.nu = 0.0;
        return out;
    }
    double lo = 0.0;
    double hi = 1.0;
    if (g(hi) > 0.0) {
        int doublings = 0;
        do {
            hi *= 2.0;
            if (++doublings > max_iters) {
                out.nu = hi;
                out.bracketed = false;
                out.met_stop_rule = false;
                return out;
            }
        } while (g(hi) > 0.0);
        lo = hi / 2.0;
    }
    for (int it = 0; it < max_iters; ++it) {
        const double mid = (lo + hi) / 2.0;
        const double gm = g(mid);
        if (gm > 0.0)
            lo = mid;
        else
            hi = mid;
        if (std::abs(gm + eps2 / 2.0) < eps2 / 2.0) {
            out.nu = mid;
            return out;
        }
    }
    // hi always carries a nonpositive residual.
    out.nu = hi;
    out.met_stop_rule = false;
    return out;
}

BisectOutcome bisect_multiplier(int m, const RVector& nu, const CVector& d, const CIConstraintSet& constraints,
                                double amplitude, const SolverConfig& cfg) {
    require_sizes(nu, d, constraints);
    const BlockView view(constraints, d);
    return bisect_residual([&](double v) { return view.residual(m, nu, v, amplitude); }, cfg.eps2,
                           cfg.max_bisect_iters);
}

KktReport kkt_report(const CVector& x, const RVector& nu, const CIConstraintSet& constraints) {
    const RVector g = constraint_values(x, constraints);
    KktReport r;
    for (Eigen::Index m = 0; m < g.size(); ++m) {
        r.complementarity = std::max(r.complementarity, std::min(nu[m], -g[m]));
        r.max_violation = std::max(r.max_violation, g[m]);
    }
    return r;
}

DualResult dual_ascent(const RVector& nu0, const CVector& d, const CIConstraintSet& constraints, double amplitude,
                       const SolverConfig& cfg) {
    require_sizes(nu0, d, constraints);
    const BlockView view(constraints, d);
    DualResult res;
    res.nu = nu0;
    std::vector<bool> unbracketed(constraints.size(), false);
    double previous = std::numeric_limits<double>::infinity();

    for (int sweep = 0; sweep < cfg.max_sweeps; ++sweep) {
        bool changed = false;
        for (int m = 0; m < constraints.size(); ++m) {
            const BisectOutcome b = bisect_residual(
                [&](double v) { return view.residual(m, res.nu, v, amplitude); }, cfg.eps2, cfg.max_bisect_iters);
            res.evaluations += b.evaluations;
            if (!b.bracketed) unbracketed[m] = true;
            if (b.nu != res.nu[m]) changed = true;
            res.nu[m] = b.nu;
        }
        ++res.sweeps;
        res.x = view.full_solution(res.nu, amplitude);
        const double ghat = lagrangian(res.x, res.nu, d, constraints);
        res.dual_trace.push_back(ghat);

        const KktReport kkt = kkt_report(res.x, res.nu, constraints);
        const bool kkt_ok = kkt.max_violation <= cfg.feas_tol && kkt.complementarity <= cfg.eps2;
        const double rel = std::abs(ghat - previous) / std::abs(previous);
        if (!changed) {
            res.converged = kkt_ok;
            break;
        }
        if (rel < cfg.eps1 && kkt_ok) {
            res.converged = true;
            break;
        }
        previous = ghat;
    }
    for (int m = 0; m < constraints.size(); ++m)
        if (unbracketed[m]) res.unbracketed.push_back(m);
    return res;
}

CVector phase_descent(const CVector& x, const CVector& d, const CIConstraintSet& constraints, double amplitude,
                      int sweeps, double feas_tol) {
    if (x.size() != constraints.n() || d.size() != constraints.n())
        throw std::invalid_argument("phase_descent: vector length differs from N");
    const int nt = constraints.n_tx();
    const int K = constraints.users();
    const int rows_per_block = 2 * K;
    CVector out = x;
    for (int l = 0; l < constraints.block_length(); ++l) {
        const int first = l * rows_per_block;
        CMatrix rows(rows_per_block, nt);
        RVector gamma(rows_per_block);
        for (int i = 0; i < rows_per_block; ++i) {
            rows.row(i) = constraints.block_row(first + i);
            gamma[i] = constraints.gamma_vec()[first + i];
        }
        auto block = out.segment(l * nt, nt);
        // Re{h~_m^H x_l}, updated incrementally
        CVector reach = rows * block;

        // Restoration: raise the smallest margin of the block one entry at a time.
        auto min_margin = [&](const CVector& r) {
            double v = std::numeric_limits<double>::infinity();
            for (int i = 0; i < rows_per_block; ++i) v = std::min(v, r[i].real() - gamma[i]);
            return v;
        };
        for (int sweep = 0; sweep < sweeps && min_margin(reach) < -feas_tol; ++sweep) {
            for (int n = 0; n < nt; ++n) {
                const cd current = block[n];
                // margin_i(phi) = a_i cos(phi + b_i) - c_i; the maximin sits at a peak or a crossing
                std::vector<double> a(rows_per_block), b(rows_per_block), c(rows_per_block);
                for (int i = 0; i < rows_per_block; ++i) {
                    const cd r = rows(i, n);
                    a[i] = amplitude * std::abs(r);
                    b[i] = std::arg(r);
                    c[i] = gamma[i] - (reach[i] - r * current).real();
                }
                std::vector<double> phases{std::arg(current)};
                for (int i = 0; i < rows_per_block; ++i) {
                    phases.push_back(-b[i]);
                    for (int j = i + 1; j < rows_per_block; ++j) {
                        // P cos(phi) + Q sin(phi) = R
                        const double P = a[i] * std::cos(b[i]) - a[j] * std::cos(b[j]);
                        const double Q = -a[i] * std::sin(b[i]) + a[j] * std::sin(b[j]);
                        const double R = c[i] - c[j];
                        const double norm = std::hypot(P, Q);
                        if (norm == 0.0 || std::abs(R) > norm) continue;
                        const double base = std::atan2(Q, P);
                        const double off = std::acos(R / norm);
                        phases.push_back(base + off);
                        phases.push_back(base - off);
                    }
                }
                auto worst = [&](double phi) {
                    double v = std::numeric_limits<double>::infinity();
                    for (int i = 0; i < rows_per_block; ++i) v = std::min(v, a[i] * std::cos(phi + b[i]) - c[i]);
                    return v;
                };
                double best_phi = phases.front();
                double best_val = worst(best_phi);
                for (double phi : phases) {
                    const double v = worst(phi);
                    if (v > best_val) {
                        best_val = v;
                        best_phi = phi;
                    }
                }
                const cd best = std::polar(amplitude, best_phi);
                if (best_phi != phases.front()) {
                    reach += rows.col(n) * (best - current);
                    block[n] = best;
                }
            }
        }
        RVector cap(rows_per_block);
        for (int i = 0; i < rows_per_block; ++i) cap[i] = std::max(gamma[i] - reach[i].real(), 0.0);

        for (int sweep = 0; sweep < sweeps; ++sweep) {
            for (int n = 0; n < nt; ++n) {
                const int idx = l * nt + n;
                const cd current = block[n];
                std::vector<double> phases{std::arg(current), std::arg(-d[idx])};
                for (int i = 0; i < rows_per_block; ++i) {
                    // amp |r| cos(phi + arg r) >= gamma - rest
                    const cd r = rows(i, n);
                    const double rest = reach[i].real() - (r * current).real();
                    const double scale = amplitude * std::abs(r);
                    if (scale == 0.0) continue;
                    const double c = (gamma[i] - rest) / scale;
                    if (c <= -1.0 || c >= 1.0) continue;
                    const double half = std::acos(c);
                    phases.push_back(half - std::arg(r));
                    phases.push_back(-half - std::arg(r));
                }
                double best_cost = (std::conj(current) * d[idx]).real();
                cd best = current;
                for (double phi : phases) {
                    const cd cand = std::polar(amplitude, phi);
                    const double cost = (std::conj(cand) * d[idx]).real();
                    if (cost >= best_cost) continue;
                    bool ok = true;
                    for (int i = 0; i < rows_per_block && ok; ++i) {
                        const double g = gamma[i] - (reach[i] + rows(i, n) * (cand - current)).real();
                        ok = g <= cap[i] + 1e-14;
                    }
                    if (ok) {
                        best_cost = cost;
                        best = cand;
                    }
                }
                if (best != current) {
                    reach += rows.col(n) * (best - current);
                    block[n] = best;
                }
            }
        }
    }
    return out;
}

std::string_view to_string(Termination t) {
    switch (t) {
        case Termination::converged: return "converged";
        case Termination::max_iters: return "max_iters";
        case Termination::infeasible_warning: return "infeasible_warning";
        case Termination::non_finite: return "non_finite";
    }
    return "unknown";
}

CVector default_initial_point(const RadarScene& scene, double p_total, std::uint64_t seed) {
    auto rng = make_rng(seed, RngStream::init);
    return random_cm_vector(rng, scene.n(), cm_amplitude(p_total, scene.n_tx()));
}

SolverState mm_solve(const RadarScene& scene, const CIConstraintSet* constraints, const Weights& weights,
                     const SolverConfig& cfg, const CVector& x0, double p_total) {
    cfg.validate();
    const bool dfrc_mode = cfg.mode == SolveMode::dfrc;
    if (dfrc_mode && constraints == nullptr) throw std::invalid_argument("mm_solve: dfrc mode requires constraints");
    if (x0.size() != scene.n()) throw std::invalid_argument("mm_solve: x0 length differs from L*N_T");
    if (dfrc_mode && constraints->n() != scene.n())
        throw std::invalid_argument("mm_solve: constraint set dimension differs from L*N_T");
    const double amp = cm_amplitude(p_total, scene.n_tx());
    if ((x0.array().abs() - amp).abs().maxCoeff() > 1e-12)
        throw std::invalid_argument("mm_solve: x0 is not constant-modulus with amplitude sqrt(P_T/N_T)");

    SolverState st;
    st.x = x0;
    st.initial_objective = total_objective(x0, scene, weights);
    bool infeasible = false;

    if (dfrc_mode) {
        st.nu = RVector::Zero(constraints->size());
        for (const auto& w : constraints->warnings()) {
            st.warnings.push_back("constraint " + std::to_string(w.row + 1) + ": " + w.message);
            infeasible = true;
        }
        for (int m : strictly_infeasible_rows(*constraints, amp)) {
            st.warnings.push_back("constraint " + std::to_string(m + 1) +
                                  " is not strictly feasible for any constant-modulus block");
            infeasible = true;
        }
    }

    const MajorizerContext ctx(scene, weights, cfg.majorizer_kind);
    std::vector<bool> reported(dfrc_mode ? constraints->size() : 0, false);

    for (int t = 1; t <= cfg.max_outer_iters; ++t) {
        const CMatrix phi = build_phi(st.x, ctx);
        const SurrogateLinear lin = build_d(st.x, phi, cfg.majorizer_kind);

        if (dfrc_mode) {
            DualResult dual = dual_ascent(st.nu, lin.d, *constraints, amp, cfg);
            st.sweeps += dual.sweeps;
            st.bisection_evaluations += dual.evaluations;
            st.dual_trace.insert(st.dual_trace.end(), dual.dual_trace.begin(), dual.dual_trace.end());
            for (int m : dual.unbracketed) {
                if (!reported[m]) {
                    st.warnings.push_back("constraint " + std::to_string(m + 1) +
                                          ": multiplier doubling did not bracket a root");
                    reported[m] = true;
                }
                infeasible = true;
            }
            st.nu = std::move(dual.nu);
            const double violation_at_current = kkt_report(st.x, st.nu, *constraints).max_violation;
            const double violation_at_dual = kkt_report(dual.x, st.nu, *constraints).max_violation;
            const bool current_feasible = violation_at_current <= cfg.feas_tol;
            const bool dual_feasible = violation_at_dual <= cfg.feas_tol;
            const double u_current = st.x.dot(lin.d).real();
            if (dual_feasible && (!current_feasible || dual.x.dot(lin.d).real() <= u_current)) {
                st.x = std::move(dual.x);
            } else {
                ++st.safeguarded_steps;
                const CVector from_dual =
                    phase_descent(dual.x, lin.d, *constraints, amp, kSafeguardSweeps, cfg.feas_tol);
                const CVector from_current =
                    phase_descent(st.x, lin.d, *constraints, amp, kSafeguardSweeps, cfg.feas_tol);
                const bool a_ok = kkt_report(from_dual, st.nu, *constraints).max_violation <= cfg.feas_tol;
                const bool b_ok = kkt_report(from_current, st.nu, *constraints).max_violation <= cfg.feas_tol;
                const double ua = from_dual.dot(lin.d).real();
                const double ub = from_current.dot(lin.d).real();
                if (a_ok != b_ok)
                    st.x = a_ok ? from_dual : from_current;
                else if (a_ok)
                    st.x = ua <= ub ? from_dual : from_current;
                else
                    st.x = from_dual;
            }
        } else {
            st.x = cm_phase_align(-lin.d, amp);
        }

        const double g = total_objective(st.x, scene, weights);
        st.objective_trace.push_back(g);
        st.outer_iterations = t;
        if (!std::isfinite(g)) {
            st.termination = Termination::non_finite;
            st.warnings.push_back("objective became non-finite at iteration " + std::to_string(t));
            return st;
        }
        if (t >= 2) {
            const double prev = st.objective_trace[t - 2];
            if (std::abs(g - prev) <= cfg.eps3 * std::abs(prev)) {
                st.objective_converged = true;
                break;
            }
        }
    }
    if (infeasible)
        st.termination = Termination::infeasible_warning;
    else
        st.termination = st.objective_converged ? Termination::converged : Termination::max_iters;
    return st;
}

}  // namespace dfrc
