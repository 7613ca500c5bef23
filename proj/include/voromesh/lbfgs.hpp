#pragma once

// Limited-memory BFGS with strong Wolfe line search, structured for a driver
// that takes one quasi-Newton iteration per outer loop while the objective's
// weights change between iterations: the caller supplies f and grad at the
// current iterate, evaluated under the current weights.

#include <cmath>
#include <deque>
#include <functional>
#include <vector>

namespace voromesh {

struct LbfgsOptions {
    int memory = 7;
    double c1 = 1e-4;         // sufficient decrease
    double c2 = 0.9;          // curvature
    int max_line_search = 20; // function evaluations per step
};

struct LbfgsStepStatus {
    bool line_search_failed = false;   // both directions failed; x unchanged
    bool steepest_restart = false;     // quasi-Newton direction was abandoned
    bool armijo_only = false;          // curvature condition given up this step
    double fx = 0.0;                   // objective at the new iterate
    double step = 0.0;
};

class LbfgsSolver {
public:
    // Evaluates the objective and gradient at x.
    using Objective = std::function<double(const std::vector<double>&, std::vector<double>&)>;

    explicit LbfgsSolver(LbfgsOptions opts = {}) : opts_(opts) {}

    void reset() { pairs_.clear(); first_ = true; }

    // One iteration from x with f(x), grad(x) given; updates x on success.
    LbfgsStepStatus step(const Objective& f, std::vector<double>& x, double fx,
                         const std::vector<double>& gx) {
        const size_t n = x.size();
        LbfgsStepStatus st;
        st.fx = fx;

        std::vector<double> dir = direction(gx);
        double d0 = dot(dir, gx);
        if (d0 >= 0.0) {  // not a descent direction; fall back
            st.steepest_restart = true;
            pairs_.clear();
            for (size_t k = 0; k < n; ++k) dir[k] = -gx[k];
            d0 = dot(dir, gx);
        }
        if (d0 == 0.0) {  // zero gradient; nothing to do
            st.step = 0.0;
            return st;
        }

        double alpha0 = first_ ? std::min(1.0, 1.0 / std::sqrt(-d0)) : 1.0;
        std::vector<double> g_new(n);
        auto result = wolfe_search(f, x, fx, dir, d0, alpha0, g_new);
        if (!result.ok && !st.steepest_restart) {
            // Restart from steepest descent once.
            st.steepest_restart = true;
            pairs_.clear();
            for (size_t k = 0; k < n; ++k) dir[k] = -gx[k];
            d0 = dot(dir, gx);
            alpha0 = std::min(1.0, 1.0 / std::sqrt(-d0));
            result = wolfe_search(f, x, fx, dir, d0, alpha0, g_new);
        }
        if (!result.ok) {
            st.line_search_failed = true;
            return st;
        }
        st.armijo_only = result.armijo_only;

        Pair p;
        p.s.resize(n);
        p.y.resize(n);
        for (size_t k = 0; k < n; ++k) {
            p.s[k] = result.alpha * dir[k];
            x[k] += p.s[k];
            p.y[k] = g_new[k] - gx[k];
        }
        double sy = dot(p.s, p.y);
        if (sy > 1e-12 * std::sqrt(dot(p.s, p.s)) * std::sqrt(dot(p.y, p.y))) {
            p.rho = 1.0 / sy;
            pairs_.push_back(std::move(p));
            while (static_cast<int>(pairs_.size()) > opts_.memory) pairs_.pop_front();
        }
        first_ = false;
        st.fx = result.f;
        st.step = result.alpha;
        return st;
    }

private:
    struct Pair {
        std::vector<double> s, y;
        double rho = 0.0;
    };

    static double dot(const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0.0;
        for (size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
        return s;
    }

    // Two-loop recursion.
    std::vector<double> direction(const std::vector<double>& g) const {
        std::vector<double> q = g;
        std::vector<double> a(pairs_.size());
        for (int i = static_cast<int>(pairs_.size()) - 1; i >= 0; --i) {
            a[i] = pairs_[i].rho * dot(pairs_[i].s, q);
            for (size_t k = 0; k < q.size(); ++k) q[k] -= a[i] * pairs_[i].y[k];
        }
        if (!pairs_.empty()) {
            const Pair& last = pairs_.back();
            double gamma = dot(last.s, last.y) / dot(last.y, last.y);
            for (double& v : q) v *= gamma;
        }
        for (size_t i = 0; i < pairs_.size(); ++i) {
            double b = pairs_[i].rho * dot(pairs_[i].y, q);
            for (size_t k = 0; k < q.size(); ++k) q[k] += (a[i] - b) * pairs_[i].s[k];
        }
        for (double& v : q) v = -v;
        return q;
    }

    struct SearchResult {
        bool ok = false;
        bool armijo_only = false;
        double alpha = 0.0, f = 0.0;
    };

    // Strong Wolfe line search (bracket + zoom). On success g_out holds the
    // gradient at the accepted point.
    SearchResult wolfe_search(const Objective& f, const std::vector<double>& x, double f0,
                              const std::vector<double>& dir, double d0, double alpha0,
                              std::vector<double>& g_out) {
        const size_t n = x.size();
        int evals_left = opts_.max_line_search;
        std::vector<double> xt(n);
        double last_alpha = -1.0;
        auto phi = [&](double alpha, double& dphi) {
            for (size_t k = 0; k < n; ++k) xt[k] = x[k] + alpha * dir[k];
            double v = f(xt, g_out);
            dphi = dot(g_out, dir);
            last_alpha = alpha;
            --evals_left;
            return v;
        };

        auto zoom = [&](double lo, double flo, double dlo, double hi, double fhi) -> SearchResult {
            (void)fhi;
            while (evals_left > 0) {
                double a = 0.5 * (lo + hi);
                double da;
                double fa = phi(a, da);
                if (fa > f0 + opts_.c1 * a * d0 || fa >= flo) {
                    hi = a;
                } else {
                    if (std::fabs(da) <= -opts_.c2 * d0) return {true, false, a, fa};
                    if (da * (hi - lo) >= 0.0) hi = lo;
                    lo = a;
                    flo = fa;
                    dlo = da;
                }
                if (std::fabs(hi - lo) < 1e-16 * std::max(1.0, std::fabs(lo))) break;
            }
            (void)dlo;
            return {};
        };

        double a_prev = 0.0, f_prev = f0, d_prev = d0;
        double a = alpha0;
        SearchResult res;
        bool first = true;
        while (evals_left > 0) {
            double da;
            double fa = phi(a, da);
            if (fa > f0 + opts_.c1 * a * d0 || (!first && fa >= f_prev)) {
                res = zoom(a_prev, f_prev, d_prev, a, fa);
                break;
            }
            if (std::fabs(da) <= -opts_.c2 * d0) {
                res = {true, false, a, fa};
                break;
            }
            if (da >= 0.0) {
                res = zoom(a, fa, da, a_prev, f_prev);
                break;
            }
            a_prev = a;
            f_prev = fa;
            d_prev = da;
            a *= 2.0;
            first = false;
        }
        // The objective is only piecewise smooth (sites cross creases, cell
        // combinatorics change), so the curvature condition can be
        // unsatisfiable. Fall back to plain backtracking on the sufficient
        // decrease condition alone.
        if (!res.ok) {
            evals_left = opts_.max_line_search;
            double a_bt = alpha0;
            while (evals_left > 0) {
                double da;
                double fa = phi(a_bt, da);
                if (fa <= f0 + opts_.c1 * a_bt * d0) {
                    res = {true, true, a_bt, fa};
                    break;
                }
                a_bt *= 0.5;
            }
        }
        if (res.ok && last_alpha != res.alpha) {
            double da;
            res.f = phi(res.alpha, da);  // leave g_out at the accepted point
        }
        return res;
    }

    LbfgsOptions opts_;
    std::deque<Pair> pairs_;
    bool first_ = true;
};

} // namespace voromesh
