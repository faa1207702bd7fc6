#include "eaas/gaussian.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace eaas {

namespace {

void require(bool ok, const std::string &what) {
    if (!ok) {
        throw DomainError(what);
    }
}

bool in_unit_interval(double x) {
    return x >= 0.0 && x <= 1.0;
}

/// Minimizes a unimodal function on [lo, hi] until the bracket is narrower than
/// rel_tol * max(1, |x|).
template <typename F>
double golden_section(F &&f, double lo, double hi, double rel_tol) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo;
    double b = hi;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = f(x1);
    double f2 = f(x2);
    while (b - a > rel_tol * std::max(1.0, std::abs(a))) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
    }
    return f1 <= f2 ? x1 : x2;
}

/// Standard-form covariance written as TMS(r) [nu1 I + nu2 I] TMS(r)^T.
struct Williamson {
    double nu1;  // signal-side symplectic eigenvalue
    double nu2;  // idler-side symplectic eigenvalue
    double ch2;  // cosh(r)^2
    double sh2;  // sinh(r)^2
    double chsh; // cosh(r) sinh(r), signed like c
};

Williamson williamson(const TwoModeState &st) {
    const double sum = st.e() + st.s();
    const double r = std::sqrt(std::max(0.0, (sum - 2 * st.c()) * (sum + 2 * st.c())));
    Williamson w;
    w.nu1 = std::max(1.0, (st.e() - st.s() + r) / 2);
    w.nu2 = std::max(1.0, (st.s() - st.e() + r) / 2);
    const double cosh2r = sum / r;
    w.ch2 = (cosh2r + 1) / 2;
    w.sh2 = (cosh2r - 1) / 2;
    w.chsh = st.c() / r;
    return w;
}

constexpr double kPureTol = 1e-12;

/// log G_p(x) with G_p(x) = 2^p / ((x+1)^p - (x-1)^p); zero for a pure mode.
double log_g(double p, double x) {
    if (x <= 1.0 + kPureTol) {
        return 0.0;
    }
    const double l = std::log1p(2.0 / (x - 1.0));
    return p * std::numbers::ln2 - p * std::log(x - 1.0) - std::log(std::expm1(p * l));
}

/// Lambda_p(x) = ((x+1)^p + (x-1)^p) / ((x+1)^p - (x-1)^p) = coth(p L / 2).
double big_lambda(double p, double x) {
    if (x <= 1.0 + kPureTol) {
        return 1.0;
    }
    const double l = std::log1p(2.0 / (x - 1.0));
    return 1.0 / std::tanh(p * l / 2.0);
}

struct Block {
    double e;
    double s;
    double c;
    double det;  // e s - c^2, computed without cancellation
};

Block powered_block(const Williamson &w, double p) {
    const double l1 = big_lambda(p, w.nu1);
    const double l2 = big_lambda(p, w.nu2);
    return {w.ch2 * l1 + w.sh2 * l2, w.sh2 * l1 + w.ch2 * l2, w.chsh * (l1 + l2), l1 * l2};
}

double log_overlap(const Williamson &a, const Williamson &b, double s) {
    const Block ba = powered_block(a, s);
    const Block bb = powered_block(b, 1.0 - s);
    const double det = ba.det + bb.det + ba.e * bb.s + bb.e * ba.s - 2.0 * ba.c * bb.c;
    return std::log(4.0) + log_g(s, a.nu1) + log_g(s, a.nu2) + log_g(1.0 - s, b.nu1) +
           log_g(1.0 - s, b.nu2) - std::log(det);
}

}  // namespace

SourceParams::SourceParams(double n_s, std::uint64_t m_copies) : n_s(n_s), m_copies(m_copies) {
    require(std::isfinite(n_s) && n_s >= 0.0, "n_s must be >= 0");
    require(m_copies >= 1, "m_copies must be >= 1");
}

ChannelEnv::ChannelEnv(double n_b, double kappa_i) : n_b(n_b), kappa_i(kappa_i) {
    require(std::isfinite(n_b) && n_b >= 0.0, "n_b must be >= 0");
    require(in_unit_interval(kappa_i), "kappa_i must lie in [0, 1]");
}

Gain::Gain(double g) : g(g) {
    require(std::isfinite(g) && g >= 1.0, "gain must be >= 1");
}

SymplecticSpectrum symplectic_eigenvalues(double e, double s, double c) {
    const double sum = e + s;
    const double disc = (sum - 2 * c) * (sum + 2 * c);
    if (!(disc >= 0.0) || !std::isfinite(disc)) {
        return {0.0, 0.0, false};
    }
    const double r = std::sqrt(disc);
    const double skew = std::abs(e - s);
    SymplecticSpectrum out{(r - skew) / 2, (r + skew) / 2, false};
    out.physical = out.nu_minus >= 1.0 - kPhysicalityTol;
    return out;
}

SymplecticSpectrum symplectic_eigenvalues(const TwoModeState &state) {
    return symplectic_eigenvalues(state.e(), state.s(), state.c());
}

TwoModeState::TwoModeState(double e, double s, double c) : e_(e), s_(s), c_(c) {
    require(std::isfinite(e) && std::isfinite(s) && std::isfinite(c), "state entries must be finite");
    require(e >= 1.0 - kPhysicalityTol && s >= 1.0 - kPhysicalityTol,
            "marginal variances below vacuum: e=" + std::to_string(e) + " s=" + std::to_string(s));
    require(symplectic_eigenvalues(e, s, c).physical,
            "symplectic eigenvalue below 1: e=" + std::to_string(e) + " s=" + std::to_string(s) +
                " c=" + std::to_string(c));
}

TwoModeState tmsv_state(double n_s) {
    require(std::isfinite(n_s) && n_s >= 0.0, "n_s must be >= 0");
    const double v = 2 * n_s + 1;
    return {v, v, 2 * std::sqrt(n_s * (n_s + 1))};
}

TwoModeState return_state(double n_s, double kappa_s, const ChannelEnv &env) {
    require(std::isfinite(n_s) && n_s >= 0.0, "n_s must be >= 0");
    require(in_unit_interval(kappa_s), "kappa_s must lie in [0, 1]");
    const double e = 2 * (kappa_s * n_s + env.n_b) + 1;
    const double s = 2 * env.kappa_i * n_s + 1;
    const double c = 2 * std::sqrt(kappa_s * env.kappa_i * n_s * (1 + n_s));
    return {e, s, c};
}

TwoModeState apply_opa(const TwoModeState &st, Gain gain) {
    const double g = gain.g;
    const double gh = std::sqrt(g * (g - 1));
    const double e = g * st.e() - 2 * gh * st.c() + (g - 1) * st.s();
    const double s = (g - 1) * st.e() - 2 * gh * st.c() + g * st.s();
    const double c = (2 * g - 1) * st.c() - gh * (st.e() + st.s());
    return {e, s, c};
}

TwoModeState apply_inverse_opa(const TwoModeState &st, Gain gain) {
    const double g = gain.g;
    const double gh = std::sqrt(g * (g - 1));
    const double e = g * st.e() + 2 * gh * st.c() + (g - 1) * st.s();
    const double s = (g - 1) * st.e() + 2 * gh * st.c() + g * st.s();
    const double c = (2 * g - 1) * st.c() + gh * (st.e() + st.s());
    return {e, s, c};
}

TwoModeState opa_output(double n_s, double kappa_s, const ChannelEnv &env, Gain gain) {
    return apply_opa(return_state(n_s, kappa_s, env), gain);
}

Gain nulling_gain(double n_s, double kappa_b) {
    require(std::isfinite(n_s) && n_s >= 0.0, "n_s must be >= 0");
    require(in_unit_interval(kappa_b), "kappa_b must lie in [0, 1]");
    return Gain(1.0 + n_s * kappa_b / (1.0 + n_s * (1.0 - kappa_b)));
}

Gain min_signal_gain(double n_s, double kappa_s, const ChannelEnv &env) {
    const TwoModeState ret = return_state(n_s, kappa_s, env);
    if (n_s == 0.0) {
        return Gain(1.0);
    }
    // (E - 1)/2 along the gain axis, evaluated without constructing states.
    auto occupation = [&](double g) {
        const double gh = std::sqrt(g * (g - 1));
        return (g * ret.e() - 2 * gh * ret.c() + (g - 1) * ret.s() - 1.0) / 2.0;
    };
    const double hi = 1.0 + 10.0 * n_s;
    double g = golden_section(occupation, 1.0, hi, 1e-10);
    // The occupation is flat at its minimum, so function values alone pin the
    // location only to ~sqrt(eps). Polish with bisection on the derivative.
    auto slope = [&](double x) {
        return ret.e() + ret.s() - ret.c() * (2 * x - 1) / std::sqrt(x * (x - 1));
    };
    double lo_b = std::max(1.0 + 1e-300, g * (1 - 1e-6));
    double hi_b = std::min(hi, g * (1 + 1e-6));
    if (lo_b < hi_b && slope(lo_b) < 0.0 && slope(hi_b) > 0.0) {
        for (int i = 0; i < 100 && hi_b - lo_b > 1e-15 * hi_b; ++i) {
            const double mid = 0.5 * (lo_b + hi_b);
            (slope(mid) < 0.0 ? lo_b : hi_b) = mid;
        }
        g = 0.5 * (lo_b + hi_b);
    }
    return Gain(g);
}

double chernoff_overlap(const TwoModeState &rho, const TwoModeState &sigma, double s) {
    if (!(s > 0.0 && s < 1.0)) {
        throw DomainError("chernoff_overlap: s must lie in (0, 1)");
    }
    return std::exp(log_overlap(williamson(rho), williamson(sigma), s));
}

ChernoffBound qcb(const TwoModeState &state_t, const TwoModeState &state_b, std::uint64_t m_copies) {
    require(m_copies >= 1, "m_copies must be >= 1");
    const Williamson wt = williamson(state_t);
    const Williamson wb = williamson(state_b);
    constexpr double kEdge = 1e-12;
    auto f = [&](double s) {
        return log_overlap(wt, wb, s);
    };
    // log Tr rho^s sigma^(1-s) is convex in s, so golden section finds the infimum.
    const double s_star = golden_section(f, kEdge, 1.0 - kEdge, 1e-10);
    const double log_q = std::min(0.0, f(s_star));
    ChernoffBound out;
    out.q_tilde = std::exp(log_q);
    out.s_star = s_star;
    out.bound = 0.5 * std::exp(static_cast<double>(m_copies) * log_q);
    return out;
}

}  // namespace eaas
