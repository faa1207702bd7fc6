#include "eaas/photon_stats.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include <boost/multiprecision/cpp_bin_float.hpp>

namespace eaas {

namespace {

/// The recursion below cancels terms of size (ch + sh)^k against results of
/// order one, so it runs in 50 significant digits.
using Real = boost::multiprecision::cpp_bin_float_50;

/// Amplitudes of a vector supported on |n_s, n_i> with n_s - n_i = d, indexed
/// by min(n_s, n_i).
struct DiagonalVector {
    long d = 0;
    std::vector<Real> amp;
};

struct Decomposition {
    double mean1;  // thermal occupation feeding the signal port
    double mean2;  // thermal occupation feeding the idler port
    double r;
};

Decomposition decompose(const TwoModeState &st) {
    const double sum = st.e() + st.s();
    const double root = std::sqrt(std::max(0.0, sum * sum - 4 * st.c() * st.c()));
    const double nu1 = (st.e() - st.s() + root) / 2;
    const double nu2 = (st.s() - st.e() + root) / 2;
    // tanh(2r) = 2C / (E + S); r carries the sign of C.
    const double r = std::atanh(2 * st.c() / sum) / 2;
    return {std::max(0.0, (nu1 - 1) / 2), std::max(0.0, (nu2 - 1) / 2), r};
}

std::size_t thermal_cutoff(double mean) {
    if (mean <= 1e-300) {
        return 0;
    }
    const double q = mean / (1 + mean);
    return static_cast<std::size_t>(std::ceil(std::log(1e-13) / std::log(q)));
}

/// Applies (x * raise_signal + y * lower_idler) when `signal_side`, otherwise
/// (x * raise_idler + y * lower_signal). Both shift d by +1 or -1 respectively.
DiagonalVector apply_mode_op(const DiagonalVector &in, const Real &x, const Real &y, bool signal_side,
                             const std::vector<Real> &roots) {
    DiagonalVector out;
    out.d = in.d + (signal_side ? 1 : -1);
    out.amp.assign(in.amp.size(), Real(0));
    const std::size_t w = in.amp.size();
    auto add = [&](long ns, long ni, const Real &value) {
        if (ns < 0 || ni < 0) {
            return;
        }
        const auto m = static_cast<std::size_t>(std::min(ns, ni));
        if (m < w) {
            out.amp[m] += value;
        }
    };
    for (std::size_t m = 0; m < w; ++m) {
        const Real &a = in.amp[m];
        if (a == 0) {
            continue;
        }
        const long ns = static_cast<long>(m) + std::max(in.d, 0L);
        const long ni = static_cast<long>(m) + std::max(-in.d, 0L);
        if (signal_side) {
            add(ns + 1, ni, x * roots[ns + 1] * a);
            if (ni > 0) {
                add(ns, ni - 1, y * roots[ni] * a);
            }
        } else {
            add(ns, ni + 1, x * roots[ni + 1] * a);
            if (ns > 0) {
                add(ns - 1, ni, y * roots[ns] * a);
            }
        }
    }
    return out;
}

/// Visits U|k1,k2> with its thermal weight p1(k1) p2(k2), where U is the
/// two-mode squeezer of the Williamson decomposition. Amplitudes are passed
/// as doubles indexed like DiagonalVector.
void for_each_squeezed_number_state(
    const TwoModeState &st, std::size_t n_max,
    const std::function<void(long d, const std::vector<double> &amp, double weight)> &visit) {
    const Decomposition dec = decompose(st);
    const std::size_t k1 = thermal_cutoff(dec.mean1);
    const std::size_t k2 = thermal_cutoff(dec.mean2);
    // The more excited port is built in closed form; the other by recursion.
    const bool closed_on_idler = k2 >= k1;
    const std::size_t k_closed = closed_on_idler ? k2 : k1;
    const std::size_t k_rec = closed_on_idler ? k1 : k2;
    const double amplification = static_cast<double>(k_rec) * std::abs(dec.r) / std::log(10.0);
    if (amplification > 35.0) {
        throw ResourceError("fock oracle needs more than 50 digits for this state");
    }

    const Real ch = boost::multiprecision::cosh(Real(dec.r));
    const Real sh = boost::multiprecision::sinh(Real(dec.r));
    const Real t = sh / ch;
    std::size_t vacuum_cut = 0;
    if (dec.r != 0.0) {
        const double td = std::tanh(dec.r);
        vacuum_cut = static_cast<std::size_t>(std::ceil(std::log(1e-18) / std::log(td * td)));
    }
    const std::size_t width = n_max + 2 * (k1 + k2) + 10 + vacuum_cut;
    if (width > 20000) {
        throw ResourceError("fock oracle working space too large: " + std::to_string(width));
    }
    std::vector<Real> roots(width + k1 + k2 + 2);
    for (std::size_t i = 0; i < roots.size(); ++i) {
        roots[i] = boost::multiprecision::sqrt(Real(i));
    }

    auto weight = [](double mean, std::size_t k) {
        if (mean <= 0.0) {
            return k == 0 ? 1.0 : 0.0;
        }
        return std::exp(static_cast<double>(k) * std::log(mean / (1 + mean)) - std::log1p(mean));
    };

    std::vector<double> out(width + 1);
    for (std::size_t j = 0; j <= k_closed; ++j) {
        // U|0,j> = sum_n t^n ch^-(j+1) sqrt(C(n+j, j)) |n, n+j>, and symmetrically for U|j,0>.
        DiagonalVector v;
        v.d = closed_on_idler ? -static_cast<long>(j) : static_cast<long>(j);
        v.amp.resize(width + 1);
        Real coef = 1 / boost::multiprecision::pow(ch, static_cast<int>(j + 1));
        for (std::size_t n = 0; n <= width; ++n) {
            v.amp[n] = coef;
            // C(n+1+j, j) / C(n+j, j) = (n+1+j)/(n+1)
            coef *= t * roots[n + 1 + j] / roots[n + 1];
        }
        // U a^dag U^dag = ch a^dag - sh b and U b^dag U^dag = ch b^dag - sh a.
        for (std::size_t i = 0; i <= k_rec; ++i) {
            if (i > 0) {
                v = apply_mode_op(v, ch, -sh, closed_on_idler, roots);
                for (Real &a : v.amp) {
                    a /= roots[i];
                }
            }
            for (std::size_t m = 0; m <= width; ++m) {
                out[m] = static_cast<double>(v.amp[m]);
            }
            const std::size_t j1 = closed_on_idler ? i : j;
            const std::size_t j2 = closed_on_idler ? j : i;
            visit(v.d, out, weight(dec.mean1, j1) * weight(dec.mean2, j2));
        }
    }
}

}  // namespace

std::vector<double> fock_oracle(const TwoModeState &state, std::size_t n_max) {
    const std::size_t side = n_max + 1;
    std::vector<double> table(side * side, 0.0);
    for_each_squeezed_number_state(state, n_max, [&](long d, const std::vector<double> &amp, double w) {
        for (std::size_t m = 0; m < amp.size(); ++m) {
            const std::size_t ns = m + static_cast<std::size_t>(std::max(d, 0L));
            const std::size_t ni = m + static_cast<std::size_t>(std::max(-d, 0L));
            if (ns > n_max || ni > n_max) {
                break;
            }
            table[ns * side + ni] += w * amp[m] * amp[m];
        }
    });
    double total = 0.0;
    for (double p : table) {
        total += p;
    }
    if (1.0 - total > 1e-6) {
        throw DomainError("fock oracle cutoff " + std::to_string(n_max) + " misses mass " +
                          std::to_string(1.0 - total));
    }
    return table;
}

std::vector<double> fock_density_matrix(const TwoModeState &state, std::size_t cutoff) {
    const std::size_t side = cutoff + 1;
    const std::size_t dim = side * side;
    std::vector<double> rho(dim * dim, 0.0);
    std::vector<std::pair<std::size_t, double>> entries;
    for_each_squeezed_number_state(state, cutoff, [&](long d, const std::vector<double> &amp, double w) {
        entries.clear();
        for (std::size_t m = 0; m < amp.size(); ++m) {
            const std::size_t ns = m + static_cast<std::size_t>(std::max(d, 0L));
            const std::size_t ni = m + static_cast<std::size_t>(std::max(-d, 0L));
            if (ns > cutoff || ni > cutoff) {
                break;
            }
            entries.emplace_back(ns * side + ni, amp[m]);
        }
        for (const auto &[i, ai] : entries) {
            for (const auto &[j, aj] : entries) {
                rho[i * dim + j] += w * ai * aj;
            }
        }
    });
    return rho;
}

}  // namespace eaas
