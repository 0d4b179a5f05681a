#pragma once

#include <algorithm>
#include <functional>
#include <numeric>
#include <vector>

// Bound-constrained Nelder-Mead with the Gao-Han adaptive coefficients.
// Candidates are clipped to the box before evaluation, so simplices may sit
// exactly on a face; that is how on/off optima are reached.

namespace hbell::detail {

struct NelderMeadOptions {
    int max_iter = 4000;
    double f_tol = 1e-15;   // absolute spread of simplex values
    double x_tol = 1e-11;   // max vertex distance from best, per coordinate
    double init_step = 0.15;  // initial simplex step as a fraction of box width
};

struct NelderMeadResult {
    std::vector<double> x;
    double f = 0.0;
    int iterations = 0;
    int evaluations = 0;
    bool converged = false;
};

inline NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                    std::vector<double> x0, const std::vector<double>& lo,
                                    const std::vector<double>& hi, const NelderMeadOptions& opt = {})
{
    const int n = static_cast<int>(x0.size());
    NelderMeadResult res;

    const auto clip = [&](std::vector<double>& x) {
        for (int k = 0; k < n; ++k) x[static_cast<size_t>(k)] = std::clamp(x[static_cast<size_t>(k)], lo[static_cast<size_t>(k)], hi[static_cast<size_t>(k)]);
    };
    const auto eval = [&](std::vector<double>& x) {
        clip(x);
        ++res.evaluations;
        return f(x);
    };

    // adaptive coefficients
    const double refl = 1.0;
    const double expn = 1.0 + 2.0 / n;
    const double ctra = 0.75 - 0.5 / n;
    const double shrk = 1.0 - 1.0 / n;

    std::vector<std::vector<double>> sx(static_cast<size_t>(n) + 1, x0);
    std::vector<double> sf(static_cast<size_t>(n) + 1);
    clip(sx[0]);
    sf[0] = eval(sx[0]);
    for (int k = 0; k < n; ++k) {
        auto& v = sx[static_cast<size_t>(k) + 1];
        const double w = hi[static_cast<size_t>(k)] - lo[static_cast<size_t>(k)];
        double step = opt.init_step * w;
        if (v[static_cast<size_t>(k)] + step > hi[static_cast<size_t>(k)]) step = -step;
        v[static_cast<size_t>(k)] += step;
        sf[static_cast<size_t>(k) + 1] = eval(v);
    }

    std::vector<size_t> order(static_cast<size_t>(n) + 1);
    std::vector<double> centroid(static_cast<size_t>(n));
    std::vector<double> xr(static_cast<size_t>(n)), xe(static_cast<size_t>(n)), xc(static_cast<size_t>(n));

    for (res.iterations = 0; res.iterations < opt.max_iter; ++res.iterations) {
        std::iota(order.begin(), order.end(), size_t{0});
        std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
            if (sf[a] != sf[b]) return sf[a] < sf[b];
            return sx[a] < sx[b];  // deterministic tie order
        });

        const size_t ibest = order.front();
        const size_t iworst = order.back();
        const size_t isecond = order[order.size() - 2];

        double spread = sf[iworst] - sf[ibest];
        double diam = 0.0;
        for (size_t v = 0; v <= static_cast<size_t>(n); ++v)
            for (int k = 0; k < n; ++k)
                diam = std::max(diam, std::abs(sx[v][static_cast<size_t>(k)] - sx[ibest][static_cast<size_t>(k)]));
        if (spread <= opt.f_tol && diam <= opt.x_tol) {
            res.converged = true;
            break;
        }

        // centroid of all but worst
        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (size_t v = 0; v <= static_cast<size_t>(n); ++v) {
            if (v == iworst) continue;
            for (int k = 0; k < n; ++k) centroid[static_cast<size_t>(k)] += sx[v][static_cast<size_t>(k)];
        }
        for (double& c : centroid) c /= n;

        for (int k = 0; k < n; ++k)
            xr[static_cast<size_t>(k)] = centroid[static_cast<size_t>(k)] + refl * (centroid[static_cast<size_t>(k)] - sx[iworst][static_cast<size_t>(k)]);
        const double fr = eval(xr);

        if (fr < sf[ibest]) {
            for (int k = 0; k < n; ++k)
                xe[static_cast<size_t>(k)] = centroid[static_cast<size_t>(k)] + expn * (xr[static_cast<size_t>(k)] - centroid[static_cast<size_t>(k)]);
            const double fe = eval(xe);
            if (fe < fr) {
                sx[iworst] = xe;
                sf[iworst] = fe;
            } else {
                sx[iworst] = xr;
                sf[iworst] = fr;
            }
        } else if (fr < sf[isecond]) {
            sx[iworst] = xr;
            sf[iworst] = fr;
        } else {
            const bool outside = fr < sf[iworst];
            const auto& xref = outside ? xr : sx[iworst];
            for (int k = 0; k < n; ++k)
                xc[static_cast<size_t>(k)] = centroid[static_cast<size_t>(k)] + ctra * (xref[static_cast<size_t>(k)] - centroid[static_cast<size_t>(k)]);
            const double fc = eval(xc);
            if (fc < std::min(fr, sf[iworst])) {
                sx[iworst] = xc;
                sf[iworst] = fc;
            } else {
                // shrink toward best
                for (size_t v = 0; v <= static_cast<size_t>(n); ++v) {
                    if (v == ibest) continue;
                    for (int k = 0; k < n; ++k)
                        sx[v][static_cast<size_t>(k)] =
                            sx[ibest][static_cast<size_t>(k)] + shrk * (sx[v][static_cast<size_t>(k)] - sx[ibest][static_cast<size_t>(k)]);
                    sf[v] = eval(sx[v]);
                }
            }
        }
    }

    size_t ib = 0;
    for (size_t v = 1; v <= static_cast<size_t>(n); ++v)
        if (sf[v] < sf[ib] || (sf[v] == sf[ib] && sx[v] < sx[ib])) ib = v;
    res.x = sx[ib];
    res.f = sf[ib];
    return res;
}

}  // namespace hbell::detail
