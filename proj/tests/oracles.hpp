#pragma once

// Test-only reference implementations. These use plain loops over (i, j, c, d) and
// never call into the library's vectorized kernels, so they can check them.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "svs/geomeval.hpp"
#include "svs/grid.hpp"
#include "svs/stereomatch.hpp"

namespace oracle {

using svs::Index;

inline svs::ImageGrid<double> random_image(std::mt19937_64& rng, Index h, Index w, Index c) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    svs::ImageGrid<double> img(h, w, c);
    for (Index k = 0; k < c; ++k)
        for (Index i = 0; i < h; ++i)
            for (Index j = 0; j < w; ++j) img(i, j, k) = u(rng);
    return img;
}

/// Strictly positive random distribution per pixel.
inline svs::DisparityVolume<double> random_volume(std::mt19937_64& rng, Index h, Index w, Index levels) {
    std::uniform_real_distribution<double> u(0.05, 1.0);
    std::vector<svs::Plane<double>> lv(static_cast<std::size_t>(levels), svs::Plane<double>(h, w));
    for (Index i = 0; i < h; ++i)
        for (Index j = 0; j < w; ++j) {
            double total = 0;
            for (auto& p : lv) total += (p(i, j) = u(rng));
            for (auto& p : lv) p(i, j) /= total;
        }
    return svs::DisparityVolume<double>(std::move(lv));
}

inline svs::LevelStack<double> random_stack(std::mt19937_64& rng, Index h, Index w, Index levels, double lo, double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    svs::LevelStack<double> s(static_cast<std::size_t>(levels), svs::Plane<double>(h, w));
    for (auto& p : s)
        for (Index i = 0; i < h; ++i)
            for (Index j = 0; j < w; ++j) p(i, j) = u(rng);
    return s;
}

// --- view synthesis --------------------------------------------------------

/// Sum over d of probs(i, j, d) * left(i, min(j + d, W - 1), c), taking the
/// per-pixel weights from a flat callback so unnormalized perturbations work.
inline svs::ImageGrid<double> selection(const svs::ImageGrid<double>& left, Index levels,
                                        const std::function<double(Index, Index, Index)>& prob) {
    const Index h = left.height(), w = left.width();
    svs::ImageGrid<double> out(h, w, left.channels());
    for (Index i = 0; i < h; ++i)
        for (Index j = 0; j < w; ++j)
            for (Index c = 0; c < left.channels(); ++c) {
                double s = 0;
                for (Index d = 0; d < levels; ++d) s += prob(i, j, d) * left(i, std::min(j + d, w - 1), c);
                out(i, j, c) = s;
            }
    return out;
}

inline svs::ImageGrid<double> selection(const svs::ImageGrid<double>& left, const svs::DisparityVolume<double>& vol) {
    return selection(left, vol.num_levels(), [&](Index i, Index j, Index d) { return vol.level(d)(i, j); });
}

inline double dot(const svs::ImageGrid<double>& a, const svs::ImageGrid<double>& b) {
    double s = 0;
    for (Index c = 0; c < a.channels(); ++c)
        for (Index i = 0; i < a.height(); ++i)
            for (Index j = 0; j < a.width(); ++j) s += a(i, j, c) * b(i, j, c);
    return s;
}

/// Central differences of a scalar function over n coordinates exposed by reference.
inline std::vector<double> central_differences(std::size_t n, const std::function<double&(std::size_t)>& coord,
                                               const std::function<double()>& f, double h = 1e-5) {
    std::vector<double> g(n);
    for (std::size_t k = 0; k < n; ++k) {
        double& x = coord(k);
        const double saved = x;
        x = saved + h;
        const double fp = f();
        x = saved - h;
        const double fm = f();
        x = saved;
        g[k] = (fp - fm) / (2 * h);
    }
    return g;
}

/// ||a - b|| / max(||a||, ||b||), with 0 when both vanish.
inline double relative_error(const std::vector<double>& a, const std::vector<double>& b) {
    double diff = 0, na = 0, nb = 0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        diff += (a[k] - b[k]) * (a[k] - b[k]);
        na += a[k] * a[k];
        nb += b[k] * b[k];
    }
    const double scale = std::sqrt(std::max(na, nb));
    return scale == 0 ? 0.0 : std::sqrt(diff) / scale;
}

inline std::vector<double> flatten(const svs::LevelStack<double>& s) {
    std::vector<double> out;
    for (const auto& p : s)
        for (Index i = 0; i < p.rows(); ++i)
            for (Index j = 0; j < p.cols(); ++j) out.push_back(p(i, j));
    return out;
}

inline std::vector<double> flatten(const svs::ImageGrid<double>& g) {
    std::vector<double> out;
    for (Index c = 0; c < g.channels(); ++c)
        for (Index i = 0; i < g.height(); ++i)
            for (Index j = 0; j < g.width(); ++j) out.push_back(g(i, j, c));
    return out;
}

// --- stereo ----------------------------------------------------------------

inline double correlation(const svs::ImageGrid<double>& l, const svs::ImageGrid<double>& r, Index i, Index j, Index d) {
    if (j - d < 0) return 0.0;
    double s = 0;
    for (Index c = 0; c < l.channels(); ++c) s += l(i, j, c) * r(i, j - d, c);
    return s / static_cast<double>(l.channels());
}

// --- metrics ---------------------------------------------------------------

struct Metrics {
    double ard, srd, rmse, rmse_log;
    std::vector<double> acc;
};

inline Metrics metrics(const std::vector<double>& p, const std::vector<double>& g, const std::vector<double>& thr) {
    double ard = 0, srd = 0, sq = 0, sqlog = 0;
    std::vector<double> hits(thr.size(), 0.0);
    for (std::size_t k = 0; k < p.size(); ++k) {
        const double e = p[k] - g[k];
        ard += std::fabs(e) / g[k];
        srd += e * e / g[k];
        sq += e * e;
        const double le = std::log(p[k]) - std::log(g[k]);
        sqlog += le * le;
        const double delta = std::max(p[k] / g[k], g[k] / p[k]);
        for (std::size_t t = 0; t < thr.size(); ++t)
            if (delta < thr[t]) hits[t] += 1;
    }
    const double n = static_cast<double>(p.size());
    for (auto& h : hits) h /= n;
    return {ard / n, srd / n, std::sqrt(sq / n), std::sqrt(sqlog / n), hits};
}

inline double d1(const svs::DisparityMap<double>& p, const svs::DisparityMap<double>& g) {
    long n = 0, bad = 0;
    for (Index i = 0; i < p.height(); ++i)
        for (Index j = 0; j < p.width(); ++j) {
            if (!p.valid(i, j) || !g.valid(i, j)) continue;
            ++n;
            const double e = std::fabs(p.values(i, j) - g.values(i, j));
            if (e > 3.0 && e > 0.05 * g.values(i, j)) ++bad;
        }
    return static_cast<double>(bad) / static_cast<double>(n);
}

inline double rel_diff(double a, double b) {
    const double s = std::max(std::fabs(a), std::fabs(b));
    return s == 0 ? 0.0 : std::fabs(a - b) / s;
}

}  // namespace oracle
