#include "holosim/metrics.hpp"

#include <algorithm>
#include <limits>

#include "holosim/fft.hpp"

namespace holo {

double psnr(const RealImage& reconstruction, const TargetAmplitude& target, PsnrMode mode) {
    require_same_grid(reconstruction.grid, target.grid, "psnr");
    double mse = 0.0;
    const std::size_t n = target.grid.count();
    for (std::size_t i = 0; i < n; ++i) {
        double d = mode == PsnrMode::Amplitude
                       ? reconstruction.v[i] - target.amplitude[i]
                       : reconstruction.v[i] * reconstruction.v[i] -
                             target.amplitude[i] * target.amplitude[i];
        mse += d * d;
    }
    mse /= static_cast<double>(n);
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(1.0 / mse);  // peak = 1 by the target convention
}

namespace {

// nearest-rank percentile of an unsorted copy
double percentile(std::vector<double>& values, double q) {
    std::size_t m = values.size();
    std::size_t rank = static_cast<std::size_t>(std::ceil(q * m));
    rank = std::clamp<std::size_t>(rank, 1, m);
    std::nth_element(values.begin(), values.begin() + (rank - 1), values.end());
    return values[rank - 1];
}

}  // namespace

ContrastReport contrast_from_sinusoid(const RealImage& captured, double period_px, Axis axis) {
    const int extent = axis == Axis::X ? captured.grid.nx : captured.grid.ny;
    const int other = axis == Axis::X ? captured.grid.ny : captured.grid.nx;
    if (!(period_px > 0.0) || period_px > extent)
        throw std::invalid_argument("contrast_from_sinusoid: period larger than image");
    const int periods = static_cast<int>(extent / period_px);
    if (periods < 3)
        throw std::invalid_argument("contrast_from_sinusoid: need at least 3 full periods");

    double sum_max = 0.0, sum_min = 0.0;
    std::vector<double> slab;
    for (int k = 0; k < periods; ++k) {
        const int lo = static_cast<int>(std::floor(k * period_px));
        const int hi = std::min(extent, static_cast<int>(std::floor((k + 1) * period_px)));
        slab.clear();
        for (int i = lo; i < hi; ++i)
            for (int j = 0; j < other; ++j)
                slab.push_back(axis == Axis::X ? captured.at(j, i) : captured.at(i, j));
        std::vector<double> tmp = slab;
        sum_max += percentile(tmp, 0.95);
        tmp = slab;
        sum_min += percentile(tmp, 0.05);
    }

    ContrastReport rep;
    rep.i_max = sum_max / periods;
    rep.i_min = sum_min / periods;
    const double denom = rep.i_max + rep.i_min;
    rep.michelson = denom > 0.0 ? (rep.i_max - rep.i_min) / denom : 0.0;
    rep.weber = rep.i_min > 0.0 ? (rep.i_max - rep.i_min) / rep.i_min
                                : std::numeric_limits<double>::infinity();
    return rep;
}

namespace {

// vertex of the parabola through (-1, ym), (0, y0), (+1, yp), clamped to [-1/2, 1/2]
double parabolic_offset(double ym, double y0, double yp) {
    const double denom = ym - 2.0 * y0 + yp;
    if (std::abs(denom) < 1e-300) return 0.0;
    return std::clamp(0.5 * (ym - yp) / denom, -0.5, 0.5);
}

}  // namespace

AlignmentEstimate estimate_shift(const RealImage& img_a, const RealImage& img_b) {
    require_same_grid(img_a.grid, img_b.grid, "estimate_shift");
    const int ny = img_a.grid.ny, nx = img_a.grid.nx;
    const std::size_t n = img_a.grid.count();

    std::vector<cd> fa(n), fb(n);
    for (std::size_t i = 0; i < n; ++i) {
        fa[i] = cd(img_a.v[i], 0.0);
        fb[i] = cd(img_b.v[i], 0.0);
    }
    detail::dft2_inplace(ny, nx, fa.data(), -1);
    detail::dft2_inplace(ny, nx, fb.data(), -1);

    double max_mag = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        fa[i] = std::conj(fa[i]) * fb[i];
        max_mag = std::max(max_mag, std::abs(fa[i]));
    }
    if (max_mag == 0.0) throw std::runtime_error("estimate_shift: empty images");

    // Normalized cross-power restricted to the lower quarter of the band.
    // Captured intensities carry twice the field bandwidth, so their upper
    // bins are alias-contaminated and would bias the sub-pixel fit; near-zero
    // bins are dropped rather than blown up to unit modulus.
    const double floor_mag = 1e-12 * max_mag;
    const int ky_max = ny / 8, kx_max = nx / 8;
    std::size_t kept = 0;
    for (int y = 0; y < ny; ++y) {
        const int ky = y <= ny / 2 ? y : y - ny;
        for (int x = 0; x < nx; ++x) {
            const int kx = x <= nx / 2 ? x : x - nx;
            cd& q = fa[static_cast<std::size_t>(y) * nx + x];
            const double m = std::abs(q);
            if (std::abs(ky) <= ky_max && std::abs(kx) <= kx_max && m > floor_mag) {
                q /= m;
                ++kept;
            } else {
                q = cd(0.0, 0.0);
            }
        }
    }
    if (kept == 0) throw std::runtime_error("estimate_shift: empty spectrum");
    detail::dft2_inplace(ny, nx, fa.data(), +1);
    for (std::size_t i = 0; i < n; ++i) fa[i] /= static_cast<double>(kept);

    std::size_t peak = 0;
    double peak_val = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double m = std::abs(fa[i]);
        if (m > peak_val) {
            peak_val = m;
            peak = i;
        }
    }
    const int py = static_cast<int>(peak) / nx;
    const int px = static_cast<int>(peak) % nx;
    auto mag = [&](int y, int x) {
        y = ((y % ny) + ny) % ny;
        x = ((x % nx) + nx) % nx;
        return std::abs(fa[static_cast<std::size_t>(y) * nx + x]);
    };
    const double ox = parabolic_offset(mag(py, px - 1), peak_val, mag(py, px + 1));
    const double oy = parabolic_offset(mag(py - 1, px), peak_val, mag(py + 1, px));

    AlignmentEstimate est;
    est.dx = (px > nx / 2 ? px - nx : px) + ox;
    est.dy = (py > ny / 2 ? py - ny : py) + oy;
    est.confidence = std::clamp(peak_val, 0.0, 1.0);
    if (est.confidence < 0.1)
        throw std::runtime_error("estimate_shift: calibration failed (peak correlation < 0.1)");
    return est;
}

PhasePattern apply_alignment(const PhasePattern& phi, const AlignmentEstimate& est) {
    const GridSpec& g = phi.grid;
    const double dx = est.dx, dy = est.dy;

    // integer displacements are a pure circular reindex of the raw values
    if (dx == std::floor(dx) && dy == std::floor(dy)) {
        const int ix0 = static_cast<int>(dx), iy0 = static_cast<int>(dy);
        if (ix0 == 0 && iy0 == 0) return phi;
        PhasePattern out(g);
        for (int y = 0; y < g.ny; ++y) {
            const int ys = ((y + iy0) % g.ny + g.ny) % g.ny;
            for (int x = 0; x < g.nx; ++x) {
                const int xs = ((x + ix0) % g.nx + g.nx) % g.nx;
                out.at(y, x) = phi.at(ys, xs);
            }
        }
        return out;
    }

    PhasePattern out(g);
    for (int y = 0; y < g.ny; ++y) {
        double fy = y + dy;
        int y0 = static_cast<int>(std::floor(fy));
        const double wy = fy - y0;
        for (int x = 0; x < g.nx; ++x) {
            double fx = x + dx;
            int x0 = static_cast<int>(std::floor(fx));
            const double wx = fx - x0;
            const int xa = ((x0 % g.nx) + g.nx) % g.nx;
            const int xb = (xa + 1) % g.nx;
            const int ya = ((y0 % g.ny) + g.ny) % g.ny;
            const int yb = (ya + 1) % g.ny;
            auto phasor = [&](int yy, int xx) {
                const double p = phi.at(yy, xx);
                return cd(std::cos(p), std::sin(p));
            };
            cd v = phasor(ya, xa) * ((1 - wx) * (1 - wy)) + phasor(ya, xb) * (wx * (1 - wy)) +
                   phasor(yb, xa) * ((1 - wx) * wy) + phasor(yb, xb) * (wx * wy);
            out.at(y, x) = wrap_phase(std::arg(v));
        }
    }
    return out;
}

}  // namespace holo
