#include "holosim/propagation.hpp"

#include <map>
#include <mutex>

#include "holosim/fft.hpp"

namespace holo {

namespace {

// H in natural FFT bin order for the padded grid. Natural bin j maps to the
// centered sample (j + c) mod n, which keeps this bit-identical to
// asm_transfer under the roll used by the centered transforms.
std::vector<cd> make_transfer_natural(const PropagationSpec& spec) {
    const GridSpec pg = spec.padded_grid();
    const double lam = spec.wavelength;
    const double k_over = kTwoPi / lam * spec.distance;  // (2pi/lambda) * z
    std::vector<cd> h(pg.count());
    const int cy = pg.ny / 2, cx = pg.nx / 2;
    for (int jy = 0; jy < pg.ny; ++jy) {
        const double fy = pg.fy((jy + cy) % pg.ny);
        const double ly2 = lam * fy * lam * fy;
        for (int jx = 0; jx < pg.nx; ++jx) {
            const double fx = pg.fx((jx + cx) % pg.nx);
            const double arg = 1.0 - lam * fx * lam * fx - ly2;
            cd v(0.0, 0.0);
            if (arg > 0.0) {
                const double phase = k_over * std::sqrt(arg);
                v = cd(std::cos(phase), std::sin(phase));
            }
            h[static_cast<std::size_t>(jy) * pg.nx + jx] = v;
        }
    }
    return h;
}

struct TransferKey {
    int nx, ny, pad;
    double pitch, wavelength, distance;
    bool operator<(const TransferKey& o) const {
        return std::tie(nx, ny, pad, pitch, wavelength, distance) <
               std::tie(o.nx, o.ny, o.pad, o.pitch, o.wavelength, o.distance);
    }
};

std::shared_ptr<const std::vector<cd>> transfer_cache_get(const PropagationSpec& spec) {
    static std::mutex mutex;
    static std::map<TransferKey, std::shared_ptr<const std::vector<cd>>> cache;
    TransferKey key{spec.grid.nx, spec.grid.ny, spec.pad_factor,
                    spec.grid.pitch, spec.wavelength, spec.distance};
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    auto h = std::make_shared<const std::vector<cd>>(make_transfer_natural(spec));
    cache.emplace(key, h);
    return h;
}

}  // namespace

std::vector<cd> asm_transfer(const PropagationSpec& spec) {
    spec.validate();
    const GridSpec pg = spec.padded_grid();
    const double lam = spec.wavelength;
    const double k_over = kTwoPi / lam * spec.distance;
    std::vector<cd> h(pg.count());
    for (int iy = 0; iy < pg.ny; ++iy) {
        const double fy = pg.fy(iy);
        const double ly2 = lam * fy * lam * fy;
        for (int ix = 0; ix < pg.nx; ++ix) {
            const double fx = pg.fx(ix);
            const double arg = 1.0 - lam * fx * lam * fx - ly2;
            cd v(0.0, 0.0);
            if (arg > 0.0) {
                const double phase = k_over * std::sqrt(arg);
                v = cd(std::cos(phase), std::sin(phase));
            }
            h[static_cast<std::size_t>(iy) * pg.nx + ix] = v;
        }
    }
    return h;
}

Propagator::Propagator(const PropagationSpec& spec) : spec_(spec) {
    spec_.validate();
    transfer_ = transfer_cache_get(spec_);
    buf_a_.resize(spec_.padded_grid().count());
    buf_b_.resize(spec_.padded_grid().count());
}

ComplexField Propagator::apply(const ComplexField& in, bool conjugate) {
    if (in.grid != spec_.grid) throw std::invalid_argument("propagate: grid mismatch");
    if (in.wavelength != spec_.wavelength)
        throw std::invalid_argument("propagate: wavelength mismatch");

    const GridSpec g = spec_.grid;
    const GridSpec pg = spec_.padded_grid();
    const int oy = (pg.ny - g.ny) / 2, ox = (pg.nx - g.nx) / 2;
    const int cy = pg.ny / 2, cx = pg.nx / 2;
    const std::size_t n = pg.count();

    std::fill(buf_a_.begin(), buf_a_.end(), cd(0.0, 0.0));
    for (int y = 0; y < g.ny; ++y)
        std::copy_n(in.data.data() + static_cast<std::size_t>(y) * g.nx, g.nx,
                    buf_a_.data() + static_cast<std::size_t>(y + oy) * pg.nx + ox);

    detail::roll2(pg.ny, pg.nx, buf_a_.data(), buf_b_.data(), -cy, -cx);
    detail::dft2_inplace(pg.ny, pg.nx, buf_b_.data(), -1);
    const std::vector<cd>& h = *transfer_;
    if (conjugate) {
        for (std::size_t i = 0; i < n; ++i) buf_b_[i] *= std::conj(h[i]);
    } else {
        for (std::size_t i = 0; i < n; ++i) buf_b_[i] *= h[i];
    }
    detail::dft2_inplace(pg.ny, pg.nx, buf_b_.data(), +1);
    detail::roll2(pg.ny, pg.nx, buf_b_.data(), buf_a_.data(), cy, cx);

    ComplexField out(g, spec_.wavelength);
    const double scale = 1.0 / static_cast<double>(n);  // unitary forward+inverse pair
    for (int y = 0; y < g.ny; ++y) {
        const cd* src = buf_a_.data() + static_cast<std::size_t>(y + oy) * pg.nx + ox;
        cd* dst = out.data.data() + static_cast<std::size_t>(y) * g.nx;
        for (int x = 0; x < g.nx; ++x) dst[x] = src[x] * scale;
    }
    return out;
}

ComplexField Propagator::forward(const ComplexField& in) { return apply(in, false); }

ComplexField Propagator::adjoint(const ComplexField& in) { return apply(in, true); }

ComplexField propagate(const ComplexField& field, const PropagationSpec& spec) {
    Propagator p(spec);
    return p.forward(field);
}

ComplexField propagate_adjoint(const ComplexField& cotangent, const PropagationSpec& spec) {
    Propagator p(spec);
    return p.adjoint(cotangent);
}

}  // namespace holo
