#include "holosim/hardware.hpp"

#include <cstring>

#include "holosim/fft.hpp"
#include "holosim/rng.hpp"

namespace holo {

namespace {

PropagationSpec arm_spec(const PropagationSpec& base, const SlmProfile& slm) {
    PropagationSpec s = base;
    s.distance += slm.axial_shift;
    return s;
}

const HardwareProfile& validated(const HardwareProfile& hw) {
    hw.validate();
    return hw;
}

}  // namespace

ComplexField lateral_shift_field(const ComplexField& field, double dx_px, double dy_px) {
    if (dx_px == 0.0 && dy_px == 0.0) return field;
    const GridSpec& g = field.grid;
    ComplexField spec = fft2_centered(field);
    for (int iy = 0; iy < g.ny; ++iy) {
        const double py = -kTwoPi * (iy - g.ny / 2) * dy_px / g.ny;
        for (int ix = 0; ix < g.nx; ++ix) {
            const double px = -kTwoPi * (ix - g.nx / 2) * dx_px / g.nx;
            spec.at(iy, ix) *= cd(std::cos(px + py), std::sin(px + py));
        }
    }
    return ifft2_centered(spec);
}

ComplexField slm_field(const PhasePattern& phi, const SlmProfile& slm, const ComplexField& source) {
    require_same_grid(phi.grid, source.grid, "slm_field");
    slm.validate(source.grid);

    const GridSpec& g = source.grid;
    const double eta = slm.eta;
    const double undiffracted = 1.0 - eta;
    const bool distorted = slm.phase_nonlinearity != 0.0;
    const bool quantize = slm.phase_levels >= 2;
    const bool tilted = slm.tilt_x != 0.0 || slm.tilt_y != 0.0;
    const double step = quantize ? kTwoPi / slm.phase_levels : 0.0;

    ComplexField u(g, source.wavelength);
    for (int iy = 0; iy < g.ny; ++iy) {
        for (int ix = 0; ix < g.nx; ++ix) {
            double p = phi.at(iy, ix);
            if (distorted) {
                const double t = wrap_phase(p) / kTwoPi;
                p = kTwoPi * (t + slm.phase_nonlinearity * t * (1.0 - t) * (t - 0.5));
            }
            if (quantize) {
                long q = std::lround(wrap_phase(p) / step) % slm.phase_levels;
                p = q * step;
            }
            if (tilted) p += slm.tilt_x * (ix - g.nx / 2) + slm.tilt_y * (iy - g.ny / 2);
            const cd modulated(eta * std::cos(p) + undiffracted, eta * std::sin(p));
            u.at(iy, ix) = modulated * source.at(iy, ix);
        }
    }
    if (slm.shift_x != 0.0 || slm.shift_y != 0.0)
        u = lateral_shift_field(u, slm.shift_x, slm.shift_y);
    return u;
}

EmulatedCamera::EmulatedCamera(HardwareProfile hw)
    : hw_(std::move(hw)),
      prop1_(arm_spec(validated(hw_).prop, hw_.slm1)),
      prop2_(arm_spec(hw_.prop, hw_.slm2)),
      merged_path_(hw_.slm1.axial_shift == hw_.slm2.axial_shift) {}

RealImage EmulatedCamera::capture_intensity(const PhasePattern* phi1, const PhasePattern* phi2,
                                            std::uint64_t call_index) {
    if (!phi1 && !phi2) throw std::invalid_argument("capture: both arms blocked");
    if (phi1) require_same_grid(phi1->grid, hw_.prop.grid, "capture");
    if (phi2) require_same_grid(phi2->grid, hw_.prop.grid, "capture");

    ComplexField target_field;
    if (phi1 && phi2) {
        ComplexField u1 = slm_field(*phi1, hw_.slm1, hw_.source);
        ComplexField u2 = slm_field(*phi2, hw_.slm2, hw_.source);
        if (merged_path_) {
            for (std::size_t i = 0; i < u1.data.size(); ++i) u1.data[i] += u2.data[i];
            target_field = prop1_.forward(u1);
        } else {
            target_field = prop1_.forward(u1);
            ComplexField t2 = prop2_.forward(u2);
            for (std::size_t i = 0; i < target_field.data.size(); ++i)
                target_field.data[i] += t2.data[i];
        }
    } else if (phi1) {
        target_field = prop1_.forward(slm_field(*phi1, hw_.slm1, hw_.source));
    } else {
        target_field = prop2_.forward(slm_field(*phi2, hw_.slm2, hw_.source));
    }

    RealImage img(hw_.prop.grid);
    const double exposure = hw_.camera.exposure_scale;
    for (std::size_t i = 0; i < img.v.size(); ++i)
        img.v[i] = exposure * std::norm(target_field.data[i]);

    if (hw_.camera.noise_sigma > 0.0) {
        const double sigma = hw_.camera.noise_sigma * img.max();
        if (sigma > 0.0) {
            Rng rng(mix_seed(hw_.rng_seed, call_index));
            for (double& v : img.v) v = std::max(0.0, v + sigma * rng.gaussian());
        }
    }
    if (hw_.camera.bit_depth >= 1) {
        const double peak = img.max();
        if (peak > 0.0) {
            const double levels = static_cast<double>((1u << hw_.camera.bit_depth) - 1u);
            const double step = peak / levels;
            for (double& v : img.v) v = std::round(v / step) * step;
        }
    }
    return img;
}

std::uint64_t EmulatedCamera::profile_hash() const {
    // stable digest of the scalar parameters (the source field is implied by
    // the grid and the uniform-source convention of the experiment configs)
    double scalars[] = {hw_.slm1.eta, double(hw_.slm1.phase_levels), hw_.slm1.shift_x,
                        hw_.slm1.shift_y, hw_.slm1.axial_shift, hw_.slm1.tilt_x, hw_.slm1.tilt_y,
                        hw_.slm1.phase_nonlinearity,
                        hw_.slm2.eta, double(hw_.slm2.phase_levels), hw_.slm2.shift_x,
                        hw_.slm2.shift_y, hw_.slm2.axial_shift, hw_.slm2.tilt_x, hw_.slm2.tilt_y,
                        hw_.slm2.phase_nonlinearity,
                        hw_.camera.noise_sigma, double(hw_.camera.bit_depth),
                        hw_.camera.exposure_scale, hw_.prop.wavelength, hw_.prop.distance,
                        hw_.prop.grid.pitch, double(hw_.prop.grid.nx), double(hw_.prop.grid.ny),
                        double(hw_.prop.pad_factor), double(hw_.rng_seed)};
    return fnv1a64(scalars, sizeof(scalars));
}

RealImage capture(const PhasePattern* phi1, const PhasePattern* phi2, const HardwareProfile& hw,
                  std::uint64_t call_index) {
    EmulatedCamera cam(hw);
    return cam.capture_intensity(phi1, phi2, call_index);
}

RealImage captured_amplitude(const PhasePattern* phi1, const PhasePattern* phi2,
                             const HardwareProfile& hw, std::uint64_t call_index) {
    RealImage img = capture(phi1, phi2, hw, call_index);
    for (double& v : img.v) v = std::sqrt(v);
    return img;
}

}  // namespace holo
