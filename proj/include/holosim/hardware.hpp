#ifndef HOLOSIM_HARDWARE_HPP
#define HOLOSIM_HARDWARE_HPP

#include <cstdint>
#include <optional>

#include "holosim/field.hpp"
#include "holosim/propagation.hpp"

namespace holo {

// Imperfections of one SLM. phase_levels = 0 means continuous phase.
struct SlmProfile {
    double eta = 1.0;          // diffraction efficiency in [0, 1]
    int phase_levels = 0;      // 0 = continuous, otherwise >= 2
    double shift_x = 0.0;      // lateral misalignment in pixels (sub-pixel ok)
    double shift_y = 0.0;
    double axial_shift = 0.0;  // extra propagation distance, meters
    double tilt_x = 0.0;       // linear phase ramp, radians per pixel
    double tilt_y = 0.0;
    // lookup-table distortion: monotone cubic on the wrapped phase,
    // phi -> phi + nl * 2pi t(1-t)(t-1/2) with t = phi/2pi; 0 = ideal LUT,
    // monotone for |nl| < 4
    double phase_nonlinearity = 0.0;

    void validate(const GridSpec& grid) const {
        if (!(eta >= 0.0 && eta <= 1.0)) throw std::invalid_argument("SlmProfile: eta must be in [0,1]");
        if (phase_levels != 0 && phase_levels < 2)
            throw std::invalid_argument("SlmProfile: phase_levels must be >= 2 or continuous");
        if (std::abs(shift_x) > grid.nx / 4.0 || std::abs(shift_y) > grid.ny / 4.0)
            throw std::invalid_argument("SlmProfile: lateral shift exceeds grid/4 sanity bound");
        if (!std::isfinite(axial_shift) || !std::isfinite(tilt_x) || !std::isfinite(tilt_y))
            throw std::invalid_argument("SlmProfile: non-finite parameter");
        if (!(std::abs(phase_nonlinearity) < 4.0))
            throw std::invalid_argument("SlmProfile: |phase_nonlinearity| must be < 4 (monotone)");
    }
};

// Virtual sensor. bit_depth = 0 means ideal (no quantization).
struct CameraProfile {
    double noise_sigma = 0.0;    // Gaussian intensity noise std, fraction of frame peak
    int bit_depth = 0;           // 0 = ideal
    double exposure_scale = 1.0;

    void validate() const {
        if (!(noise_sigma >= 0.0)) throw std::invalid_argument("CameraProfile: noise_sigma must be >= 0");
        if (!(exposure_scale > 0.0)) throw std::invalid_argument("CameraProfile: exposure_scale must be > 0");
        if (bit_depth < 0 || bit_depth > 24)
            throw std::invalid_argument("CameraProfile: bit_depth out of range");
    }
};

// The hidden physical system: two imperfect SLMs sharing one source field,
// free-space paths to the target plane, and a camera.
struct HardwareProfile {
    SlmProfile slm1;
    SlmProfile slm2;
    CameraProfile camera;
    ComplexField source;   // u_src on the SLM grid
    PropagationSpec prop;  // nominal SLM-to-target propagation
    std::uint64_t rng_seed = 0;

    void validate() const {
        prop.validate();
        require_same_grid(source.grid, prop.grid, "HardwareProfile");
        if (source.wavelength != prop.wavelength)
            throw std::invalid_argument("HardwareProfile: source/prop wavelength mismatch");
        slm1.validate(prop.grid);
        slm2.validate(prop.grid);
        camera.validate();
    }
};

// Sub-pixel circular shift of a band-limited field (Fourier shift theorem).
ComplexField lateral_shift_field(const ComplexField& field, double dx_px, double dy_px);

// Field reflected off one SLM: phase quantized to phase_levels over [0,2pi),
// tilt ramp added, u = [eta e^{i phi'} + (1 - eta)] u_src, then the lateral
// shift applied to the whole reflected field.
ComplexField slm_field(const PhasePattern& phi, const SlmProfile& slm, const ComplexField& source);

// What the sensor records for a pair of displayed patterns. A null pattern
// means that arm is blocked (contributes nothing, undiffracted light
// included). Deterministic given (hw.rng_seed, call_index).
RealImage capture(const PhasePattern* phi1, const PhasePattern* phi2, const HardwareProfile& hw,
                  std::uint64_t call_index = 0);

// sqrt of capture; what the CITL loop consumes.
RealImage captured_amplitude(const PhasePattern* phi1, const PhasePattern* phi2,
                             const HardwareProfile& hw, std::uint64_t call_index = 0);

// Abstract capture surface so a real camera backend could replace the
// emulator without touching solver code.
class CaptureSource {
public:
    virtual ~CaptureSource() = default;
    virtual RealImage capture_intensity(const PhasePattern* phi1, const PhasePattern* phi2,
                                        std::uint64_t call_index) = 0;
    virtual const GridSpec& grid() const = 0;
    // stable digest of the backing hardware, for run metadata
    virtual std::uint64_t source_hash() const { return 0; }

    RealImage capture_amplitude(const PhasePattern* phi1, const PhasePattern* phi2,
                                std::uint64_t call_index) {
        RealImage img = capture_intensity(phi1, phi2, call_index);
        for (double& v : img.v) v = std::sqrt(v);
        return img;
    }
};

// Software emulation of the physical path, backed by a HardwareProfile.
class EmulatedCamera : public CaptureSource {
public:
    explicit EmulatedCamera(HardwareProfile hw);

    RealImage capture_intensity(const PhasePattern* phi1, const PhasePattern* phi2,
                                std::uint64_t call_index) override;
    const GridSpec& grid() const override { return hw_.prop.grid; }
    const HardwareProfile& profile() const { return hw_; }
    std::uint64_t profile_hash() const;
    std::uint64_t source_hash() const override { return profile_hash(); }

private:
    HardwareProfile hw_;
    Propagator prop1_;
    Propagator prop2_;
    bool merged_path_;  // same axial shift on both arms: one propagation of the sum
};

}  // namespace holo

#endif
