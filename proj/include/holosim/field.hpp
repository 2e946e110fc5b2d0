#ifndef HOLOSIM_FIELD_HPP
#define HOLOSIM_FIELD_HPP

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace holo {

using cd = std::complex<double>;

constexpr double kPi = 3.1415926535897932384626433832795;
constexpr double kTwoPi = 6.283185307179586476925286766559;

// Wraps an angle into the canonical [0, 2*pi) domain.
inline double wrap_phase(double x) {
    double w = x - kTwoPi * std::floor(x / kTwoPi);
    if (w >= kTwoPi) w = 0.0;  // guard against rounding at the seam
    return w;
}

// Sampling geometry of a field: nx columns (x), ny rows (y), square pixels.
struct GridSpec {
    int nx = 0;
    int ny = 0;
    double pitch = 0.0;  // meters per pixel

    std::size_t count() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }

    bool operator==(const GridSpec& o) const {
        return nx == o.nx && ny == o.ny && pitch == o.pitch;
    }
    bool operator!=(const GridSpec& o) const { return !(*this == o); }

    void validate() const {
        if (nx < 2 || ny < 2) throw std::invalid_argument("GridSpec: nx and ny must be >= 2");
        if (!(pitch > 0.0) || !std::isfinite(pitch))
            throw std::invalid_argument("GridSpec: pitch must be positive and finite");
    }

    // Centered spatial frequency sample for index k along an axis of n samples.
    // Runs over [-1/(2*pitch), 1/(2*pitch)); index n/2 is DC.
    double freq(int k, int n) const { return (k - n / 2) / (n * pitch); }
    double fx(int ix) const { return freq(ix, nx); }
    double fy(int iy) const { return freq(iy, ny); }
};

// 2D grid of complex amplitudes with pitch and wavelength metadata.
// Row-major storage, index (iy, ix) -> data[iy*nx + ix].
struct ComplexField {
    GridSpec grid;
    double wavelength = 0.0;  // meters
    std::vector<cd> data;

    ComplexField() = default;
    ComplexField(GridSpec g, double wl) : grid(g), wavelength(wl), data(g.count(), cd(0.0, 0.0)) {}

    static ComplexField constant(GridSpec g, double wl, cd value) {
        ComplexField f(g, wl);
        std::fill(f.data.begin(), f.data.end(), value);
        return f;
    }

    cd& at(int iy, int ix) { return data[static_cast<std::size_t>(iy) * grid.nx + ix]; }
    const cd& at(int iy, int ix) const { return data[static_cast<std::size_t>(iy) * grid.nx + ix]; }

    void validate() const {
        grid.validate();
        if (data.size() != grid.count())
            throw std::invalid_argument("ComplexField: data size does not match grid");
        if (!(wavelength > 0.0)) throw std::invalid_argument("ComplexField: wavelength must be > 0");
        for (const cd& v : data)
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
                throw std::invalid_argument("ComplexField: non-finite entry");
    }
};

// 2D grid of real phase values in radians (the SLM control variable).
struct PhasePattern {
    GridSpec grid;
    std::vector<double> phase;

    PhasePattern() = default;
    explicit PhasePattern(GridSpec g, double fill = 0.0) : grid(g), phase(g.count(), fill) {}

    double& at(int iy, int ix) { return phase[static_cast<std::size_t>(iy) * grid.nx + ix]; }
    const double& at(int iy, int ix) const { return phase[static_cast<std::size_t>(iy) * grid.nx + ix]; }

    // Canonical representation with every value wrapped into [0, 2*pi).
    PhasePattern wrapped() const {
        PhasePattern out(grid);
        for (std::size_t i = 0; i < phase.size(); ++i) out.phase[i] = wrap_phase(phase[i]);
        return out;
    }

    void validate() const {
        grid.validate();
        if (phase.size() != grid.count())
            throw std::invalid_argument("PhasePattern: size does not match grid");
        for (double v : phase)
            if (!std::isfinite(v)) throw std::invalid_argument("PhasePattern: non-finite entry");
    }
};

// Nonnegative target amplitude, max-normalized to 1.
struct TargetAmplitude {
    GridSpec grid;
    std::vector<double> amplitude;

    TargetAmplitude() = default;
    explicit TargetAmplitude(GridSpec g) : grid(g), amplitude(g.count(), 0.0) {}

    double& at(int iy, int ix) { return amplitude[static_cast<std::size_t>(iy) * grid.nx + ix]; }
    const double& at(int iy, int ix) const { return amplitude[static_cast<std::size_t>(iy) * grid.nx + ix]; }

    void validate() const {
        grid.validate();
        if (amplitude.size() != grid.count())
            throw std::invalid_argument("TargetAmplitude: size does not match grid");
        for (double v : amplitude)
            if (!std::isfinite(v) || v < 0.0 || v > 1.0)
                throw std::invalid_argument("TargetAmplitude: entries must lie in [0, 1]");
    }
};

// Plain nonnegative real image (captured intensities, amplitudes, ...).
struct RealImage {
    GridSpec grid;
    std::vector<double> v;

    RealImage() = default;
    explicit RealImage(GridSpec g, double fill = 0.0) : grid(g), v(g.count(), fill) {}

    double& at(int iy, int ix) { return v[static_cast<std::size_t>(iy) * grid.nx + ix]; }
    const double& at(int iy, int ix) const { return v[static_cast<std::size_t>(iy) * grid.nx + ix]; }

    double max() const {
        double m = 0.0;
        for (double x : v) m = std::max(m, x);
        return m;
    }
};

inline void require_same_grid(const GridSpec& a, const GridSpec& b, const char* what) {
    if (a != b) throw std::invalid_argument(std::string(what) + ": grid mismatch");
}

}  // namespace holo

#endif
