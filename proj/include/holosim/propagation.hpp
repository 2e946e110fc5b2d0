#ifndef HOLOSIM_PROPAGATION_HPP
#define HOLOSIM_PROPAGATION_HPP

#include <memory>

#include "holosim/field.hpp"

namespace holo {

// Parameters of angular-spectrum free-space propagation between parallel
// planes. distance is signed; negative values back-propagate. pad_factor 2
// suppresses the wrap-around of the circular convolution, pad_factor 1 is
// the plain periodic transform (useful for oracle tests).
struct PropagationSpec {
    double wavelength = 0.0;  // meters
    double distance = 0.0;    // meters, signed
    GridSpec grid;
    int pad_factor = 2;

    GridSpec padded_grid() const { return {grid.nx * pad_factor, grid.ny * pad_factor, grid.pitch}; }

    bool operator==(const PropagationSpec& o) const {
        return wavelength == o.wavelength && distance == o.distance && grid == o.grid &&
               pad_factor == o.pad_factor;
    }

    void validate() const {
        grid.validate();
        if (!(wavelength > 0.0) || !std::isfinite(wavelength))
            throw std::invalid_argument("PropagationSpec: wavelength must be > 0");
        if (!std::isfinite(distance)) throw std::invalid_argument("PropagationSpec: bad distance");
        if (pad_factor != 1 && pad_factor != 2)
            throw std::invalid_argument("PropagationSpec: pad_factor must be 1 or 2");
    }
};

// Frequency-domain transfer mask H(fx, fy) sampled on the (padded) centered
// frequency grid: exp(i 2pi/lambda sqrt(1 - (lambda fx)^2 - (lambda fy)^2) z)
// on propagating frequencies, 0 on evanescent ones.
std::vector<cd> asm_transfer(const PropagationSpec& spec);

// Repeated-use propagator: caches the transfer mask and reuses scratch
// buffers. One instance per run/worker; instances are not safe for
// concurrent calls but distinct instances are.
class Propagator {
public:
    explicit Propagator(const PropagationSpec& spec);

    const PropagationSpec& spec() const { return spec_; }

    ComplexField forward(const ComplexField& in);
    // Conjugate-transpose of forward (exact adjoint including pad/crop).
    ComplexField adjoint(const ComplexField& in);

private:
    ComplexField apply(const ComplexField& in, bool conjugate);

    PropagationSpec spec_;
    std::shared_ptr<const std::vector<cd>> transfer_;  // natural (FFT) ordering
    std::vector<cd> buf_a_, buf_b_;
};

// One-shot conveniences (transfer masks are memoized process-wide).
ComplexField propagate(const ComplexField& field, const PropagationSpec& spec);
ComplexField propagate_adjoint(const ComplexField& cotangent, const PropagationSpec& spec);

}  // namespace holo

#endif
