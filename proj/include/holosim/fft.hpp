#ifndef HOLOSIM_FFT_HPP
#define HOLOSIM_FFT_HPP

#include "holosim/field.hpp"

namespace holo {

// Unitary 2D DFT with the DC sample at index (ny/2, nx/2).
// fft2_centered and ifft2_centered compose to the identity, and both
// preserve the l2 norm (Parseval holds exactly up to rounding).
ComplexField fft2_centered(const ComplexField& field);
ComplexField ifft2_centered(const ComplexField& field);

namespace detail {

// Raw in-place transforms on row-major ny x nx data, natural (unshifted)
// ordering, unnormalized. sign = -1 forward, +1 backward.
void dft2_inplace(int ny, int nx, cd* data, int sign);

// Circular roll: out(y, x) = in(y - sy mod ny, x - sx mod nx).
void roll2(int ny, int nx, const cd* in, cd* out, int sy, int sx);

// Centered transforms on raw buffers, unitary. Scratch must hold ny*nx.
void fft2_centered_buf(int ny, int nx, cd* data, cd* scratch, int sign);

}  // namespace detail

}  // namespace holo

#endif
