#ifndef HOLOSIM_METRICS_HPP
#define HOLOSIM_METRICS_HPP

#include "holosim/field.hpp"

namespace holo {

enum class PsnrMode { Amplitude, Intensity };

// Peak signal-to-noise ratio against the normalized target (peak = 1).
// The reconstruction is an amplitude image already scaled by the loss's
// closed-form s; Intensity mode compares squared values. Returns +inf
// when the error is exactly zero.
double psnr(const RealImage& reconstruction, const TargetAmplitude& target, PsnrMode mode);

struct ContrastReport {
    double weber = 0.0;      // (i_max - i_min) / i_min, +inf when i_min = 0
    double michelson = 0.0;  // (i_max - i_min) / (i_max + i_min)
    double i_max = 0.0;
    double i_min = 0.0;
};

enum class Axis { X, Y };

// Contrast of a captured sinusoidal pattern of known period. Extrema are the
// means of per-period 95th/5th percentiles (nearest-rank over each period
// slab), which tolerates isolated hot pixels.
ContrastReport contrast_from_sinusoid(const RealImage& captured, double period_px, Axis axis);

struct AlignmentEstimate {
    double dx = 0.0;  // pixels, sub-pixel
    double dy = 0.0;
    double confidence = 0.0;  // phase-correlation peak in [0, 1]
};

// Sub-pixel translation of b relative to a (b(p) ~= a(p - d)) via phase
// correlation with parabolic peak interpolation. Throws when the correlation
// peak falls below 0.1 (calibration failed).
AlignmentEstimate estimate_shift(const RealImage& img_a, const RealImage& img_b);

// Pre-compensation counterpart of estimate_shift: resamples the pattern by
// (-dx, -dy) so the shifted arm lands registered at the target plane.
// Integer shifts are exact circular reindexing; sub-pixel shifts use
// bilinear interpolation of the phasor e^{i phi} with periodic wrap.
PhasePattern apply_alignment(const PhasePattern& phi, const AlignmentEstimate& est);

}  // namespace holo

#endif
