#ifndef HOLOSIM_TARGETS_HPP
#define HOLOSIM_TARGETS_HPP

#include <string>

#include "holosim/field.hpp"

namespace holo {

// True for "builtin:..." target names.
bool is_builtin_target(const std::string& name);

// Procedural targets so experiments run without image assets:
//   builtin:resolution_chart           bar groups, steps, blocks
//   builtin:grating?period=16          |cos(pi x / T)| (sinusoidal intensity)
//   builtin:dots?spacing=32&sigma=2    Gaussian dot lattice (calibration)
//   builtin:checkerboard?cell=8        binary checkerboard
TargetAmplitude make_builtin_target(const std::string& name, const GridSpec& grid);

}  // namespace holo

#endif
