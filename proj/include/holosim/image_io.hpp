#ifndef HOLOSIM_IMAGE_IO_HPP
#define HOLOSIM_IMAGE_IO_HPP

#include <optional>
#include <string>
#include <vector>

#include "holosim/field.hpp"

namespace holo {

// Decoded raster with per-channel linear values in [0, 1].
struct ImageData {
    int width = 0;
    int height = 0;
    int channels = 0;  // 1 (gray) or 3 (rgb)
    std::vector<double> pixels;  // interleaved, size = width*height*channels

    double at(int y, int x, int c) const {
        return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
};

// Reads an 8- or 16-bit PNG or PGM file. Values are divided by the file's
// full-scale maximum; no gamma decoding is applied here.
ImageData read_image(const std::string& path);

// Writes values clamped to [0, 1] as an 8-bit grayscale PNG.
void write_png_gray8(const std::string& path, const RealImage& image);

// Writes three clamped channels as an 8-bit RGB PNG (grids must agree).
void write_png_rgb8(const std::string& path, const RealImage& r, const RealImage& g,
                    const RealImage& b);

struct LoadTargetOptions {
    std::optional<int> channel;  // pick one channel of a color image; unset = channel mean
    bool srgb = false;           // decode sRGB to linear before the sqrt
};

// Loads an image as a target amplitude: linear intensity from file, resampled
// and zero-padded to the grid, converted to amplitude via square root, then
// max-normalized to 1. Rejects all-black images.
TargetAmplitude load_target(const std::string& path, const GridSpec& grid,
                            const LoadTargetOptions& opts = {});

}  // namespace holo

#endif
