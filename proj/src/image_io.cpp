#include "holosim/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

namespace holo {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

ImageData read_png(const std::string& path) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw std::runtime_error("cannot open image file: " + path);

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw std::runtime_error("png_create_read_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw std::runtime_error("png_create_info_struct failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error("failed to decode PNG: " + path);
    }

    png_init_io(png, fp.get());
    png_read_info(png, info);

    png_uint_32 width = png_get_image_width(png, info);
    png_uint_32 height = png_get_image_height(png, info);
    int bit_depth = png_get_bit_depth(png, info);
    int color_type = png_get_color_type(png, info);

    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    if (bit_depth == 16) png_set_swap(png);  // PNG is big-endian on disk

    png_read_update_info(png, info);
    bit_depth = png_get_bit_depth(png, info);
    int channels = png_get_channels(png, info);

    std::vector<png_byte> row(png_get_rowbytes(png, info));
    ImageData img;
    img.width = static_cast<int>(width);
    img.height = static_cast<int>(height);
    img.channels = channels;
    img.pixels.resize(static_cast<std::size_t>(width) * height * channels);

    const double full = bit_depth == 16 ? 65535.0 : 255.0;
    for (png_uint_32 y = 0; y < height; ++y) {
        png_read_row(png, row.data(), nullptr);
        for (png_uint_32 x = 0; x < width; ++x) {
            for (int c = 0; c < channels; ++c) {
                double v;
                if (bit_depth == 16) {
                    const std::uint16_t* r16 = reinterpret_cast<const std::uint16_t*>(row.data());
                    v = r16[x * channels + c] / full;
                } else {
                    v = row[x * channels + c] / full;
                }
                img.pixels[(static_cast<std::size_t>(y) * width + x) * channels + c] = v;
            }
        }
    }
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

int pgm_next_int(std::istream& in) {
    // skip whitespace and '#' comments
    for (;;) {
        int c = in.peek();
        if (c == '#') {
            std::string line;
            std::getline(in, line);
        } else if (std::isspace(c)) {
            in.get();
        } else {
            break;
        }
    }
    int value = -1;
    in >> value;
    if (!in) throw std::runtime_error("malformed PGM header");
    return value;
}

ImageData read_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open image file: " + path);
    char p = 0, kind = 0;
    in.get(p);
    in.get(kind);
    if (p != 'P' || (kind != '2' && kind != '5')) throw std::runtime_error("not a PGM file: " + path);

    int width = pgm_next_int(in);
    int height = pgm_next_int(in);
    int maxval = pgm_next_int(in);
    if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 65535)
        throw std::runtime_error("malformed PGM header: " + path);

    ImageData img;
    img.width = width;
    img.height = height;
    img.channels = 1;
    img.pixels.resize(static_cast<std::size_t>(width) * height);

    const std::size_t n = img.pixels.size();
    if (kind == '2') {
        for (std::size_t i = 0; i < n; ++i) img.pixels[i] = pgm_next_int(in) / double(maxval);
    } else {
        in.get();  // single whitespace after maxval
        if (maxval < 256) {
            std::vector<unsigned char> buf(n);
            in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n));
            if (!in) throw std::runtime_error("truncated PGM data: " + path);
            for (std::size_t i = 0; i < n; ++i) img.pixels[i] = buf[i] / double(maxval);
        } else {
            std::vector<unsigned char> buf(2 * n);
            in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(2 * n));
            if (!in) throw std::runtime_error("truncated PGM data: " + path);
            for (std::size_t i = 0; i < n; ++i) {
                int v = (buf[2 * i] << 8) | buf[2 * i + 1];  // big-endian per spec
                img.pixels[i] = v / double(maxval);
            }
        }
    }
    return img;
}

bool has_suffix(const std::string& s, const std::string& suf) {
    if (s.size() < suf.size()) return false;
    std::string tail = s.substr(s.size() - suf.size());
    std::transform(tail.begin(), tail.end(), tail.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return tail == suf;
}

double srgb_to_linear(double v) {
    return v <= 0.04045 ? v / 12.92 : std::pow((v + 0.055) / 1.055, 2.4);
}

// Bilinear resample of a single-channel intensity raster to (ow, oh).
std::vector<double> resample_bilinear(const std::vector<double>& src, int w, int h, int ow, int oh) {
    std::vector<double> out(static_cast<std::size_t>(ow) * oh);
    const double sx = double(w) / ow;
    const double sy = double(h) / oh;
    for (int y = 0; y < oh; ++y) {
        double fy = (y + 0.5) * sy - 0.5;
        int y0 = static_cast<int>(std::floor(fy));
        double wy = fy - y0;
        int y1 = std::min(y0 + 1, h - 1);
        y0 = std::clamp(y0, 0, h - 1);
        for (int x = 0; x < ow; ++x) {
            double fx = (x + 0.5) * sx - 0.5;
            int x0 = static_cast<int>(std::floor(fx));
            double wx = fx - x0;
            int x1 = std::min(x0 + 1, w - 1);
            x0 = std::clamp(x0, 0, w - 1);
            double a = src[static_cast<std::size_t>(y0) * w + x0] * (1 - wx) +
                       src[static_cast<std::size_t>(y0) * w + x1] * wx;
            double b = src[static_cast<std::size_t>(y1) * w + x0] * (1 - wx) +
                       src[static_cast<std::size_t>(y1) * w + x1] * wx;
            out[static_cast<std::size_t>(y) * ow + x] = a * (1 - wy) + b * wy;
        }
    }
    return out;
}

void write_png_impl(const std::string& path, int width, int height, int channels,
                    const std::vector<unsigned char>& bytes) {
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw std::runtime_error("cannot open for writing: " + path);
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw std::runtime_error("png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw std::runtime_error("png_create_info_struct failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error("failed to encode PNG: " + path);
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, width, height, 8,
                 channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int y = 0; y < height; ++y)
        png_write_row(png, const_cast<png_bytep>(bytes.data() + static_cast<std::size_t>(y) * width * channels));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

unsigned char to_byte(double v) {
    double c = std::clamp(v, 0.0, 1.0);
    return static_cast<unsigned char>(std::lround(c * 255.0));
}

}  // namespace

ImageData read_image(const std::string& path) {
    if (has_suffix(path, ".pgm")) return read_pgm(path);
    if (has_suffix(path, ".png")) return read_png(path);
    throw std::runtime_error("unsupported image format (expect .png or .pgm): " + path);
}

void write_png_gray8(const std::string& path, const RealImage& image) {
    std::vector<unsigned char> bytes(image.grid.count());
    for (std::size_t i = 0; i < bytes.size(); ++i) bytes[i] = to_byte(image.v[i]);
    write_png_impl(path, image.grid.nx, image.grid.ny, 1, bytes);
}

void write_png_rgb8(const std::string& path, const RealImage& r, const RealImage& g,
                    const RealImage& b) {
    require_same_grid(r.grid, g.grid, "write_png_rgb8");
    require_same_grid(r.grid, b.grid, "write_png_rgb8");
    std::vector<unsigned char> bytes(r.grid.count() * 3);
    for (std::size_t i = 0; i < r.grid.count(); ++i) {
        bytes[3 * i + 0] = to_byte(r.v[i]);
        bytes[3 * i + 1] = to_byte(g.v[i]);
        bytes[3 * i + 2] = to_byte(b.v[i]);
    }
    write_png_impl(path, r.grid.nx, r.grid.ny, 3, bytes);
}

TargetAmplitude load_target(const std::string& path, const GridSpec& grid,
                            const LoadTargetOptions& opts) {
    grid.validate();
    ImageData img = read_image(path);

    // collapse to one linear-intensity channel
    std::vector<double> intensity(static_cast<std::size_t>(img.width) * img.height);
    int c0 = 0, c1 = img.channels;
    if (opts.channel) {
        if (*opts.channel < 0 || *opts.channel >= img.channels)
            throw std::invalid_argument("load_target: channel index out of range");
        c0 = *opts.channel;
        c1 = c0 + 1;
    }
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            double acc = 0.0;
            for (int c = c0; c < c1; ++c) {
                double v = img.at(y, x, c);
                acc += opts.srgb ? srgb_to_linear(v) : v;
            }
            intensity[static_cast<std::size_t>(y) * img.width + x] = acc / (c1 - c0);
        }
    }

    // fit into the grid, preserving aspect, centered with zero padding
    std::vector<double> fitted;
    int ow = img.width, oh = img.height;
    if (img.width == grid.nx && img.height == grid.ny) {
        fitted = std::move(intensity);
    } else {
        double scale = std::min(double(grid.nx) / img.width, double(grid.ny) / img.height);
        ow = std::max(1, static_cast<int>(std::lround(img.width * scale)));
        oh = std::max(1, static_cast<int>(std::lround(img.height * scale)));
        fitted = resample_bilinear(intensity, img.width, img.height, ow, oh);
    }

    TargetAmplitude target(grid);
    int offx = (grid.nx - ow) / 2;
    int offy = (grid.ny - oh) / 2;
    for (int y = 0; y < oh; ++y)
        for (int x = 0; x < ow; ++x)
            target.at(y + offy, x + offx) =
                std::sqrt(std::max(0.0, fitted[static_cast<std::size_t>(y) * ow + x]));

    double m = 0.0;
    for (double v : target.amplitude) m = std::max(m, v);
    if (m <= 0.0) throw std::runtime_error("load_target: all-black target rejected: " + path);
    for (double& v : target.amplitude) v /= m;
    return target;
}

}  // namespace holo
