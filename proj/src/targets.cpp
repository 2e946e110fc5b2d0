#include "holosim/targets.hpp"

#include <map>
#include <stdexcept>

namespace holo {

namespace {

struct BuiltinSpec {
    std::string name;
    std::map<std::string, double> params;

    double get(const std::string& key, double fallback) const {
        auto it = params.find(key);
        return it == params.end() ? fallback : it->second;
    }
};

BuiltinSpec parse_builtin(const std::string& full) {
    BuiltinSpec spec;
    std::string rest = full.substr(std::string("builtin:").size());
    auto qpos = rest.find('?');
    spec.name = rest.substr(0, qpos);
    if (qpos != std::string::npos) {
        std::string query = rest.substr(qpos + 1);
        std::size_t pos = 0;
        while (pos < query.size()) {
            auto amp = query.find('&', pos);
            std::string kv = query.substr(pos, amp == std::string::npos ? std::string::npos : amp - pos);
            auto eq = kv.find('=');
            if (eq == std::string::npos) throw std::invalid_argument("builtin target: bad query: " + full);
            spec.params[kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
            pos = amp == std::string::npos ? query.size() : amp + 1;
        }
    }
    return spec;
}

void fill_rect(TargetAmplitude& t, double x0, double y0, double x1, double y1, double value) {
    const int ax = static_cast<int>(x0 * t.grid.nx), bx = static_cast<int>(x1 * t.grid.nx);
    const int ay = static_cast<int>(y0 * t.grid.ny), by = static_cast<int>(y1 * t.grid.ny);
    for (int y = std::max(0, ay); y < std::min(t.grid.ny, by); ++y)
        for (int x = std::max(0, ax); x < std::min(t.grid.nx, bx); ++x) t.at(y, x) = value;
}

// vertical or horizontal bars of the given pixel period inside a rect
void fill_bars(TargetAmplitude& t, double x0, double y0, double x1, double y1, int period,
               bool vertical) {
    const int ax = static_cast<int>(x0 * t.grid.nx), bx = static_cast<int>(x1 * t.grid.nx);
    const int ay = static_cast<int>(y0 * t.grid.ny), by = static_cast<int>(y1 * t.grid.ny);
    for (int y = std::max(0, ay); y < std::min(t.grid.ny, by); ++y)
        for (int x = std::max(0, ax); x < std::min(t.grid.nx, bx); ++x) {
            const int c = vertical ? x : y;
            t.at(y, x) = (c / std::max(1, period / 2)) % 2 == 0 ? 1.0 : 0.0;
        }
}

// bright bar groups and blocks on a dark field, emissive-display style
TargetAmplitude resolution_chart(const GridSpec& grid) {
    TargetAmplitude t(grid);
    // frame
    fill_rect(t, 0.03, 0.03, 0.97, 0.05, 1.0);
    fill_rect(t, 0.03, 0.95, 0.97, 0.97, 1.0);
    fill_rect(t, 0.03, 0.03, 0.05, 0.97, 1.0);
    fill_rect(t, 0.95, 0.03, 0.97, 0.97, 1.0);
    // vertical bar groups, coarse to fine
    fill_bars(t, 0.10, 0.10, 0.28, 0.28, 24, true);
    fill_bars(t, 0.36, 0.10, 0.54, 0.28, 12, true);
    fill_bars(t, 0.62, 0.10, 0.80, 0.28, 6, true);
    // horizontal bar groups
    fill_bars(t, 0.10, 0.36, 0.28, 0.54, 24, false);
    fill_bars(t, 0.36, 0.36, 0.54, 0.54, 12, false);
    fill_bars(t, 0.62, 0.36, 0.80, 0.54, 6, false);
    // gray staircase
    for (int k = 0; k < 8; ++k)
        fill_rect(t, 0.10 + 0.10 * k, 0.62, 0.10 + 0.10 * (k + 1), 0.72, (k + 1) / 8.0);
    // solid blocks and a fine checkerboard patch
    fill_rect(t, 0.10, 0.78, 0.30, 0.92, 1.0);
    fill_rect(t, 0.36, 0.78, 0.56, 0.92, 0.5);
    {
        const int ax = static_cast<int>(0.62 * grid.nx), bx = static_cast<int>(0.82 * grid.nx);
        const int ay = static_cast<int>(0.78 * grid.ny), by = static_cast<int>(0.92 * grid.ny);
        for (int y = ay; y < by; ++y)
            for (int x = ax; x < bx; ++x) t.at(y, x) = ((x / 2) + (y / 2)) % 2 == 0 ? 1.0 : 0.0;
    }
    return t;
}

TargetAmplitude grating(const GridSpec& grid, double period) {
    if (!(period > 0.0)) throw std::invalid_argument("builtin grating: period must be > 0");
    TargetAmplitude t(grid);
    for (int y = 0; y < grid.ny; ++y)
        for (int x = 0; x < grid.nx; ++x)
            t.at(y, x) = std::abs(std::cos(kPi * x / period));  // intensity 0.5+0.5cos(2pi x/T)
    return t;
}

TargetAmplitude dots(const GridSpec& grid, double spacing, double sigma) {
    if (!(spacing > 1.0)) throw std::invalid_argument("builtin dots: spacing must be > 1");
    TargetAmplitude t(grid);
    // Gaussian beam-extent envelope; a strictly periodic lattice would make
    // translation estimation ambiguous (equal correlation peaks per period)
    const double ex = 0.35 * grid.nx, ey = 0.35 * grid.ny;
    const int cx = grid.nx / 2, cy = grid.ny / 2;
    double peak = 0.0;
    for (int y = 0; y < grid.ny; ++y)
        for (int x = 0; x < grid.nx; ++x) {
            // distance to the nearest lattice point (offset by spacing/2)
            double rx = std::fmod(x + spacing / 2.0, spacing) - spacing / 2.0;
            double ry = std::fmod(y + spacing / 2.0, spacing) - spacing / 2.0;
            double dot = std::exp(-(rx * rx + ry * ry) / (2.0 * sigma * sigma));
            double env = std::exp(-((x - cx) * (x - cx) / (2.0 * ex * ex) +
                                    (y - cy) * (y - cy) / (2.0 * ey * ey)));
            t.at(y, x) = dot * env;
            peak = std::max(peak, t.at(y, x));
        }
    for (double& v : t.amplitude) v /= peak;
    return t;
}

TargetAmplitude checkerboard(const GridSpec& grid, int cell) {
    TargetAmplitude t(grid);
    for (int y = 0; y < grid.ny; ++y)
        for (int x = 0; x < grid.nx; ++x)
            t.at(y, x) = ((x / cell) + (y / cell)) % 2 == 0 ? 1.0 : 0.0;
    return t;
}

}  // namespace

bool is_builtin_target(const std::string& name) { return name.rfind("builtin:", 0) == 0; }

TargetAmplitude make_builtin_target(const std::string& name, const GridSpec& grid) {
    grid.validate();
    if (!is_builtin_target(name)) throw std::invalid_argument("not a builtin target: " + name);
    BuiltinSpec spec = parse_builtin(name);
    if (spec.name == "resolution_chart") return resolution_chart(grid);
    if (spec.name == "grating") return grating(grid, spec.get("period", 16.0));
    if (spec.name == "dots") return dots(grid, spec.get("spacing", 32.0), spec.get("sigma", 2.0));
    if (spec.name == "checkerboard")
        return checkerboard(grid, std::max(1, static_cast<int>(spec.get("cell", 8.0))));
    throw std::invalid_argument("unknown builtin target: " + name);
}

}  // namespace holo
