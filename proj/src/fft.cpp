#include "holosim/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>

namespace holo {
namespace detail {

namespace {

// FFTW plan creation is not thread safe; execution via fftw_execute_dft on
// distinct buffers is. Plans use FFTW_ESTIMATE so the chosen algorithm (and
// therefore the exact rounding of results) is identical from run to run.
class PlanCache {
public:
    static PlanCache& instance() {
        static PlanCache c;
        return c;
    }

    fftw_plan get(int ny, int nx, int sign) {
        std::lock_guard<std::mutex> lock(mutex_);
        auto key = std::make_tuple(ny, nx, sign);
        auto it = plans_.find(key);
        if (it != plans_.end()) return it->second;
        fftw_plan p = fftw_plan_dft_2d(ny, nx, nullptr, nullptr,
                                       sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD,
                                       FFTW_ESTIMATE | FFTW_UNALIGNED);
        plans_.emplace(key, p);
        return p;
    }

private:
    PlanCache() = default;
    std::mutex mutex_;
    std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

}  // namespace

void dft2_inplace(int ny, int nx, cd* data, int sign) {
    fftw_plan plan = PlanCache::instance().get(ny, nx, sign);
    fftw_complex* p = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(plan, p, p);
}

void roll2(int ny, int nx, const cd* in, cd* out, int sy, int sx) {
    sy = ((sy % ny) + ny) % ny;
    sx = ((sx % nx) + nx) % nx;
    for (int y = 0; y < ny; ++y) {
        int ys = (y + sy) % ny;
        const cd* src = in + static_cast<std::size_t>(y) * nx;
        cd* dst = out + static_cast<std::size_t>(ys) * nx;
        // dst row is src row rotated right by sx
        for (int x = 0; x < nx; ++x) dst[(x + sx) % nx] = src[x];
    }
}

void fft2_centered_buf(int ny, int nx, cd* data, cd* scratch, int sign) {
    const int cy = ny / 2, cx = nx / 2;
    // move the center sample to the origin
    roll2(ny, nx, data, scratch, -cy, -cx);
    dft2_inplace(ny, nx, scratch, sign);
    // move DC back to the center and apply the unitary scale
    roll2(ny, nx, scratch, data, cy, cx);
    const double scale = 1.0 / std::sqrt(static_cast<double>(ny) * static_cast<double>(nx));
    const std::size_t n = static_cast<std::size_t>(ny) * nx;
    for (std::size_t i = 0; i < n; ++i) data[i] *= scale;
}

}  // namespace detail

ComplexField fft2_centered(const ComplexField& field) {
    ComplexField out = field;
    std::vector<cd> scratch(field.grid.count());
    detail::fft2_centered_buf(field.grid.ny, field.grid.nx, out.data.data(), scratch.data(), -1);
    return out;
}

ComplexField ifft2_centered(const ComplexField& field) {
    ComplexField out = field;
    std::vector<cd> scratch(field.grid.count());
    detail::fft2_centered_buf(field.grid.ny, field.grid.nx, out.data.data(), scratch.data(), +1);
    return out;
}

}  // namespace holo
