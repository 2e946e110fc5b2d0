#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "holosim/propagation.hpp"
#include "oracles.hpp"

using namespace holo;

TEST_CASE("asm_transfer at z = 0 is 1 on propagating frequencies, 0 on evanescent") {
    // coarse nonphysical sampling so part of the band is evanescent
    PropagationSpec spec{1.5, 0.0, GridSpec{16, 16, 1.0}, 1};
    std::vector<cd> h = asm_transfer(spec);
    int evanescent = 0;
    for (int iy = 0; iy < 16; ++iy)
        for (int ix = 0; ix < 16; ++ix) {
            const double fx = spec.grid.fx(ix), fy = spec.grid.fy(iy);
            const cd v = h[iy * 16 + ix];
            if (std::sqrt(fx * fx + fy * fy) < 1.0 / spec.wavelength) {
                CHECK(v == cd(1.0, 0.0));
            } else {
                CHECK(v == cd(0.0, 0.0));
                ++evanescent;
            }
        }
    CHECK(evanescent > 0);
}

TEST_CASE("asm_transfer at DC is the on-axis plane-wave phase") {
    PropagationSpec spec{520e-9, 0.03, GridSpec{8, 8, 6.4e-6}, 1};
    std::vector<cd> h = asm_transfer(spec);
    const cd dc = h[4 * 8 + 4];  // centered DC sample
    const double expect = kTwoPi / spec.wavelength * spec.distance;
    CHECK(dc.real() == doctest::Approx(std::cos(expect)).epsilon(1e-12));
    CHECK(dc.imag() == doctest::Approx(std::sin(expect)).epsilon(1e-12));
}

TEST_CASE("paper geometry has no evanescent frequencies: |H| = 1 on a 1080p grid") {
    PropagationSpec spec{520e-9, 0.1, GridSpec{1920, 1080, 6.4e-6}, 1};
    std::vector<cd> h = asm_transfer(spec);
    double min_mag = 2.0, max_mag = 0.0;
    for (const cd& v : h) {
        const double m = std::abs(v);
        min_mag = std::min(min_mag, m);
        max_mag = std::max(max_mag, m);
    }
    CHECK(min_mag == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(max_mag == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("H is even in frequency") {
    PropagationSpec spec{1.2, 2.5, GridSpec{16, 12, 1.0}, 1};
    std::vector<cd> h = asm_transfer(spec);
    const int nx = 16, ny = 12, cx = 8, cy = 6;
    for (int iy = 1; iy < ny; ++iy)
        for (int ix = 1; ix < nx; ++ix) {
            const cd a = h[iy * nx + ix];
            const cd b = h[(2 * cy - iy) * nx + (2 * cx - ix)];
            CHECK(std::abs(a - b) < 1e-15);
        }
}

TEST_CASE("constant field propagates as a plane wave") {
    GridSpec g{16, 16, 6.4e-6};
    PropagationSpec spec{520e-9, 0.01, g, 1};
    ComplexField one = ComplexField::constant(g, spec.wavelength, cd(1.0, 0.0));
    ComplexField out = propagate(one, spec);
    const cd expect = std::polar(1.0, kTwoPi / spec.wavelength * spec.distance);
    for (const cd& v : out.data) CHECK(std::abs(v - expect) < 1e-10);
}

TEST_CASE("propagate matches the direct Eq-style summation oracle") {
    // strongly curved phases: coarse sampling, large wavelength fraction
    for (std::uint64_t seed : {1u, 2u}) {
        GridSpec g{16, 16, 1.0};
        PropagationSpec spec{0.5, 3.0, g, 1};
        ComplexField f = oracle::random_field(g, spec.wavelength, seed);
        ComplexField got = propagate(f, spec);
        ComplexField want = oracle::propagate_direct(f, spec);
        CHECK(oracle::rel_err(got.data, want.data) < 1e-9);
    }
    // with an evanescent corner
    {
        GridSpec g{16, 16, 1.0};
        PropagationSpec spec{1.5, 2.0, g, 1};
        ComplexField f = oracle::random_field(g, spec.wavelength, 3);
        CHECK(oracle::rel_err(propagate(f, spec).data,
                              oracle::propagate_direct(f, spec).data) < 1e-9);
    }
    // paper-like scale
    {
        GridSpec g{16, 16, 6.4e-6};
        PropagationSpec spec{520e-9, 0.1, g, 1};
        ComplexField f = oracle::random_field(g, spec.wavelength, 4);
        CHECK(oracle::rel_err(propagate(f, spec).data,
                              oracle::propagate_direct(f, spec).data) < 1e-9);
    }
}

TEST_CASE("propagate round trip z then -z is the identity (no evanescent, pad 1)") {
    GridSpec g{32, 32, 6.4e-6};
    PropagationSpec fwd{520e-9, 0.05, g, 1};
    PropagationSpec bwd{520e-9, -0.05, g, 1};
    ComplexField f = oracle::random_field(g, 520e-9, 7);
    ComplexField back = propagate(propagate(f, fwd), bwd);
    CHECK(oracle::rel_err(back.data, f.data) < 1e-10);
}

TEST_CASE("energy conservation without evanescent loss, pad 1") {
    GridSpec g{24, 24, 6.4e-6};
    PropagationSpec spec{520e-9, 0.02, g, 1};
    ComplexField f = oracle::random_field(g, 520e-9, 8);
    ComplexField out = propagate(f, spec);
    CHECK(oracle::energy(out.data) ==
          doctest::Approx(oracle::energy(f.data)).epsilon(1e-10));
}

TEST_CASE("composition: z1 then z2 equals z1+z2 (pad 1)") {
    GridSpec g{16, 16, 6.4e-6};
    ComplexField f = oracle::random_field(g, 520e-9, 9);
    PropagationSpec s1{520e-9, 0.03, g, 1};
    PropagationSpec s2{520e-9, 0.045, g, 1};
    PropagationSpec s12{520e-9, 0.075, g, 1};
    ComplexField two_step = propagate(propagate(f, s1), s2);
    ComplexField one_step = propagate(f, s12);
    CHECK(oracle::rel_err(two_step.data, one_step.data) < 1e-9);
}

TEST_CASE("adjoint inner-product identity <Px, y> = <x, P*y>") {
    for (int pad : {1, 2}) {
        GridSpec g{16, 16, 6.4e-6};
        PropagationSpec spec{520e-9, 0.04, g, pad};
        ComplexField x = oracle::random_field(g, 520e-9, 20 + pad);
        ComplexField y = oracle::random_field(g, 520e-9, 30 + pad);
        ComplexField px = propagate(x, spec);
        ComplexField py = propagate_adjoint(y, spec);
        const cd lhs = oracle::inner(px.data, y.data);
        const cd rhs = oracle::inner(x.data, py.data);
        CHECK(std::abs(lhs - rhs) / std::abs(lhs) < 1e-10);
    }
    // coarse grid with evanescent components
    {
        GridSpec g{12, 16, 1.0};
        PropagationSpec spec{1.5, 2.0, g, 2};
        ComplexField x = oracle::random_field(g, 1.5, 40);
        ComplexField y = oracle::random_field(g, 1.5, 41);
        const cd lhs = oracle::inner(propagate(x, spec).data, y.data);
        const cd rhs = oracle::inner(x.data, propagate_adjoint(y, spec).data);
        CHECK(std::abs(lhs - rhs) / std::abs(lhs) < 1e-10);
    }
}

TEST_CASE("for unitary H and pad 1 the adjoint equals back-propagation") {
    GridSpec g{16, 16, 6.4e-6};
    PropagationSpec fwd{520e-9, 0.02, g, 1};
    PropagationSpec bwd{520e-9, -0.02, g, 1};
    ComplexField y = oracle::random_field(g, 520e-9, 50);
    CHECK(oracle::rel_err(propagate_adjoint(y, fwd).data, propagate(y, bwd).data) < 1e-12);
}

TEST_CASE("z = 0 with pad 1 is the identity") {
    GridSpec g{16, 16, 6.4e-6};
    PropagationSpec spec{520e-9, 0.0, g, 1};
    ComplexField f = oracle::random_field(g, 520e-9, 60);
    CHECK(oracle::rel_err(propagate(f, spec).data, f.data) < 1e-12);
    CHECK(oracle::rel_err(propagate_adjoint(f, spec).data, f.data) < 1e-12);
}

TEST_CASE("grid and wavelength mismatches are rejected") {
    GridSpec g{16, 16, 6.4e-6};
    PropagationSpec spec{520e-9, 0.01, g, 1};
    ComplexField wrong_grid = ComplexField::constant(GridSpec{8, 8, 6.4e-6}, 520e-9, cd(1, 0));
    CHECK_THROWS_AS(propagate(wrong_grid, spec), std::invalid_argument);
    ComplexField wrong_wl = ComplexField::constant(g, 638e-9, cd(1, 0));
    CHECK_THROWS_AS(propagate(wrong_wl, spec), std::invalid_argument);
    PropagationSpec bad_pad{520e-9, 0.01, g, 3};
    ComplexField ok = ComplexField::constant(g, 520e-9, cd(1, 0));
    CHECK_THROWS_AS(propagate(ok, bad_pad), std::invalid_argument);
}
