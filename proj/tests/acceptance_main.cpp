// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Heavier end-to-end runs reuse the shipped experiment presets.
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "holosim/experiment.hpp"
#include "holosim/fft.hpp"
#include "holosim/targets.hpp"
#include "oracles.hpp"

using namespace holo;
namespace fs = std::filesystem;

namespace {

struct Check {
    bool ok = true;
    std::string detail;

    void expect(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
};

std::string fmt(double v) {
    char b[64];
    std::snprintf(b, sizeof(b), "%.4g", v);
    return b;
}

fs::path out_root() {
    fs::path p = fs::temp_directory_path() / "holosim_acceptance";
    fs::create_directories(p);
    return p;
}

// -------------------------------------------------------------- criterion 1
Check propagation_correctness() {
    Check c;
    // brute-force evaluation of the transfer-function integral on 16x16
    {
        GridSpec g{16, 16, 1.0};
        PropagationSpec strong{0.5, 3.0, g, 1};
        PropagationSpec evan{1.5, 2.0, g, 1};
        ComplexField f1 = oracle::random_field(g, strong.wavelength, 101);
        ComplexField f2 = oracle::random_field(g, evan.wavelength, 102);
        const double e1 =
            oracle::rel_err(propagate(f1, strong).data, oracle::propagate_direct(f1, strong).data);
        const double e2 =
            oracle::rel_err(propagate(f2, evan).data, oracle::propagate_direct(f2, evan).data);
        c.expect(e1 < 1e-9, "oracle mismatch " + fmt(e1));
        c.expect(e2 < 1e-9, "oracle mismatch (evanescent) " + fmt(e2));

        GridSpec gp{16, 16, 6.4e-6};
        PropagationSpec paper{520e-9, 0.1, gp, 1};
        ComplexField f3 = oracle::random_field(gp, paper.wavelength, 103);
        const double e3 =
            oracle::rel_err(propagate(f3, paper).data, oracle::propagate_direct(f3, paper).data);
        c.expect(e3 < 1e-9, "oracle mismatch (paper scale) " + fmt(e3));
    }
    // energy conservation without evanescent loss
    {
        GridSpec g{24, 24, 6.4e-6};
        PropagationSpec spec{520e-9, 0.02, g, 1};
        ComplexField f = oracle::random_field(g, 520e-9, 104);
        const double before = oracle::energy(f.data);
        const double after = oracle::energy(propagate(f, spec).data);
        c.expect(std::abs(after - before) / before < 1e-10,
                 "energy drift " + fmt(std::abs(after - before) / before));
    }
    // adjoint inner-product identity, both pad factors
    for (int pad : {1, 2}) {
        GridSpec g{16, 16, 6.4e-6};
        PropagationSpec spec{520e-9, 0.04, g, pad};
        ComplexField x = oracle::random_field(g, 520e-9, 105 + pad);
        ComplexField y = oracle::random_field(g, 520e-9, 107 + pad);
        const cd lhs = oracle::inner(propagate(x, spec).data, y.data);
        const cd rhs = oracle::inner(x.data, propagate_adjoint(y, spec).data);
        const double err = std::abs(lhs - rhs) / std::abs(lhs);
        c.expect(err < 1e-10, "adjoint identity pad " + std::to_string(pad) + ": " + fmt(err));
    }
    return c;
}

// -------------------------------------------------------------- criterion 2
Check gradient_correctness() {
    Check c;
    const GridSpec g{32, 32, 6.4e-6};
    const PropagationSpec prop{520e-9, 0.04, g, 2};
    const double h = 1e-5;

    TargetAmplitude target(g);
    {
        Rng rng(21);
        for (double& v : target.amplitude) v = rng.uniform();
        target.amplitude[0] = 1.0;
    }
    HardwareProfile hw;
    hw.prop = prop;
    hw.source = ComplexField::constant(g, prop.wavelength, cd(1.0, 0.0));
    hw.slm1.eta = 0.8;
    hw.slm2.eta = 0.85;
    hw.slm2.shift_x = 0.6;
    hw.rng_seed = 4;

    for (bool dual : {false, true}) {
        for (bool citl : {false, true}) {
            PhasePattern p1 = oracle::random_phase(g, 300 + dual);
            PhasePattern p2 = oracle::random_phase(g, 400 + dual);
            PhasePattern* p2p = dual ? &p2 : nullptr;

            RealImage cap;
            RealImage a0(g);
            if (citl) {
                EmulatedCamera cam(hw);
                cap = cam.capture_amplitude(&p1, p2p, 0);
                ComplexField u0 = ideal_reconstruction(p1, p2p, prop);
                for (std::size_t i = 0; i < g.count(); ++i) a0.v[i] = std::abs(u0.data[i]);
            }
            LossGrad lg = loss_and_gradient(p1, p2p, target, prop, citl ? &cap : nullptr);
            double grad_inf = 0.0;
            for (double v : lg.grad1) grad_inf = std::max(grad_inf, std::abs(v));
            for (double v : lg.grad2) grad_inf = std::max(grad_inf, std::abs(v));

            auto eval_loss = [&]() {
                if (!citl) return loss_and_gradient(p1, p2p, target, prop).loss;
                ComplexField u = ideal_reconstruction(p1, p2p, prop);
                RealImage surr(g);
                for (std::size_t i = 0; i < g.count(); ++i)
                    surr.v[i] = cap.v[i] + std::abs(u.data[i]) - a0.v[i];
                return loss_and_gradient(p1, p2p, target, prop, &surr).loss;
            };

            Rng coords(500 + 2 * dual + citl);
            double worst = 0.0;
            for (int t = 0; t < 20; ++t) {
                const std::size_t idx = coords.next_u64() % g.count();
                const bool second = dual && (coords.next_u64() & 1);
                PhasePattern* m = second ? &p2 : &p1;
                const double base = m->phase[idx];
                m->phase[idx] = base + h;
                const double lp = eval_loss();
                m->phase[idx] = base - h;
                const double lm = eval_loss();
                m->phase[idx] = base;
                const double fd = (lp - lm) / (2.0 * h);
                const double an = second ? lg.grad2[idx] : lg.grad1[idx];
                const double denom = std::max({std::abs(an), std::abs(fd), 1e-6 * grad_inf});
                worst = std::max(worst, std::abs(an - fd) / denom);
            }
            c.expect(worst < 1e-4, std::string(dual ? "dual" : "single") +
                                       (citl ? "/citl" : "/model") + " fd err " + fmt(worst));
        }
    }
    return c;
}

// -------------------------------------------------------------- criterion 3
Check dpac_identity() {
    Check c;
    Rng rng(33);
    double worst = 0.0;
    for (int t = 0; t < 5000; ++t) {
        const double a = rng.uniform();
        const double phi = rng.uniform(kTwoPi);
        const double acos_a = std::acos(a);
        const cd sum = std::polar(1.0, phi - acos_a) + std::polar(1.0, phi + acos_a);
        worst = std::max(worst, std::abs(sum - 2.0 * a * std::polar(1.0, phi)));
    }
    c.expect(worst < 1e-12, "phasor identity err " + fmt(worst));

    // full-field check through the actual decomposition
    GridSpec g{32, 32, 6.4e-6};
    PropagationSpec prop{520e-9, 0.05, g, 1};
    TargetAmplitude target(g);
    for (std::size_t i = 0; i < g.count(); ++i) target.amplitude[i] = rng.uniform();
    target.amplitude[0] = 1.0;
    PhasePattern tp = make_quadratic_phase(g, prop.wavelength, -prop.distance);
    auto [phi1, phi2] = dpac_dual(target, tp, prop);
    ComplexField tf(g, prop.wavelength);
    for (std::size_t i = 0; i < g.count(); ++i)
        tf.data[i] = target.amplitude[i] * std::polar(1.0, tp.phase[i]);
    PropagationSpec back = prop;
    back.distance = -prop.distance;
    ComplexField u = propagate(tf, back);
    double peak = 0.0;
    for (const cd& v : u.data) peak = std::max(peak, std::abs(v));
    double worst_field = 0.0;
    for (std::size_t i = 0; i < g.count(); ++i) {
        const cd sum = 0.5 * (std::polar(1.0, phi1.phase[i]) + std::polar(1.0, phi2.phase[i]));
        worst_field = std::max(worst_field, std::abs(sum - u.data[i] / peak));
    }
    c.expect(worst_field < 1e-12, "field reconstruction err " + fmt(worst_field));
    return c;
}

// ----------------------------------------------------- criteria 4/5 helpers
struct SweepTable {
    // psnr keyed by (method, axis, value)
    std::map<std::string, double> psnr;

    static std::string key(const std::string& m, const std::string& axis, double v) {
        char b[96];
        std::snprintf(b, sizeof(b), "%s|%s|%.6g", m.c_str(), axis.c_str(), v);
        return b;
    }
    double at(const std::string& m, const std::string& axis, double v) const {
        auto it = psnr.find(key(m, axis, v));
        if (it == psnr.end()) throw std::runtime_error("missing sweep row: " + key(m, axis, v));
        return it->second;
    }
};

SweepTable run_sweep(ExperimentConfig cfg) {
    ExperimentOutput out = run_experiment(cfg);
    SweepTable t;
    for (const auto& r : out.rows) {
        if (r.status != "ok") throw std::runtime_error(r.method + ": " + r.status);
        t.psnr[SweepTable::key(r.method, r.axis, r.value)] = r.psnr_db;
    }
    return t;
}

// -------------------------------------------------------------- criterion 4
Check fig2_properties() {
    Check c;
    ExperimentConfig cfg = make_preset("fig2");
    cfg.out_dir = (out_root() / "fig2").string();
    cfg.workers = 2;
    SweepTable t = run_sweep(cfg);
    const std::string ax = "one_minus_eta";

    const double citl2_0 = t.at("citl2", ax, 0.0);
    const double sgd2_0 = t.at("sgd2", ax, 0.0);
    c.expect(std::abs(citl2_0 - sgd2_0) <= 0.1,
             "(a) citl2 vs sgd2 at 0: " + fmt(std::abs(citl2_0 - sgd2_0)) + " dB");

    bool monotone = true;
    const std::vector<double> om = {0.1, 0.2, 0.3, 0.4, 0.5};
    for (std::size_t i = 1; i < om.size(); ++i)
        if (!(t.at("dpac2", ax, om[i]) < t.at("dpac2", ax, om[i - 1]))) monotone = false;
    c.expect(monotone, "(b) dpac2 not strictly decreasing in 1-eta");

    const double citl2_5 = t.at("citl2", ax, 0.5);
    c.expect(citl2_0 - citl2_5 < 3.0,
             "(c) citl2 drop 0 -> 0.5 is " + fmt(citl2_0 - citl2_5) + " dB (allowed < 3)");

    const double c2 = t.at("citl2", ax, 0.2), c1 = t.at("citl1", ax, 0.2);
    const double s2 = t.at("sgd2", ax, 0.2), d2 = t.at("dpac2", ax, 0.2);
    c.expect(c2 > c1 && c1 > s2 && s2 > d2,
             "(d) ordering at 0.2: citl2=" + fmt(c2) + " citl1=" + fmt(c1) + " sgd2=" + fmt(s2) +
                 " dpac2=" + fmt(d2));
    return c;
}

// -------------------------------------------------------------- criterion 5
Check fig5_properties() {
    Check c;
    ExperimentConfig cfg = make_preset("fig5");
    cfg.out_dir = (out_root() / "fig5").string();
    cfg.workers = 2;
    SweepTable t = run_sweep(cfg);
    const double px = cfg.grid.pitch;

    const double dpac_drop = t.at("dpac2", "lateral", 0.0) - t.at("dpac2", "lateral", 1.0);
    const double sgd_drop = t.at("sgd2", "lateral", 0.0) - t.at("sgd2", "lateral", 1.0);
    c.expect(dpac_drop > sgd_drop, "dpac2 1px-lateral drop " + fmt(dpac_drop) +
                                       " dB vs sgd2 " + fmt(sgd_drop) + " dB");

    for (double off : {0.25, 0.5, 1.0, 2.0}) {
        const double citl = t.at("citl2", "lateral", off);
        const double other = std::max(t.at("dpac2", "lateral", off), t.at("sgd2", "lateral", off));
        c.expect(citl > other, "citl2 not on top at lateral " + fmt(off) + "px (" + fmt(citl) +
                                   " vs " + fmt(other) + ")");
    }
    for (double offpx : {0.25, 0.5, 1.0, 2.0, 4.0}) {
        const double citl = t.at("citl2", "axial", offpx * px);
        const double other =
            std::max(t.at("dpac2", "axial", offpx * px), t.at("sgd2", "axial", offpx * px));
        c.expect(citl > other, "citl2 not on top at axial " + fmt(offpx) + "px (" + fmt(citl) +
                                   " vs " + fmt(other) + ")");
    }
    const double citl_drop = t.at("citl2", "lateral", 0.0) - t.at("citl2", "lateral", 1.0);
    c.expect(citl_drop < 5.0, "citl2 1px-lateral drop " + fmt(citl_drop) + " dB (allowed < 5)");
    return c;
}

// -------------------------------------------------------------- criterion 6
Check fig3_properties() {
    Check c;
    ExperimentConfig cfg = make_preset("fig3");
    cfg.out_dir = (out_root() / "fig3").string();
    ExperimentOutput out = run_experiment(cfg);

    // iteration-0 capture of the tilted profile shows a dominant non-DC peak
    {
        PropagationSpec prop{cfg.wavelengths[0], cfg.z, cfg.grid, cfg.pad_factor};
        HardwareProfile hw;
        hw.prop = prop;
        hw.source = ComplexField::constant(cfg.grid, prop.wavelength, cd(1.0, 0.0));
        hw.slm1.eta = cfg.hardware.slm1.eta;
        hw.slm2.eta = cfg.hardware.slm2.eta;
        hw.slm2.tilt_x = cfg.hardware.slm2.tilt_x;
        PhasePattern zero(cfg.grid);
        RealImage img = capture(&zero, &zero, hw);
        std::vector<cd> profile(cfg.grid.nx, cd(0.0, 0.0));
        for (int x = 0; x < cfg.grid.nx; ++x) {
            double mean = 0.0;
            for (int y = 0; y < cfg.grid.ny; ++y) mean += img.at(y, x);
            profile[x] = cd(mean / cfg.grid.ny, 0.0);
        }
        auto bin_mag = [&](int k) {
            cd acc(0.0, 0.0);
            for (int x = 0; x < cfg.grid.nx; ++x)
                acc += profile[x] * std::polar(1.0, -kTwoPi * k * x / double(cfg.grid.nx));
            return std::abs(acc);
        };
        double best = 0.0;
        for (int k = 1; k < cfg.grid.nx / 2; ++k) best = std::max(best, bin_mag(k));
        c.expect(best > 0.2 * bin_mag(0),
                 "no dominant non-DC peak (ratio " + fmt(best / bin_mag(0)) + ")");
    }

    auto psnr_at = [&](int iter) {
        for (const auto& r : out.rows)
            if (int(r.value) == iter) return r.psnr_db;
        throw std::runtime_error("missing fringe row");
    };
    const double p30 = psnr_at(30), p100 = psnr_at(100), p500 = psnr_at(500);
    c.expect(p100 > p30, "psnr(100)=" + fmt(p100) + " !> psnr(30)=" + fmt(p30));
    c.expect(p500 > p100, "psnr(500)=" + fmt(p500) + " !> psnr(100)=" + fmt(p100));
    return c;
}

// -------------------------------------------------------------- criterion 7
Check table1_properties() {
    Check c;
    ExperimentConfig cfg = make_preset("table1");
    cfg.out_dir = (out_root() / "table1").string();
    cfg.workers = 2;
    ExperimentOutput out = run_experiment(cfg);

    std::map<std::pair<std::string, int>, double> michelson;
    for (const auto& r : out.rows) {
        if (r.status != "ok") {
            c.expect(false, r.method + ": " + r.status);
            continue;
        }
        michelson[{r.method, int(std::lround(r.wavelength_nm))}] = r.michelson;
    }
    for (int wl : {638, 520, 450}) {
        const double m_citl2 = michelson[{"citl2", wl}];
        const double m_citl1 = michelson[{"citl1", wl}];
        const double m_sgd1 = michelson[{"sgd1", wl}];
        c.expect(m_citl2 > m_citl1 && m_citl1 > m_sgd1,
                 std::to_string(wl) + "nm: citl2=" + fmt(m_citl2) + " citl1=" + fmt(m_citl1) +
                     " sgd1=" + fmt(m_sgd1));
    }
    return c;
}

// -------------------------------------------------------------- criterion 8
Check calibration_accuracy() {
    Check c;
    GridSpec g{128, 128, 6.4e-6};
    TargetAmplitude dots = make_builtin_target("builtin:dots?spacing=32&sigma=2", g);
    RealImage img(g);
    for (std::size_t i = 0; i < img.v.size(); ++i)
        img.v[i] = dots.amplitude[i] * dots.amplitude[i];

    // synthetic integer and half-integer shifts in [-4, 4]
    double worst = 0.0;
    for (double s = -4.0; s <= 4.0; s += 0.5) {
        ComplexField f(g, 1.0);
        for (std::size_t i = 0; i < img.v.size(); ++i) f.data[i] = cd(img.v[i], 0.0);
        ComplexField sh = lateral_shift_field(f, s, -s);
        RealImage shifted(g);
        for (std::size_t i = 0; i < img.v.size(); ++i) shifted.v[i] = sh.data[i].real();
        AlignmentEstimate est = estimate_shift(img, shifted);
        worst = std::max({worst, std::abs(est.dx - s), std::abs(est.dy + s)});
    }
    c.expect(worst <= 0.1, "synthetic shift err " + fmt(worst) + " px");

    // end-to-end: emulator with slm2 shifted by (1.5, 0)
    {
        PropagationSpec prop{520e-9, 0.05, g, 1};
        HardwareProfile hw;
        hw.prop = prop;
        hw.source = ComplexField::constant(g, prop.wavelength, cd(1.0, 0.0));
        hw.slm1.eta = 0.8;
        hw.slm2.eta = 0.8;
        hw.slm2.shift_x = 1.5;
        PhasePattern probe = phase_only_hologram(
            dots, make_quadratic_phase(g, prop.wavelength, -prop.distance), prop);
        AlignmentEstimate est = estimate_shift(capture(&probe, nullptr, hw),
                                               capture(nullptr, &probe, hw));
        const double err = std::max(std::abs(est.dx - 1.5), std::abs(est.dy));
        c.expect(err <= 0.1, "end-to-end shift err " + fmt(err) + " px");
    }
    return c;
}

// -------------------------------------------------------------- criterion 9
Check determinism() {
    Check c;
    ExperimentConfig base;
    base.kind = ExperimentKind::EfficiencySweep;
    base.grid = {96, 96, 6.4e-6};
    base.z = 0.1;
    base.pad_factor = 1;
    base.target = "builtin:resolution_chart";
    base.methods = {Method::Citl2, Method::Sgd1, Method::Dpac2};
    base.sweep_one_minus_eta = {0.0, 0.2};
    base.hardware.camera.noise_sigma = 0.01;
    base.hardware.camera.bit_depth = 12;
    base.solver.iterations = 15;

    auto normalized_csv = [&](const fs::path& p) {
        std::ifstream in(p);
        std::stringstream all;
        std::string line;
        int lineno = 0;
        int runtime_col = -1;
        while (std::getline(in, line)) {
            if (lineno == 1) {
                std::stringstream hs(line);
                std::string cell;
                int col = 0;
                while (std::getline(hs, cell, ',')) {
                    if (cell == "runtime_s") runtime_col = col;
                    ++col;
                }
            }
            if (lineno >= 2 && runtime_col >= 0) {
                std::stringstream ls(line);
                std::string cell;
                int col = 0;
                while (std::getline(ls, cell, ',')) {
                    all << (col == runtime_col ? std::string("-") : cell) << ',';
                    ++col;
                }
                all << '\n';
            } else {
                all << line << '\n';
            }
            ++lineno;
        }
        return all.str();
    };

    std::vector<std::string> texts;
    int i = 0;
    for (int workers : {1, 2, 1}) {
        ExperimentConfig cfg = base;
        cfg.workers = workers;
        cfg.out_dir = (out_root() / ("det" + std::to_string(i++))).string();
        fs::remove_all(cfg.out_dir);
        run_experiment(cfg);
        texts.push_back(normalized_csv(fs::path(cfg.out_dir) / "results.csv"));
    }
    c.expect(!texts[0].empty(), "empty results.csv");
    c.expect(texts[0] == texts[1], "workers 1 vs 2 differ");
    c.expect(texts[0] == texts[2], "repeat run differs");
    return c;
}

}  // namespace

int main() {
    struct Item {
        int number;
        std::string name;
        std::function<Check()> fn;
        double budget_s;  // 0 = no stated budget
    };
    const std::vector<Item> items = {
        {1, "propagation-correctness", propagation_correctness, 1.0},
        {2, "gradient-correctness", gradient_correctness, 10.0},
        {3, "dpac-identity", dpac_identity, 0.0},
        {4, "fig2-efficiency-sweep", fig2_properties, 900.0},
        {5, "fig5-misalignment-sweep", fig5_properties, 900.0},
        {6, "fig3-fringe-convergence", fig3_properties, 120.0},
        {7, "table1-contrast-ordering", table1_properties, 0.0},
        {8, "calibration-shift-recovery", calibration_accuracy, 0.0},
        {9, "determinism-across-workers", determinism, 0.0},
    };

    int failures = 0;
    for (const auto& item : items) {
        const auto t0 = std::chrono::steady_clock::now();
        Check c;
        try {
            c = item.fn();
        } catch (const std::exception& e) {
            c.ok = false;
            c.detail = std::string("exception: ") + e.what();
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (item.budget_s > 0.0 && secs > item.budget_s) {
            c.ok = false;
            if (!c.detail.empty()) c.detail += "; ";
            c.detail += "runtime " + fmt(secs) + "s exceeds " + fmt(item.budget_s) + "s";
        }
        std::printf("[%s] %d. %s (%.1f s)%s%s\n", c.ok ? "PASS" : "FAIL", item.number,
                    item.name.c_str(), secs, c.detail.empty() ? "" : " -- ",
                    c.detail.c_str());
        std::fflush(stdout);
        if (!c.ok) ++failures;
    }
    std::printf("%d/%zu criteria passed\n", int(items.size()) - failures, items.size());
    return failures;
}
