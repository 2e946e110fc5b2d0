#include "holosim/experiment.hpp"

#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <thread>

#include "holosim/image_io.hpp"
#include "holosim/rng.hpp"
#include "holosim/targets.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace holo {

namespace {

constexpr std::uint64_t kEvalCaptureIndex = 1ULL << 40;

std::string fmt_g(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

std::string fmt_runtime(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

std::string csv_safe(std::string s) {
    for (char& c : s)
        if (c == ',' || c == '\n' || c == '\r') c = ';';
    return s;
}

}  // namespace

std::string to_string(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::SingleRun: return "single_run";
        case ExperimentKind::EfficiencySweep: return "efficiency_sweep";
        case ExperimentKind::MisalignmentSweep: return "misalignment_sweep";
        case ExperimentKind::FringeConvergence: return "fringe_convergence";
        case ExperimentKind::ContrastEval: return "contrast_eval";
    }
    return "?";
}

std::string to_string(Method m) {
    switch (m) {
        case Method::Dpac1: return "dpac1";
        case Method::Dpac2: return "dpac2";
        case Method::Sgd1: return "sgd1";
        case Method::Sgd2: return "sgd2";
        case Method::Citl1: return "citl1";
        case Method::Citl2: return "citl2";
    }
    return "?";
}

ExperimentKind kind_from_string(const std::string& s) {
    if (s == "single_run") return ExperimentKind::SingleRun;
    if (s == "efficiency_sweep") return ExperimentKind::EfficiencySweep;
    if (s == "misalignment_sweep") return ExperimentKind::MisalignmentSweep;
    if (s == "fringe_convergence") return ExperimentKind::FringeConvergence;
    if (s == "contrast_eval") return ExperimentKind::ContrastEval;
    throw std::invalid_argument("unknown experiment kind: " + s);
}

Method method_from_string(const std::string& s) {
    if (s == "dpac1") return Method::Dpac1;
    if (s == "dpac2") return Method::Dpac2;
    if (s == "sgd1") return Method::Sgd1;
    if (s == "sgd2") return Method::Sgd2;
    if (s == "citl1") return Method::Citl1;
    if (s == "citl2") return Method::Citl2;
    throw std::invalid_argument("unknown method: " + s);
}

namespace {

bool is_dual(Method m) { return m == Method::Dpac2 || m == Method::Sgd2 || m == Method::Citl2; }
bool is_citl(Method m) { return m == Method::Citl1 || m == Method::Citl2; }
bool is_dpac(Method m) { return m == Method::Dpac1 || m == Method::Dpac2; }

}  // namespace

void ExperimentConfig::validate() const {
    grid.validate();
    if (schema_version != 1) throw std::invalid_argument("config: unsupported schema_version");
    if (wavelengths.empty()) throw std::invalid_argument("config: wavelengths must be non-empty");
    for (double wl : wavelengths)
        if (!(wl > 0.0)) throw std::invalid_argument("config: wavelengths must be > 0");
    if (methods.empty()) throw std::invalid_argument("config: methods must be non-empty");
    if (pad_factor != 1 && pad_factor != 2) throw std::invalid_argument("config: pad_factor must be 1 or 2");
    if (!(z != 0.0) || !std::isfinite(z)) throw std::invalid_argument("config: z must be nonzero");
    if (workers < 1) throw std::invalid_argument("config: workers must be >= 1");
    if (!eta_per_wavelength.empty() && eta_per_wavelength.size() != wavelengths.size())
        throw std::invalid_argument("config: eta_per_wavelength size must match wavelengths");
    if (!eta_per_wavelength_slm2.empty() && eta_per_wavelength_slm2.size() != wavelengths.size())
        throw std::invalid_argument("config: eta_per_wavelength_slm2 size must match wavelengths");
    if (!nonlinearity_per_wavelength.empty() &&
        nonlinearity_per_wavelength.size() != wavelengths.size())
        throw std::invalid_argument(
            "config: nonlinearity_per_wavelength size must match wavelengths");
    if (dpac_target_phase != "quadratic" && dpac_target_phase != "zero")
        throw std::invalid_argument("config: dpac_target_phase must be quadratic or zero");
    solver.validate();
    if (kind == ExperimentKind::EfficiencySweep) {
        if (sweep_one_minus_eta.empty())
            throw std::invalid_argument("config: efficiency_sweep needs sweep.one_minus_eta values");
        for (double v : sweep_one_minus_eta)
            if (!(v >= 0.0 && v < 1.0))
                throw std::invalid_argument("config: one_minus_eta values must be in [0, 1)");
    }
    if (kind == ExperimentKind::MisalignmentSweep &&
        sweep_lateral_px.empty() && sweep_axial_m.empty())
        throw std::invalid_argument("config: misalignment_sweep needs lateral_px or axial_m values");
    if (kind == ExperimentKind::FringeConvergence) {
        if (!is_citl(methods.front()))
            throw std::invalid_argument("config: fringe_convergence needs a citl method first");
        const SlmConfig& s2 = hardware.slm2;
        if (s2.tilt_x == 0.0 && s2.tilt_y == 0.0 && s2.axial_shift == 0.0)
            throw std::invalid_argument(
                "config: fringe_convergence needs a nonzero slm2 tilt or axial offset");
        if (checkpoints.empty())
            throw std::invalid_argument("config: fringe_convergence needs checkpoints");
    }
    if (kind == ExperimentKind::ContrastEval && !(grating_period_px > 0.0))
        throw std::invalid_argument("config: grating_period_px must be > 0");
}

namespace {

int parse_levels(const json& j) {
    if (j.is_string()) {
        if (j.get<std::string>() == "continuous") return 0;
        throw std::invalid_argument("phase_levels: expected integer or \"continuous\"");
    }
    return j.get<int>();
}

int parse_depth(const json& j) {
    if (j.is_string()) {
        if (j.get<std::string>() == "ideal") return 0;
        throw std::invalid_argument("bit_depth: expected integer or \"ideal\"");
    }
    return j.get<int>();
}

SlmConfig slm_from_json(const json& j) {
    SlmConfig s;
    s.eta = j.value("eta", 1.0);
    if (j.contains("phase_levels")) s.phase_levels = parse_levels(j.at("phase_levels"));
    if (j.contains("lateral_shift")) {
        auto v = j.at("lateral_shift");
        s.shift_x = v.at(0).get<double>();
        s.shift_y = v.at(1).get<double>();
    }
    s.axial_shift = j.value("axial_shift", 0.0);
    s.phase_nonlinearity = j.value("phase_nonlinearity", 0.0);
    if (j.contains("tilt")) {
        auto v = j.at("tilt");
        s.tilt_x = v.at(0).get<double>();
        s.tilt_y = v.at(1).get<double>();
    }
    return s;
}

json slm_to_json(const SlmConfig& s) {
    json j;
    j["eta"] = s.eta;
    if (s.phase_levels == 0)
        j["phase_levels"] = "continuous";
    else
        j["phase_levels"] = s.phase_levels;
    j["lateral_shift"] = {s.shift_x, s.shift_y};
    j["axial_shift"] = s.axial_shift;
    j["tilt"] = {s.tilt_x, s.tilt_y};
    j["phase_nonlinearity"] = s.phase_nonlinearity;
    return j;
}

InitMode init_from_string(const std::string& s) {
    if (s == "uniform_random_phase") return InitMode::UniformRandomPhase;
    if (s == "zero") return InitMode::Zero;
    if (s == "dpac_seed") return InitMode::DpacSeed;
    throw std::invalid_argument("unknown init_mode: " + s);
}

std::string init_to_string(InitMode m) {
    switch (m) {
        case InitMode::UniformRandomPhase: return "uniform_random_phase";
        case InitMode::Zero: return "zero";
        case InitMode::DpacSeed: return "dpac_seed";
    }
    return "?";
}

}  // namespace

ExperimentConfig config_from_json_text(const std::string& text) {
    json j = json::parse(text);
    ExperimentConfig cfg;
    cfg.schema_version = j.value("schema_version", 1);
    cfg.kind = kind_from_string(j.at("kind").get<std::string>());
    cfg.target = j.value("target", cfg.target);
    cfg.srgb = j.value("srgb", false);
    if (j.contains("grid")) {
        cfg.grid.nx = j["grid"].value("nx", 256);
        cfg.grid.ny = j["grid"].value("ny", 256);
        cfg.grid.pitch = j["grid"].value("pitch", 6.4e-6);
    }
    if (j.contains("wavelengths")) cfg.wavelengths = j["wavelengths"].get<std::vector<double>>();
    cfg.z = j.value("z", 0.1);
    cfg.pad_factor = j.value("pad_factor", 2);
    cfg.methods.clear();
    for (const auto& m : j.at("methods")) cfg.methods.push_back(method_from_string(m.get<std::string>()));
    if (j.contains("sweep")) {
        const json& sw = j["sweep"];
        if (sw.contains("one_minus_eta")) cfg.sweep_one_minus_eta = sw["one_minus_eta"].get<std::vector<double>>();
        if (sw.contains("lateral_px")) cfg.sweep_lateral_px = sw["lateral_px"].get<std::vector<double>>();
        if (sw.contains("axial_m")) cfg.sweep_axial_m = sw["axial_m"].get<std::vector<double>>();
    }
    if (j.contains("hardware")) {
        const json& h = j["hardware"];
        if (h.contains("slm1")) cfg.hardware.slm1 = slm_from_json(h["slm1"]);
        if (h.contains("slm2")) cfg.hardware.slm2 = slm_from_json(h["slm2"]);
        if (h.contains("camera")) {
            const json& c = h["camera"];
            cfg.hardware.camera.noise_sigma = c.value("noise_sigma", 0.0);
            if (c.contains("bit_depth")) cfg.hardware.camera.bit_depth = parse_depth(c["bit_depth"]);
            cfg.hardware.camera.exposure_scale = c.value("exposure_scale", 1.0);
        }
        cfg.hardware.rng_seed = h.value("rng_seed", std::uint64_t(1234));
    }
    if (j.contains("solver")) {
        const json& s = j["solver"];
        cfg.solver.iterations = s.value("iterations", 500);
        if (s.contains("step_size") && !s["step_size"].is_null())
            cfg.solver.step_size = s["step_size"].get<double>();
        cfg.solver.momentum = s.value("momentum", 0.9);
        if (s.contains("init_mode")) cfg.solver.init_mode = init_from_string(s["init_mode"]);
        if (s.contains("loss") && s["loss"].get<std::string>() != "mse")
            throw std::invalid_argument("config: only the mse loss is supported");
        if (s.contains("scale_mode")) {
            std::string sm = s["scale_mode"].get<std::string>();
            if (sm == "closed_form") {
                cfg.solver.scale_mode = ScaleMode::ClosedForm;
            } else if (sm == "fixed") {
                cfg.solver.scale_mode = ScaleMode::Fixed;
                cfg.solver.fixed_scale = s.value("fixed_scale", 1.0);
            } else {
                throw std::invalid_argument("unknown scale_mode: " + sm);
            }
        }
        cfg.solver.rng_seed = s.value("rng_seed", std::uint64_t(7));
    }
    if (j.contains("checkpoints")) cfg.checkpoints = j["checkpoints"].get<std::vector<int>>();
    cfg.grating_period_px = j.value("grating_period_px", 16.0);
    if (j.contains("eta_per_wavelength"))
        cfg.eta_per_wavelength = j["eta_per_wavelength"].get<std::vector<double>>();
    if (j.contains("eta_per_wavelength_slm2"))
        cfg.eta_per_wavelength_slm2 = j["eta_per_wavelength_slm2"].get<std::vector<double>>();
    if (j.contains("nonlinearity_per_wavelength"))
        cfg.nonlinearity_per_wavelength =
            j["nonlinearity_per_wavelength"].get<std::vector<double>>();
    cfg.dpac_target_phase = j.value("dpac_target_phase", std::string("quadratic"));
    cfg.calibrate_citl = j.value("calibrate_citl", false);
    if (j.contains("psnr_mode")) {
        std::string pm = j["psnr_mode"].get<std::string>();
        if (pm == "intensity") cfg.psnr_mode = PsnrMode::Intensity;
        else if (pm == "amplitude") cfg.psnr_mode = PsnrMode::Amplitude;
        else throw std::invalid_argument("unknown psnr_mode: " + pm);
    }
    cfg.out_dir = j.value("out_dir", std::string("out"));
    cfg.workers = j.value("workers", 1);
    cfg.validate();
    return cfg;
}

std::string config_to_json_text(const ExperimentConfig& cfg) {
    json j;
    j["schema_version"] = cfg.schema_version;
    j["kind"] = to_string(cfg.kind);
    j["target"] = cfg.target;
    j["srgb"] = cfg.srgb;
    j["grid"] = {{"nx", cfg.grid.nx}, {"ny", cfg.grid.ny}, {"pitch", cfg.grid.pitch}};
    j["wavelengths"] = cfg.wavelengths;
    j["z"] = cfg.z;
    j["pad_factor"] = cfg.pad_factor;
    json methods = json::array();
    for (Method m : cfg.methods) methods.push_back(to_string(m));
    j["methods"] = methods;
    json sweep;
    if (!cfg.sweep_one_minus_eta.empty()) sweep["one_minus_eta"] = cfg.sweep_one_minus_eta;
    if (!cfg.sweep_lateral_px.empty()) sweep["lateral_px"] = cfg.sweep_lateral_px;
    if (!cfg.sweep_axial_m.empty()) sweep["axial_m"] = cfg.sweep_axial_m;
    if (!sweep.is_null()) j["sweep"] = sweep;
    j["hardware"] = {{"slm1", slm_to_json(cfg.hardware.slm1)},
                     {"slm2", slm_to_json(cfg.hardware.slm2)},
                     {"camera",
                      {{"noise_sigma", cfg.hardware.camera.noise_sigma},
                       {"bit_depth", cfg.hardware.camera.bit_depth == 0
                                         ? json("ideal")
                                         : json(cfg.hardware.camera.bit_depth)},
                       {"exposure_scale", cfg.hardware.camera.exposure_scale}}},
                     {"rng_seed", cfg.hardware.rng_seed}};
    json solver;
    solver["iterations"] = cfg.solver.iterations;
    solver["step_size"] = cfg.solver.step_size ? json(*cfg.solver.step_size) : json(nullptr);
    solver["momentum"] = cfg.solver.momentum;
    solver["init_mode"] = init_to_string(cfg.solver.init_mode);
    solver["loss"] = "mse";
    solver["scale_mode"] = cfg.solver.scale_mode == ScaleMode::ClosedForm ? "closed_form" : "fixed";
    if (cfg.solver.scale_mode == ScaleMode::Fixed) solver["fixed_scale"] = cfg.solver.fixed_scale;
    solver["rng_seed"] = cfg.solver.rng_seed;
    j["solver"] = solver;
    j["checkpoints"] = cfg.checkpoints;
    j["grating_period_px"] = cfg.grating_period_px;
    if (!cfg.eta_per_wavelength.empty()) j["eta_per_wavelength"] = cfg.eta_per_wavelength;
    if (!cfg.eta_per_wavelength_slm2.empty())
        j["eta_per_wavelength_slm2"] = cfg.eta_per_wavelength_slm2;
    if (!cfg.nonlinearity_per_wavelength.empty())
        j["nonlinearity_per_wavelength"] = cfg.nonlinearity_per_wavelength;
    j["dpac_target_phase"] = cfg.dpac_target_phase;
    j["calibrate_citl"] = cfg.calibrate_citl;
    j["psnr_mode"] = cfg.psnr_mode == PsnrMode::Intensity ? "intensity" : "amplitude";
    j["out_dir"] = cfg.out_dir;
    j["workers"] = cfg.workers;
    return j.dump(2);
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return config_from_json_text(text);
}

ExperimentConfig make_preset(const std::string& name) {
    ExperimentConfig cfg;
    cfg.grid = {256, 256, 6.4e-6};
    cfg.z = 0.1;
    // the exact circular operator; at this aperture/distance a padded window
    // cannot contain the diffraction spread anyway (see README notes)
    cfg.pad_factor = 1;
    cfg.wavelengths = {520e-9};
    cfg.solver.iterations = 500;
    cfg.solver.momentum = 0.9;
    cfg.solver.rng_seed = 7;
    cfg.hardware.rng_seed = 1234;
    cfg.workers = 2;
    if (name == "fig2") {
        cfg.kind = ExperimentKind::EfficiencySweep;
        cfg.target = "builtin:resolution_chart";
        cfg.methods = {Method::Dpac2, Method::Sgd2, Method::Citl1, Method::Citl2};
        cfg.sweep_one_minus_eta = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5};
        cfg.out_dir = "out_fig2";
    } else if (name == "fig5") {
        cfg.kind = ExperimentKind::MisalignmentSweep;
        cfg.target = "builtin:resolution_chart";
        cfg.methods = {Method::Dpac2, Method::Sgd2, Method::Citl2};
        cfg.hardware.slm1.eta = 0.8;
        cfg.hardware.slm2.eta = 0.8;
        cfg.sweep_lateral_px = {0.0, 0.25, 0.5, 1.0, 2.0};
        const double px = cfg.grid.pitch;
        cfg.sweep_axial_m = {0.0, 0.25 * px, 0.5 * px, 1.0 * px, 2.0 * px, 4.0 * px};
        cfg.solver.init_mode = InitMode::Zero;
        cfg.calibrate_citl = true;
        cfg.out_dir = "out_fig5";
    } else if (name == "fig3") {
        cfg.kind = ExperimentKind::FringeConvergence;
        cfg.target = "builtin:resolution_chart";
        cfg.methods = {Method::Citl2};
        cfg.hardware.slm1.eta = 0.8;
        cfg.hardware.slm2.eta = 0.8;
        cfg.hardware.slm2.tilt_x = kTwoPi * 4.0 / 256.0;  // 4 fringe cycles across the frame
        cfg.solver.init_mode = InitMode::Zero;
        cfg.solver.momentum = 0.0;  // creeps monotonically into the plateau
        cfg.checkpoints = {0, 30, 100, 500};
        cfg.out_dir = "out_fig3";
    } else if (name == "table1") {
        cfg.kind = ExperimentKind::ContrastEval;
        cfg.target = "builtin:grating?period=16";
        cfg.grating_period_px = 16.0;
        cfg.wavelengths = {638e-9, 520e-9, 450e-9};
        cfg.eta_per_wavelength = {0.92, 0.88, 0.78};  // slm1, blue worst
        cfg.eta_per_wavelength_slm2 = {0.95, 0.95, 0.95};  // the second panel is cleaner
        cfg.nonlinearity_per_wavelength = {1.2, 1.8, 2.6};  // slm1 LUT degrades toward blue
        cfg.hardware.slm2.phase_nonlinearity = 0.3;
        cfg.solver.init_mode = InitMode::Zero;
        cfg.methods = {Method::Sgd1, Method::Citl1, Method::Citl2};
        cfg.out_dir = "out_table1";
    } else {
        throw std::invalid_argument("unknown preset: " + name + " (expect fig2|fig5|fig3|table1)");
    }
    cfg.validate();
    return cfg;
}

namespace {

struct Job {
    Method method;
    int wl_index = 0;
    std::string axis;  // "", "one_minus_eta", "lateral", "axial"
    double value = 0.0;
    std::size_t order = 0;
};

struct JobResult {
    ResultRow row;
    RunRecord record;
    bool ok = false;
};

TargetAmplitude resolve_target(const ExperimentConfig& cfg, int wl_index) {
    if (is_builtin_target(cfg.target)) return make_builtin_target(cfg.target, cfg.grid);
    LoadTargetOptions opts;
    opts.srgb = cfg.srgb;
    if (cfg.wavelengths.size() > 1) {
        ImageData probe = read_image(cfg.target);
        if (probe.channels >= 3) opts.channel = std::min<int>(wl_index, probe.channels - 1);
    }
    return load_target(cfg.target, cfg.grid, opts);
}

HardwareProfile materialize_hardware(const ExperimentConfig& cfg, const Job& job,
                                     const PropagationSpec& prop) {
    auto to_profile = [](const SlmConfig& s) {
        SlmProfile p;
        p.eta = s.eta;
        p.phase_levels = s.phase_levels;
        p.shift_x = s.shift_x;
        p.shift_y = s.shift_y;
        p.axial_shift = s.axial_shift;
        p.tilt_x = s.tilt_x;
        p.tilt_y = s.tilt_y;
        p.phase_nonlinearity = s.phase_nonlinearity;
        return p;
    };
    HardwareProfile hw;
    hw.slm1 = to_profile(cfg.hardware.slm1);
    hw.slm2 = to_profile(cfg.hardware.slm2);
    hw.camera.noise_sigma = cfg.hardware.camera.noise_sigma;
    hw.camera.bit_depth = cfg.hardware.camera.bit_depth;
    hw.camera.exposure_scale = cfg.hardware.camera.exposure_scale;
    if (!cfg.eta_per_wavelength.empty()) {
        hw.slm1.eta = cfg.eta_per_wavelength[job.wl_index];
        hw.slm2.eta = cfg.eta_per_wavelength_slm2.empty()
                          ? cfg.eta_per_wavelength[job.wl_index]
                          : cfg.eta_per_wavelength_slm2[job.wl_index];
    }
    if (!cfg.nonlinearity_per_wavelength.empty())
        hw.slm1.phase_nonlinearity = cfg.nonlinearity_per_wavelength[job.wl_index];
    if (job.axis == "one_minus_eta") {
        hw.slm1.eta = 1.0 - job.value;
        hw.slm2.eta = 1.0 - job.value;
    } else if (job.axis == "lateral") {
        hw.slm2.shift_x = job.value;
    } else if (job.axis == "axial") {
        hw.slm2.axial_shift = job.value;
    }
    hw.prop = prop;
    hw.source = ComplexField::constant(prop.grid, prop.wavelength, cd(1.0, 0.0));
    hw.rng_seed = mix_seed(cfg.hardware.rng_seed, 0x80u + std::uint64_t(job.wl_index));
    return hw;
}

std::string job_tag(const ExperimentConfig& cfg, const Job& job) {
    char buf[96];
    const double wl_nm = cfg.wavelengths[job.wl_index] * 1e9;
    if (job.axis.empty()) {
        std::snprintf(buf, sizeof(buf), "%s_%.4gnm", to_string(job.method).c_str(), wl_nm);
    } else if (job.axis == "one_minus_eta") {
        std::snprintf(buf, sizeof(buf), "%s_%.4gnm_om%.4g", to_string(job.method).c_str(), wl_nm,
                      job.value);
    } else if (job.axis == "lateral") {
        std::snprintf(buf, sizeof(buf), "%s_%.4gnm_lat%.4gpx", to_string(job.method).c_str(), wl_nm,
                      job.value);
    } else {
        std::snprintf(buf, sizeof(buf), "%s_%.4gnm_ax%.4gm", to_string(job.method).c_str(), wl_nm,
                      job.value);
    }
    return buf;
}

// Displays a pre-compensated slm2 pattern, undoing a calibrated inter-arm
// shift before every capture (what driving the real rig would do).
class CalibratedCamera : public CaptureSource {
public:
    CalibratedCamera(EmulatedCamera inner, AlignmentEstimate est)
        : inner_(std::move(inner)), est_(est) {}

    RealImage capture_intensity(const PhasePattern* phi1, const PhasePattern* phi2,
                                std::uint64_t call_index) override {
        if (!phi2 || (est_.dx == 0.0 && est_.dy == 0.0))
            return inner_.capture_intensity(phi1, phi2, call_index);
        PhasePattern compensated = apply_alignment(*phi2, est_);
        return inner_.capture_intensity(phi1, &compensated, call_index);
    }
    const GridSpec& grid() const override { return inner_.grid(); }
    std::uint64_t source_hash() const override { return inner_.source_hash(); }
    const AlignmentEstimate& estimate() const { return est_; }

private:
    EmulatedCamera inner_;
    AlignmentEstimate est_;
};

constexpr std::uint64_t kCalCaptureIndexA = (1ULL << 41);
constexpr std::uint64_t kCalCaptureIndexB = (1ULL << 41) + 1;

AlignmentEstimate calibrate_arms(EmulatedCamera& camera, const ExperimentConfig& cfg,
                                 const PropagationSpec& prop) {
    TargetAmplitude dots = make_builtin_target("builtin:dots?spacing=32&sigma=2", cfg.grid);
    PhasePattern probe = phase_only_hologram(
        dots, make_quadratic_phase(cfg.grid, prop.wavelength, -prop.distance), prop);
    RealImage img_a = camera.capture_intensity(&probe, nullptr, kCalCaptureIndexA);
    RealImage img_b = camera.capture_intensity(nullptr, &probe, kCalCaptureIndexB);
    return estimate_shift(img_a, img_b);
}

// The camera a method solves against (and is scored through). Model-based
// methods still get scored through the emulator.
std::unique_ptr<CaptureSource> make_camera(const ExperimentConfig& cfg, const Job& job,
                                           const PropagationSpec& prop,
                                           const HardwareProfile& hw) {
    EmulatedCamera emu(hw);
    if (is_citl(job.method) && is_dual(job.method) && cfg.calibrate_citl) {
        AlignmentEstimate est = calibrate_arms(emu, cfg, prop);
        return std::make_unique<CalibratedCamera>(std::move(emu), est);
    }
    return std::make_unique<EmulatedCamera>(std::move(emu));
}

RunRecord run_method(const ExperimentConfig& cfg, const Job& job, const TargetAmplitude& target,
                     const PropagationSpec& prop, CaptureSource& camera,
                     const SolverConfig& solver) {
    const bool dual = is_dual(job.method);
    if (is_dpac(job.method)) {
        PhasePattern tphase = cfg.dpac_target_phase == "zero"
                                  ? PhasePattern(prop.grid)
                                  : make_quadratic_phase(prop.grid, prop.wavelength, -prop.distance);
        RunRecord rec;
        rec.solver = to_string(job.method);
        if (dual) {
            auto pair = dpac_dual(target, tphase, prop);
            rec.phi1 = std::move(pair.first);
            rec.phi2 = std::move(pair.second);
        } else {
            rec.phi1 = dpac_single(target, tphase, prop);
        }
        return rec;
    }
    if (is_citl(job.method)) return citl_solve(target, camera, prop, solver, dual);
    return sgd_solve(target, prop, solver, dual);
}

// Physical evaluation of the final phases: capture, fit the scale, score.
struct Evaluation {
    RealImage amplitude;
    double scale = 0.0;
    double psnr_db = 0.0;
    double loss = 0.0;
};

Evaluation evaluate_record(const RunRecord& rec, const TargetAmplitude& target,
                           CaptureSource& camera, PsnrMode mode) {
    const PhasePattern* phi2 = rec.phi2 ? &*rec.phi2 : nullptr;
    Evaluation ev;
    ev.amplitude = camera.capture_amplitude(&rec.phi1, phi2, kEvalCaptureIndex);
    double sum_aa = 0.0, sum_at = 0.0;
    const std::size_t n = ev.amplitude.v.size();
    for (std::size_t i = 0; i < n; ++i) {
        sum_aa += ev.amplitude.v[i] * ev.amplitude.v[i];
        sum_at += ev.amplitude.v[i] * target.amplitude[i];
    }
    ev.scale = sum_aa > 0.0 ? sum_at / sum_aa : 0.0;
    RealImage scaled(ev.amplitude.grid);
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        scaled.v[i] = ev.scale * ev.amplitude.v[i];
        const double d = scaled.v[i] - target.amplitude[i];
        loss += d * d;
    }
    ev.loss = loss / double(n);
    ev.psnr_db = psnr(scaled, target, mode);
    return ev;
}

void write_recon_png(const std::string& path, const Evaluation& ev) {
    RealImage intensity(ev.amplitude.grid);
    for (std::size_t i = 0; i < intensity.v.size(); ++i) {
        const double a = ev.scale * ev.amplitude.v[i];
        intensity.v[i] = a * a;
    }
    write_png_gray8(path, intensity);
}

void write_trace_csv(const std::string& path, const RunRecord& rec) {
    std::ofstream out(path);
    out << "iteration,loss" << (rec.psnr_trace.empty() ? "" : ",psnr_db") << "\n";
    for (std::size_t k = 0; k < rec.loss_trace.size(); ++k) {
        out << k << "," << fmt_g(rec.loss_trace[k]);
        if (!rec.psnr_trace.empty()) out << "," << fmt_g(rec.psnr_trace[k]);
        out << "\n";
    }
}

JobResult run_job(const ExperimentConfig& cfg, const Job& job, const TargetAmplitude& target) {
    JobResult res;
    ResultRow& row = res.row;
    row.method = to_string(job.method);
    row.wavelength_nm = cfg.wavelengths[job.wl_index] * 1e9;
    row.axis = job.axis;
    row.value = job.value;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        PropagationSpec prop{cfg.wavelengths[job.wl_index], cfg.z, cfg.grid, cfg.pad_factor};
        HardwareProfile hw = materialize_hardware(cfg, job, prop);
        SolverConfig solver = cfg.solver;
        solver.rng_seed = mix_seed(cfg.solver.rng_seed, 0x50u + std::uint64_t(job.wl_index));
        std::unique_ptr<CaptureSource> camera = make_camera(cfg, job, prop, hw);
        res.record = run_method(cfg, job, target, prop, *camera, solver);
        Evaluation ev = evaluate_record(res.record, target, *camera, cfg.psnr_mode);
        row.psnr_db = ev.psnr_db;
        row.final_loss = res.record.loss_trace.empty() ? ev.loss : res.record.loss_trace.back();
        if (cfg.kind == ExperimentKind::ContrastEval) {
            RealImage intensity(ev.amplitude.grid);
            for (std::size_t i = 0; i < intensity.v.size(); ++i)
                intensity.v[i] = ev.amplitude.v[i] * ev.amplitude.v[i];
            ContrastReport rep =
                contrast_from_sinusoid(intensity, cfg.grating_period_px, Axis::X);
            row.weber = rep.weber;
            row.michelson = rep.michelson;
        }
        const std::string tag = job_tag(cfg, job);
        write_recon_png((fs::path(cfg.out_dir) / ("recon_" + tag + ".png")).string(), ev);
        if (!res.record.loss_trace.empty())
            write_trace_csv((fs::path(cfg.out_dir) / ("trace_" + tag + ".csv")).string(), res.record);
        res.ok = true;
        row.status = "ok";
    } catch (const std::exception& e) {
        row.status = "error: " + csv_safe(e.what());
        row.psnr_db = std::nan("");
        row.final_loss = std::nan("");
    }
    row.runtime_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

std::vector<Job> enumerate_jobs(const ExperimentConfig& cfg) {
    std::vector<Job> jobs;
    auto add_point = [&](const std::string& axis, double value) {
        for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi)
            for (std::size_t wi = 0; wi < cfg.wavelengths.size(); ++wi)
                jobs.push_back({cfg.methods[mi], int(wi), axis, value, jobs.size()});
    };
    switch (cfg.kind) {
        case ExperimentKind::SingleRun:
        case ExperimentKind::ContrastEval:
            add_point("", 0.0);
            break;
        case ExperimentKind::EfficiencySweep:
            for (double v : cfg.sweep_one_minus_eta) add_point("one_minus_eta", v);
            break;
        case ExperimentKind::MisalignmentSweep:
            for (double v : cfg.sweep_lateral_px) add_point("lateral", v);
            for (double v : cfg.sweep_axial_m) add_point("axial", v);
            break;
        case ExperimentKind::FringeConvergence:
            break;  // handled separately
    }
    return jobs;
}

void write_results_csv(const ExperimentConfig& cfg, const std::vector<ResultRow>& rows,
                       const std::string& path) {
    std::ofstream out(path);
    out << "# holosim schema_version=1 kind=" << to_string(cfg.kind) << "\n";
    switch (cfg.kind) {
        case ExperimentKind::SingleRun:
            out << "method,wavelength_nm,psnr_db,final_loss,runtime_s,status\n";
            for (const auto& r : rows)
                out << r.method << ',' << fmt_g(r.wavelength_nm) << ',' << fmt_g(r.psnr_db) << ','
                    << fmt_g(r.final_loss) << ',' << fmt_runtime(r.runtime_s) << ',' << r.status
                    << "\n";
            break;
        case ExperimentKind::EfficiencySweep:
            out << "method,wavelength_nm,one_minus_eta,psnr_db,final_loss,runtime_s,status\n";
            for (const auto& r : rows)
                out << r.method << ',' << fmt_g(r.wavelength_nm) << ',' << fmt_g(r.value) << ','
                    << fmt_g(r.psnr_db) << ',' << fmt_g(r.final_loss) << ','
                    << fmt_runtime(r.runtime_s) << ',' << r.status << "\n";
            break;
        case ExperimentKind::MisalignmentSweep:
            out << "method,wavelength_nm,axis,offset,psnr_db,final_loss,runtime_s,status\n";
            for (const auto& r : rows)
                out << r.method << ',' << fmt_g(r.wavelength_nm) << ',' << r.axis << ','
                    << fmt_g(r.value) << ',' << fmt_g(r.psnr_db) << ',' << fmt_g(r.final_loss)
                    << ',' << fmt_runtime(r.runtime_s) << ',' << r.status << "\n";
            break;
        case ExperimentKind::FringeConvergence:
            out << "iteration,loss,psnr_db\n";
            for (const auto& r : rows)
                out << int(r.value) << ',' << fmt_g(r.final_loss) << ',' << fmt_g(r.psnr_db)
                    << "\n";
            break;
        case ExperimentKind::ContrastEval:
            out << "method,wavelength_nm,weber,michelson,runtime_s,status\n";
            for (const auto& r : rows)
                out << r.method << ',' << fmt_g(r.wavelength_nm) << ',' << fmt_g(r.weber) << ','
                    << fmt_g(r.michelson) << ',' << fmt_runtime(r.runtime_s) << ',' << r.status
                    << "\n";
            break;
    }
}

void write_summary_json(const ExperimentConfig& cfg, const std::vector<ResultRow>& rows,
                        const std::string& path) {
    json j;
    const std::string cfg_text = config_to_json_text(cfg);
    j["schema_version"] = 1;
    j["kind"] = to_string(cfg.kind);
    j["config"] = json::parse(cfg_text);
    char hash_hex[32];
    std::snprintf(hash_hex, sizeof(hash_hex), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(cfg_text.data(), cfg_text.size())));
    j["config_hash"] = hash_hex;
    json rows_json = json::array();
    for (const auto& r : rows) {
        json rj;
        rj["method"] = r.method;
        rj["wavelength_nm"] = r.wavelength_nm;
        if (!r.axis.empty()) {
            rj["axis"] = r.axis;
            rj["value"] = r.value;
        }
        rj["psnr_db"] = std::isfinite(r.psnr_db) ? json(r.psnr_db) : json(nullptr);
        rj["final_loss"] = std::isfinite(r.final_loss) ? json(r.final_loss) : json(nullptr);
        if (cfg.kind == ExperimentKind::ContrastEval) {
            rj["weber"] = std::isfinite(r.weber) ? json(r.weber) : json(nullptr);
            rj["michelson"] = r.michelson;
        }
        rj["runtime_s"] = r.runtime_s;
        rj["status"] = r.status;
        rows_json.push_back(rj);
    }
    j["rows"] = rows_json;
    std::ofstream out(path);
    out << j.dump(2) << "\n";
}

ExperimentOutput run_fringe_convergence(const ExperimentConfig& cfg) {
    const Job job{cfg.methods.front(), 0, "", 0.0, 0};
    TargetAmplitude target = resolve_target(cfg, 0);
    PropagationSpec prop{cfg.wavelengths[0], cfg.z, cfg.grid, cfg.pad_factor};
    HardwareProfile hw = materialize_hardware(cfg, job, prop);
    SolverConfig solver = cfg.solver;
    solver.rng_seed = mix_seed(cfg.solver.rng_seed, 0x50u);
    solver.record_psnr = true;
    solver.psnr_mode = cfg.psnr_mode;

    EmulatedCamera camera(hw);
    CheckpointHook hook = [&](int iteration, const RealImage& intensity) {
        char name[64];
        std::snprintf(name, sizeof(name), "fringe_iter_%04d.png", iteration);
        RealImage norm = intensity;
        const double peak = norm.max();
        if (peak > 0.0)
            for (double& v : norm.v) v /= peak;
        write_png_gray8((fs::path(cfg.out_dir) / name).string(), norm);
    };
    RunRecord rec = citl_solve(target, camera, prop, solver, is_dual(job.method),
                               cfg.checkpoints, hook);

    Evaluation ev = evaluate_record(rec, target, camera, cfg.psnr_mode);
    ExperimentOutput out;
    for (std::size_t k = 0; k < rec.loss_trace.size(); ++k) {
        ResultRow r;
        r.method = rec.solver;
        r.wavelength_nm = cfg.wavelengths[0] * 1e9;
        r.axis = "iteration";
        r.value = double(k);
        r.final_loss = rec.loss_trace[k];
        r.psnr_db = rec.psnr_trace[k];
        out.rows.push_back(r);
    }
    ResultRow final_row;
    final_row.method = rec.solver;
    final_row.wavelength_nm = cfg.wavelengths[0] * 1e9;
    final_row.axis = "iteration";
    final_row.value = double(cfg.solver.iterations);
    final_row.final_loss = ev.loss;
    final_row.psnr_db = ev.psnr_db;
    out.rows.push_back(final_row);
    write_trace_csv((fs::path(cfg.out_dir) / "trace_fringe.csv").string(), rec);
    return out;
}

}  // namespace

ExperimentOutput run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    fs::create_directories(cfg.out_dir);

    ExperimentOutput output;
    if (cfg.kind == ExperimentKind::FringeConvergence) {
        output = run_fringe_convergence(cfg);
    } else {
        // targets are shared across methods and sweep points
        std::vector<TargetAmplitude> targets;
        targets.reserve(cfg.wavelengths.size());
        for (std::size_t wi = 0; wi < cfg.wavelengths.size(); ++wi)
            targets.push_back(resolve_target(cfg, int(wi)));

        std::vector<Job> jobs = enumerate_jobs(cfg);
        std::vector<JobResult> results(jobs.size());
        std::atomic<std::size_t> next{0};
        const int workers = std::max(1, std::min<int>(cfg.workers, int(jobs.size())));
        auto worker = [&]() {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= jobs.size()) break;
                results[i] = run_job(cfg, jobs[i], targets[jobs[i].wl_index]);
            }
        };
        std::vector<std::thread> pool;
        for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
        worker();
        for (auto& t : pool) t.join();

        for (auto& r : results) output.rows.push_back(std::move(r.row));
        std::sort(output.rows.begin(), output.rows.end(),
                  [](const ResultRow& a, const ResultRow& b) {
                      return std::tie(a.method, a.wavelength_nm, a.axis, a.value) <
                             std::tie(b.method, b.wavelength_nm, b.axis, b.value);
                  });

        // full-color composite when one run covers exactly three channels
        if (cfg.kind == ExperimentKind::SingleRun && cfg.wavelengths.size() == 3) {
            for (Method m : cfg.methods) {
                bool all_ok = true;
                std::vector<RealImage> chans;
                for (int wi = 0; wi < 3 && all_ok; ++wi) {
                    Job job{m, wi, "", 0.0, 0};
                    const std::string name = "recon_" + job_tag(cfg, job) + ".png";
                    const fs::path p = fs::path(cfg.out_dir) / name;
                    if (!fs::exists(p)) {
                        all_ok = false;
                        break;
                    }
                    ImageData img = read_image(p.string());
                    RealImage chan(cfg.grid);
                    for (std::size_t i = 0; i < chan.v.size(); ++i) chan.v[i] = img.pixels[i];
                    chans.push_back(std::move(chan));
                }
                if (all_ok)
                    write_png_rgb8(
                        (fs::path(cfg.out_dir) / ("recon_" + to_string(m) + "_rgb.png")).string(),
                        chans[0], chans[1], chans[2]);
            }
        }
    }

    const fs::path csv_path = fs::path(cfg.out_dir) / "results.csv";
    const fs::path summary_path = fs::path(cfg.out_dir) / "summary.json";
    write_results_csv(cfg, output.rows, csv_path.string());
    write_summary_json(cfg, output.rows, summary_path.string());
    output.results_csv = csv_path.string();
    output.summary_json = summary_path.string();
    return output;
}

}  // namespace holo
