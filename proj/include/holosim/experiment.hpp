#ifndef HOLOSIM_EXPERIMENT_HPP
#define HOLOSIM_EXPERIMENT_HPP

#include <string>
#include <vector>

#include "holosim/cgh.hpp"

namespace holo {

enum class ExperimentKind {
    SingleRun,
    EfficiencySweep,
    MisalignmentSweep,
    FringeConvergence,
    ContrastEval
};

enum class Method { Dpac1, Dpac2, Sgd1, Sgd2, Citl1, Citl2 };

std::string to_string(ExperimentKind kind);
std::string to_string(Method method);
ExperimentKind kind_from_string(const std::string& s);
Method method_from_string(const std::string& s);

// Scalar hardware description as it appears in config files; materialized
// into a HardwareProfile (with a uniform unit source) per run.
struct SlmConfig {
    double eta = 1.0;
    int phase_levels = 0;  // 0 = continuous
    double shift_x = 0.0, shift_y = 0.0;
    double axial_shift = 0.0;
    double tilt_x = 0.0, tilt_y = 0.0;
    double phase_nonlinearity = 0.0;
};

struct CameraConfig {
    double noise_sigma = 0.0;
    int bit_depth = 0;  // 0 = ideal
    double exposure_scale = 1.0;
};

struct HardwareConfig {
    SlmConfig slm1, slm2;
    CameraConfig camera;
    std::uint64_t rng_seed = 1234;
};

struct ExperimentConfig {
    int schema_version = 1;
    ExperimentKind kind = ExperimentKind::SingleRun;
    std::string target = "builtin:resolution_chart";
    bool srgb = false;
    GridSpec grid{256, 256, 6.4e-6};
    std::vector<double> wavelengths{520e-9};
    double z = 0.1;
    int pad_factor = 2;
    std::vector<Method> methods;
    std::vector<double> sweep_one_minus_eta;  // efficiency_sweep
    std::vector<double> sweep_lateral_px;     // misalignment_sweep, applied to slm2
    std::vector<double> sweep_axial_m;        // misalignment_sweep, applied to slm2
    HardwareConfig hardware;
    SolverConfig solver;
    std::vector<int> checkpoints{0, 30, 100, 500};  // fringe_convergence image iterations
    double grating_period_px = 16.0;                // contrast_eval analysis period
    std::vector<double> eta_per_wavelength;         // optional, aligned with wavelengths (slm1; slm2 too unless listed)
    std::vector<double> eta_per_wavelength_slm2;    // optional slm2 override
    std::vector<double> nonlinearity_per_wavelength;  // optional slm1 LUT distortion per channel
    std::string dpac_target_phase = "quadratic";    // or "zero"
    // dual-SLM citl runs calibrate the inter-arm shift from dot-grid captures
    // and pre-compensate the slm2 pattern before display
    bool calibrate_citl = false;
    PsnrMode psnr_mode = PsnrMode::Intensity;
    std::string out_dir = "out";
    int workers = 1;

    void validate() const;
};

// JSON round trip (schema documented in the README).
ExperimentConfig config_from_json_text(const std::string& text);
std::string config_to_json_text(const ExperimentConfig& cfg);
ExperimentConfig load_config(const std::string& path);

// Built-in configurations: "fig2", "fig5", "fig3", "table1".
ExperimentConfig make_preset(const std::string& name);

struct ResultRow {
    std::string method;
    double wavelength_nm = 0.0;
    std::string axis;  // sweep axis; "iteration" for fringe rows
    double value = 0.0;
    double psnr_db = 0.0;
    double final_loss = 0.0;
    double weber = 0.0;
    double michelson = 0.0;
    double runtime_s = 0.0;
    std::string status = "ok";
};

struct ExperimentOutput {
    std::vector<ResultRow> rows;
    std::string results_csv;  // path of the written CSV
    std::string summary_json;
};

// Runs the configured experiment, writing results.csv, summary.json,
// reconstruction PNGs and loss traces under cfg.out_dir.
ExperimentOutput run_experiment(const ExperimentConfig& cfg);

}  // namespace holo

#endif
