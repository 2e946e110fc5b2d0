#ifndef HOLOSIM_CGH_HPP
#define HOLOSIM_CGH_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "holosim/hardware.hpp"
#include "holosim/metrics.hpp"
#include "holosim/propagation.hpp"

namespace holo {

enum class InitMode { UniformRandomPhase, Zero, DpacSeed };
enum class ScaleMode { ClosedForm, Fixed };

struct SolverConfig {
    int iterations = 500;
    // Unset = automatic 0.25 * nx * ny, which compensates the 1/N of the
    // mean-squared loss so convergence speed is resolution independent.
    std::optional<double> step_size;
    double momentum = 0.9;  // heavy-ball coefficient, in [0, 1)
    InitMode init_mode = InitMode::UniformRandomPhase;
    ScaleMode scale_mode = ScaleMode::ClosedForm;
    double fixed_scale = 1.0;
    std::uint64_t rng_seed = 0;
    bool record_psnr = false;  // per-iteration PSNR of s*A against the target
    PsnrMode psnr_mode = PsnrMode::Intensity;

    void validate() const {
        if (iterations < 1) throw std::invalid_argument("SolverConfig: iterations must be >= 1");
        if (step_size && !(*step_size > 0.0))
            throw std::invalid_argument("SolverConfig: step_size must be > 0");
        if (!(momentum >= 0.0 && momentum < 1.0))
            throw std::invalid_argument("SolverConfig: momentum must be in [0, 1)");
        if (scale_mode == ScaleMode::Fixed && !(fixed_scale > 0.0))
            throw std::invalid_argument("SolverConfig: fixed scale must be > 0");
    }

    double resolved_step(const GridSpec& g) const {
        return step_size ? *step_size : 0.25 * static_cast<double>(g.nx) * g.ny;
    }
};

struct RunRecord {
    std::vector<double> loss_trace;  // one entry per iteration actually run
    std::vector<double> psnr_trace;  // empty unless record_psnr
    PhasePattern phi1;
    std::optional<PhasePattern> phi2;
    RealImage reconstruction;  // amplitude at the target plane for the final phases
    double final_scale = 1.0;
    std::string solver;
    std::uint64_t config_hash = 0;
    std::uint64_t hardware_hash = 0;
};

// Quadratic (focusing) phase: pi/(lambda*focal) * r^2 about the grid center.
PhasePattern make_quadratic_phase(const GridSpec& grid, double wavelength, double focal);

// Double phase-amplitude coding for two SLMs: back-propagates the target
// field a*e^{i target_phase} by -z, rescales its amplitude into [0,1], and
// splits u = a e^{i phi} into phi -+ acos(a). The two phasors then sum to
// 2 a e^{i phi} exactly.
std::pair<PhasePattern, PhasePattern> dpac_dual(const TargetAmplitude& target,
                                                const PhasePattern& target_phase,
                                                const PropagationSpec& prop);

// Interlaced single-SLM variant: the two phase maps of dpac_dual woven into
// one checkerboard (even parity phi - acos a, odd parity phi + acos a).
PhasePattern dpac_single(const TargetAmplitude& target, const PhasePattern& target_phase,
                         const PropagationSpec& prop);

// Phase of the back-propagated target field with the amplitude discarded.
// A smooth phase-only hologram; used for alignment-calibration test patterns
// where the interlaced DPAC encoding would fill the band up to Nyquist.
PhasePattern phase_only_hologram(const TargetAmplitude& target, const PhasePattern& target_phase,
                                 const PropagationSpec& prop);

struct LossGrad {
    double loss = 0.0;
    double scale = 1.0;
    std::vector<double> grad1;
    std::vector<double> grad2;  // empty in single-SLM mode
};

// Field of the idealized model: propagate(e^{i phi1} [+ e^{i phi2}]) under a
// unit plane-wave source, perfect efficiency and alignment.
ComplexField ideal_reconstruction(const PhasePattern& phi1, const PhasePattern* phi2,
                                  const PropagationSpec& prop);

// Scalar loss mean((s A - a_target)^2) and its exact gradient with respect to
// the phases under the idealized model. When amplitude_override is given
// (CITL mode) the residual is evaluated against it while the backward pass
// flows through the idealized field. Closed-form s minimizes the loss over s.
LossGrad loss_and_gradient(const PhasePattern& phi1, const PhasePattern* phi2,
                           const TargetAmplitude& target, const PropagationSpec& prop,
                           const RealImage* amplitude_override = nullptr,
                           ScaleMode scale_mode = ScaleMode::ClosedForm,
                           double fixed_scale = 1.0);

// Model-based gradient descent on the idealized loss.
RunRecord sgd_solve(const TargetAmplitude& target, const PropagationSpec& prop,
                    const SolverConfig& config, bool dual);

// Called at checkpoint iterations with the current captured intensity.
using CheckpointHook = std::function<void(int iteration, const RealImage& intensity)>;

// Camera-in-the-loop variant: each iteration charges one capture, whose
// amplitude replaces the model amplitude in the residual; gradients still
// flow through the idealized model. Degenerates to sgd_solve when the
// hardware is perfect.
RunRecord citl_solve(const TargetAmplitude& target, CaptureSource& camera,
                     const PropagationSpec& prop, const SolverConfig& config, bool dual,
                     const std::vector<int>& checkpoints = {},
                     const CheckpointHook& hook = nullptr);

RunRecord citl_solve(const TargetAmplitude& target, const HardwareProfile& hw,
                     const PropagationSpec& prop, const SolverConfig& config, bool dual);

}  // namespace holo

#endif
