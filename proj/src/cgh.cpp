#include "holosim/cgh.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "holosim/rng.hpp"

namespace holo {

PhasePattern make_quadratic_phase(const GridSpec& grid, double wavelength, double focal) {
    grid.validate();
    if (focal == 0.0) throw std::invalid_argument("make_quadratic_phase: focal must be nonzero");
    PhasePattern phi(grid);
    const double coeff = kPi / (wavelength * focal);
    const int cx = grid.nx / 2, cy = grid.ny / 2;
    for (int iy = 0; iy < grid.ny; ++iy) {
        const double y = (iy - cy) * grid.pitch;
        for (int ix = 0; ix < grid.nx; ++ix) {
            const double x = (ix - cx) * grid.pitch;
            phi.at(iy, ix) = coeff * (x * x + y * y);
        }
    }
    return phi;
}

namespace {

// back-propagated target field with amplitude rescaled into [0, 1]
ComplexField dpac_slm_plane(const TargetAmplitude& target, const PhasePattern& target_phase,
                            const PropagationSpec& prop) {
    prop.validate();
    require_same_grid(target.grid, prop.grid, "dpac");
    require_same_grid(target_phase.grid, prop.grid, "dpac");

    ComplexField t(prop.grid, prop.wavelength);
    for (std::size_t i = 0; i < t.data.size(); ++i) {
        const double a = target.amplitude[i];
        const double p = target_phase.phase[i];
        t.data[i] = cd(a * std::cos(p), a * std::sin(p));
    }
    PropagationSpec back = prop;
    back.distance = -prop.distance;
    ComplexField u = propagate(t, back);

    double peak = 0.0;
    for (const cd& v : u.data) peak = std::max(peak, std::abs(v));
    if (peak <= 0.0) throw std::invalid_argument("dpac: target field is identically zero");
    for (cd& v : u.data) v /= peak;
    return u;
}

}  // namespace

std::pair<PhasePattern, PhasePattern> dpac_dual(const TargetAmplitude& target,
                                                const PhasePattern& target_phase,
                                                const PropagationSpec& prop) {
    ComplexField u = dpac_slm_plane(target, target_phase, prop);
    PhasePattern phi1(prop.grid), phi2(prop.grid);
    for (std::size_t i = 0; i < u.data.size(); ++i) {
        const double a = std::min(1.0, std::abs(u.data[i]));
        const double p = std::arg(u.data[i]);
        const double c = std::acos(a);
        phi1.phase[i] = wrap_phase(p - c);
        phi2.phase[i] = wrap_phase(p + c);
    }
    return {phi1, phi2};
}

PhasePattern dpac_single(const TargetAmplitude& target, const PhasePattern& target_phase,
                         const PropagationSpec& prop) {
    ComplexField u = dpac_slm_plane(target, target_phase, prop);
    PhasePattern phi(prop.grid);
    for (int iy = 0; iy < prop.grid.ny; ++iy) {
        for (int ix = 0; ix < prop.grid.nx; ++ix) {
            const cd v = u.at(iy, ix);
            const double a = std::min(1.0, std::abs(v));
            const double p = std::arg(v);
            const double c = std::acos(a);
            phi.at(iy, ix) = wrap_phase((ix + iy) % 2 == 0 ? p - c : p + c);
        }
    }
    return phi;
}

PhasePattern phase_only_hologram(const TargetAmplitude& target, const PhasePattern& target_phase,
                                 const PropagationSpec& prop) {
    ComplexField u = dpac_slm_plane(target, target_phase, prop);
    PhasePattern phi(prop.grid);
    for (std::size_t i = 0; i < u.data.size(); ++i) phi.phase[i] = wrap_phase(std::arg(u.data[i]));
    return phi;
}

namespace {

constexpr double kAmplitudeFloorRel = 1e-12;  // subgradient cutoff of |.| at zero

// Forward/backward machinery of the idealized model, with reusable buffers.
struct LossEngine {
    explicit LossEngine(const PropagationSpec& p, bool is_dual)
        : prop(p), propagator(p), dual(is_dual), n(p.grid.count()),
          e1(n), e2(n), a_model(n) {
        prop.validate();
    }

    void forward(const PhasePattern& phi1, const PhasePattern* phi2) {
        require_same_grid(phi1.grid, prop.grid, "loss_and_gradient");
        if (dual) {
            if (!phi2) throw std::invalid_argument("loss_and_gradient: dual mode needs phi2");
            require_same_grid(phi2->grid, prop.grid, "loss_and_gradient");
        }
        ComplexField usum(prop.grid, prop.wavelength);
        for (std::size_t i = 0; i < n; ++i) {
            e1[i] = cd(std::cos(phi1.phase[i]), std::sin(phi1.phase[i]));
            usum.data[i] = e1[i];
        }
        if (dual) {
            for (std::size_t i = 0; i < n; ++i) {
                e2[i] = cd(std::cos(phi2->phase[i]), std::sin(phi2->phase[i]));
                usum.data[i] += e2[i];
            }
        }
        uhat = propagator.forward(usum);
        a_peak = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            a_model[i] = std::sqrt(std::norm(uhat.data[i]));
            a_peak = std::max(a_peak, a_model[i]);
        }
    }

    LossGrad evaluate(const TargetAmplitude& target, const RealImage* amplitude_override,
                      ScaleMode scale_mode, double fixed_scale, bool with_gradient) {
        require_same_grid(target.grid, prop.grid, "loss_and_gradient");
        const double* amp = amplitude_override ? amplitude_override->v.data() : a_model.data();
        if (amplitude_override)
            require_same_grid(amplitude_override->grid, prop.grid, "loss_and_gradient");
        // unit-modulus SLM pixels give |uhat| a natural O(1) scale, so a
        // vanishing peak means the two arms cancel to rounding
        if (a_peak <= 1e-13)
            throw std::runtime_error("loss_and_gradient: degenerate gradient (field is zero everywhere)");

        double sum_aa = 0.0, sum_at = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            sum_aa += amp[i] * amp[i];
            sum_at += amp[i] * target.amplitude[i];
        }
        LossGrad out;
        if (scale_mode == ScaleMode::ClosedForm) {
            if (sum_aa <= 0.0)
                throw std::runtime_error("loss_and_gradient: degenerate scale (zero amplitude)");
            out.scale = sum_at / sum_aa;
        } else {
            out.scale = fixed_scale;
        }
        const double s = out.scale;
        double loss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = s * amp[i] - target.amplitude[i];
            loss += d * d;
        }
        out.loss = loss / static_cast<double>(n);
        if (!with_gradient) return out;

        // cotangent w = r * uhat/|uhat|, r = 2s(sA - t)/N, then one adjoint
        // propagation shared by both arms
        ComplexField w(prop.grid, prop.wavelength);
        const double floor = kAmplitudeFloorRel * a_peak;
        const double rn = 2.0 * s / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) {
            if (a_model[i] < floor) {
                w.data[i] = cd(0.0, 0.0);
            } else {
                const double r = rn * (s * amp[i] - target.amplitude[i]);
                w.data[i] = uhat.data[i] * (r / a_model[i]);
            }
        }
        ComplexField v = propagator.adjoint(w);
        out.grad1.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            // d loss / d phi = Im(conj(e^{i phi}) * v)
            out.grad1[i] = e1[i].real() * v.data[i].imag() - e1[i].imag() * v.data[i].real();
        }
        if (dual) {
            out.grad2.resize(n);
            for (std::size_t i = 0; i < n; ++i)
                out.grad2[i] = e2[i].real() * v.data[i].imag() - e2[i].imag() * v.data[i].real();
        }
        return out;
    }

    PropagationSpec prop;
    Propagator propagator;
    bool dual;
    std::size_t n;
    std::vector<cd> e1, e2;
    ComplexField uhat;
    std::vector<double> a_model;
    double a_peak = 0.0;
};

PhasePattern random_phase(const GridSpec& grid, std::uint64_t seed, int arm) {
    Rng rng(mix_seed(seed, 0x1117 + arm));
    PhasePattern phi(grid);
    for (double& p : phi.phase) p = rng.uniform(kTwoPi);
    return phi;
}

std::uint64_t solver_config_hash(const SolverConfig& cfg, const GridSpec& grid, bool dual) {
    double scalars[] = {double(cfg.iterations),       cfg.resolved_step(grid),
                        cfg.momentum,                 double(int(cfg.init_mode)),
                        double(int(cfg.scale_mode)),  cfg.fixed_scale,
                        double(cfg.rng_seed),         double(dual)};
    return fnv1a64(scalars, sizeof(scalars));
}

RunRecord solve_impl(const TargetAmplitude& target, const PropagationSpec& prop,
                     const SolverConfig& config, bool dual, CaptureSource* camera,
                     const std::vector<int>& checkpoints, const CheckpointHook& hook) {
    config.validate();
    prop.validate();
    require_same_grid(target.grid, prop.grid, "solver");
    if (camera && camera->grid() != prop.grid)
        throw std::invalid_argument("solver: camera grid mismatch");

    const GridSpec& grid = prop.grid;
    const std::size_t n = grid.count();

    PhasePattern phi1, phi2;
    switch (config.init_mode) {
        case InitMode::UniformRandomPhase:
            phi1 = random_phase(grid, config.rng_seed, 1);
            if (dual) phi2 = random_phase(grid, config.rng_seed, 2);
            break;
        case InitMode::Zero:
            phi1 = PhasePattern(grid);
            if (dual) phi2 = PhasePattern(grid);
            break;
        case InitMode::DpacSeed: {
            PhasePattern qp = make_quadratic_phase(grid, prop.wavelength, -prop.distance);
            if (dual) {
                auto pair = dpac_dual(target, qp, prop);
                phi1 = std::move(pair.first);
                phi2 = std::move(pair.second);
            } else {
                phi1 = dpac_single(target, qp, prop);
            }
            break;
        }
    }

    LossEngine engine(prop, dual);
    std::vector<double> mom1(n, 0.0), mom2(dual ? n : 0, 0.0);
    const double alpha = config.resolved_step(grid);
    const double beta = config.momentum;
    const std::set<int> checkpoint_set(checkpoints.begin(), checkpoints.end());
    constexpr std::uint64_t kCheckpointTag = 1ULL << 32;

    RunRecord rec;
    rec.solver = camera ? (dual ? "citl2" : "citl1") : (dual ? "sgd2" : "sgd1");
    rec.config_hash = solver_config_hash(config, grid, dual);
    rec.hardware_hash = camera ? camera->source_hash() : 0;
    rec.loss_trace.reserve(config.iterations);

    RealImage scaled(grid);
    for (int k = 0; k < config.iterations; ++k) {
        engine.forward(phi1, dual ? &phi2 : nullptr);

        RealImage cap;
        const RealImage* override_amp = nullptr;
        if (camera) {
            if (hook && checkpoint_set.count(k))
                hook(k, camera->capture_intensity(&phi1, dual ? &phi2 : nullptr,
                                                  kCheckpointTag + std::uint64_t(k)));
            cap = camera->capture_amplitude(&phi1, dual ? &phi2 : nullptr, std::uint64_t(k));
            override_amp = &cap;
        }

        LossGrad lg = engine.evaluate(target, override_amp, config.scale_mode,
                                      config.fixed_scale, true);
        if (!std::isfinite(lg.loss))
            throw std::runtime_error("solver: non-finite loss at iteration " + std::to_string(k));
        rec.loss_trace.push_back(lg.loss);
        if (config.record_psnr) {
            const double* amp = override_amp ? cap.v.data() : engine.a_model.data();
            for (std::size_t i = 0; i < n; ++i) scaled.v[i] = lg.scale * amp[i];
            rec.psnr_trace.push_back(psnr(scaled, target, config.psnr_mode));
        }

        for (std::size_t i = 0; i < n; ++i) {
            mom1[i] = beta * mom1[i] + lg.grad1[i];
            phi1.phase[i] -= alpha * mom1[i];
        }
        if (dual) {
            for (std::size_t i = 0; i < n; ++i) {
                mom2[i] = beta * mom2[i] + lg.grad2[i];
                phi2.phase[i] -= alpha * mom2[i];
            }
        }
    }

    if (camera && hook && checkpoint_set.count(config.iterations))
        hook(config.iterations,
             camera->capture_intensity(&phi1, dual ? &phi2 : nullptr,
                                       kCheckpointTag + std::uint64_t(config.iterations)));

    engine.forward(phi1, dual ? &phi2 : nullptr);
    if (camera) {
        rec.reconstruction =
            camera->capture_amplitude(&phi1, dual ? &phi2 : nullptr, std::uint64_t(config.iterations));
    } else {
        rec.reconstruction = RealImage(grid);
        rec.reconstruction.v = engine.a_model;
    }
    {
        double sum_aa = 0.0, sum_at = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            sum_aa += rec.reconstruction.v[i] * rec.reconstruction.v[i];
            sum_at += rec.reconstruction.v[i] * target.amplitude[i];
        }
        rec.final_scale = config.scale_mode == ScaleMode::Fixed
                              ? config.fixed_scale
                              : (sum_aa > 0.0 ? sum_at / sum_aa : 0.0);
    }
    rec.phi1 = phi1.wrapped();
    if (dual) rec.phi2 = phi2.wrapped();
    return rec;
}

}  // namespace

ComplexField ideal_reconstruction(const PhasePattern& phi1, const PhasePattern* phi2,
                                  const PropagationSpec& prop) {
    LossEngine engine(prop, phi2 != nullptr);
    engine.forward(phi1, phi2);
    return engine.uhat;
}

LossGrad loss_and_gradient(const PhasePattern& phi1, const PhasePattern* phi2,
                           const TargetAmplitude& target, const PropagationSpec& prop,
                           const RealImage* amplitude_override, ScaleMode scale_mode,
                           double fixed_scale) {
    LossEngine engine(prop, phi2 != nullptr);
    engine.forward(phi1, phi2);
    return engine.evaluate(target, amplitude_override, scale_mode, fixed_scale, true);
}

RunRecord sgd_solve(const TargetAmplitude& target, const PropagationSpec& prop,
                    const SolverConfig& config, bool dual) {
    return solve_impl(target, prop, config, dual, nullptr, {}, nullptr);
}

RunRecord citl_solve(const TargetAmplitude& target, CaptureSource& camera,
                     const PropagationSpec& prop, const SolverConfig& config, bool dual,
                     const std::vector<int>& checkpoints, const CheckpointHook& hook) {
    return solve_impl(target, prop, config, dual, &camera, checkpoints, hook);
}

RunRecord citl_solve(const TargetAmplitude& target, const HardwareProfile& hw,
                     const PropagationSpec& prop, const SolverConfig& config, bool dual) {
    EmulatedCamera camera(hw);
    return citl_solve(target, camera, prop, config, dual);
}

}  // namespace holo
