#include "ionsim.h"

#include "ionsim/bloch.hpp"
#include "ionsim/entangle.hpp"
#include "ionsim/lineshape.hpp"
#include "ionsim/mirror.hpp"

#include <cstring>
#include <string>

namespace {

thread_local std::string g_last_error;

ionsim_status fail(ionsim_status code, const char* what) {
    g_last_error = what;
    return code;
}

template <typename Fn>
ionsim_status guarded(Fn&& fn) {
    try {
        fn();
        return IONSIM_OK;
    } catch (const ionsim::DegenerateSteadyStateError& e) {
        return fail(IONSIM_ERR_DEGENERATE_STEADY_STATE, e.what());
    } catch (const std::invalid_argument& e) {
        return fail(IONSIM_ERR_INVALID_ARGUMENT, e.what());
    } catch (const std::domain_error& e) {
        return fail(IONSIM_ERR_INVALID_ARGUMENT, e.what());
    } catch (const std::exception& e) {
        return fail(IONSIM_ERR_INTERNAL, e.what());
    }
}

template <typename... Ts>
bool any_null(const Ts*... ps) {
    return ((ps == nullptr) || ...);
}

#define IONSIM_REQUIRE(...)                                                  \
    do {                                                                     \
        if (any_null(__VA_ARGS__))                                           \
            return fail(IONSIM_ERR_INVALID_ARGUMENT, "null pointer argument"); \
    } while (0)

ionsim::TwoLevelParams to_cpp(const ionsim_two_level_params& p) {
    return {p.gamma, p.epsilon, p.delta0};
}

ionsim::ZeemanDoubletParams to_cpp(const ionsim_doublet_params& p) {
    return {to_cpp(p.base), p.delta_b, p.rho_minus, p.rho_plus};
}

ionsim::CavityParams to_cpp(const ionsim_cavity_params& p) {
    return {p.epsilon, p.r, p.atom_mirror_distance, p.wavelength};
}

ionsim::ProtocolParams to_cpp(const ionsim_protocol_params& p) {
    ionsim::ProtocolParams out;
    out.p_e = p.p_e;
    out.eta = p.eta;
    out.dark_rate = p.dark_rate;
    out.gate = p.gate;
    out.duty_cycle = p.duty_cycle;
    out.phase_jitter_sigma = p.phase_jitter_sigma;
    out.kappa_recoil = p.kappa_recoil;
    out.kappa_dephasing = p.kappa_dephasing;
    out.double_scatter = p.double_scatter;
    out.readout_fidelity = p.readout_fidelity;
    out.phases = {p.phases[0], p.phases[1], p.phases[2], p.phases[3]};
    return out;
}

void write_matrix(const Eigen::MatrixXcd& m, double* out) {
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            *out++ = m(i, j).real();
            *out++ = m(i, j).imag();
        }
}

Eigen::Matrix4cd read_state(const double* in) {
    Eigen::Matrix4cd m;
    for (int j = 0; j < 4; ++j)
        for (int i = 0; i < 4; ++i) {
            const double re = *in++;
            const double im = *in++;
            m(i, j) = {re, im};
        }
    return m;
}

} // namespace

struct ionsim_scheme {
    ionsim::LevelScheme scheme;
};

extern "C" {

const char* ionsim_version(void) { return "1.0.0"; }

const char* ionsim_last_error(void) { return g_last_error.c_str(); }

ionsim_status ionsim_lorentzian(double delta, const ionsim_two_level_params* p, double* re,
                                double* im) {
    IONSIM_REQUIRE(p, re, im);
    return guarded([&] {
        const auto v = ionsim::lorentzian(delta, to_cpp(*p));
        *re = v.real();
        *im = v.imag();
    });
}

ionsim_status ionsim_transmission(double delta, const ionsim_two_level_params* p, double* out) {
    IONSIM_REQUIRE(p, out);
    return guarded([&] { *out = ionsim::transmission(delta, to_cpp(*p)); });
}

ionsim_status ionsim_phase_shift(double delta, const ionsim_two_level_params* p, double* out) {
    IONSIM_REQUIRE(p, out);
    return guarded([&] { *out = ionsim::phase_shift(delta, to_cpp(*p)); });
}

ionsim_status ionsim_doublet_outputs(double delta, const ionsim_doublet_params* p, double* ep_re,
                                     double* ep_im, double* em_re, double* em_im) {
    IONSIM_REQUIRE(p, ep_re, ep_im, em_re, em_im);
    return guarded([&] {
        const auto [ep, em] = ionsim::doublet_outputs(delta, to_cpp(*p));
        *ep_re = ep.real();
        *ep_im = ep.imag();
        *em_re = em.real();
        *em_im = em.imag();
    });
}

ionsim_status ionsim_polarimetry(double delta, const ionsim_doublet_params* p, double out[6]) {
    IONSIM_REQUIRE(p, out);
    return guarded([&] {
        const auto s = ionsim::polarimetry(delta, to_cpp(*p));
        out[0] = s.i0;
        out[1] = s.i45;
        out[2] = s.i90;
        out[3] = s.s0;
        out[4] = s.s1;
        out[5] = s.s2;
    });
}

ionsim_status ionsim_faraday_angle(double delta, const ionsim_doublet_params* p, double* exact,
                                   double* estimator) {
    IONSIM_REQUIRE(p, exact, estimator);
    return guarded([&] {
        const auto a = ionsim::faraday_angle(delta, to_cpp(*p));
        *exact = a.exact;
        *estimator = a.estimator;
    });
}

ionsim_status ionsim_eit_susceptibility(double delta_two_photon, const ionsim_lambda_params* p,
                                        double* re, double* im) {
    IONSIM_REQUIRE(p, re, im);
    return guarded([&] {
        const auto v = ionsim::eit_susceptibility(
            delta_two_photon, {p->gamma, p->gamma0, p->omega_r, p->delta_g});
        *re = v.real();
        *im = v.imag();
    });
}

ionsim_status ionsim_fp_transmission(const ionsim_cavity_params* p, double* out) {
    IONSIM_REQUIRE(p, out);
    return guarded([&] { *out = ionsim::fp_transmission(to_cpp(*p)); });
}

ionsim_status ionsim_fp_transmission_phi(double epsilon, double r, double phi, double* out) {
    IONSIM_REQUIRE(out);
    return guarded([&] { *out = ionsim::fp_transmission_phi(epsilon, r, phi); });
}

ionsim_status ionsim_qed_transmission(const ionsim_cavity_params* p, double* out) {
    IONSIM_REQUIRE(p, out);
    return guarded([&] { *out = ionsim::qed_transmission(to_cpp(*p)); });
}

ionsim_status ionsim_qed_transmission_phi(double epsilon, double r, double phi, double* out) {
    IONSIM_REQUIRE(out);
    return guarded([&] { *out = ionsim::qed_transmission_phi(epsilon, r, phi); });
}

ionsim_status ionsim_finesse(const ionsim_cavity_params* p, double* out) {
    IONSIM_REQUIRE(p, out);
    return guarded([&] { *out = ionsim::finesse(to_cpp(*p)); });
}

ionsim_status ionsim_fringe_scan(const ionsim_cavity_params* p, const double* positions,
                                 size_t n, double reflection_amplitude, double* transmission,
                                 double* reflection_proxy) {
    IONSIM_REQUIRE(p, transmission, reflection_proxy);
    if (n > 0) IONSIM_REQUIRE(positions);
    return guarded([&] {
        const std::vector<double> pos(positions, positions + n);
        const auto pts = ionsim::fringe_scan(to_cpp(*p), pos, reflection_amplitude);
        for (size_t i = 0; i < n; ++i) {
            transmission[i] = pts[i].transmission;
            reflection_proxy[i] = pts[i].reflection_proxy;
        }
    });
}

void ionsim_preset_options_default(ionsim_preset_options* opt) {
    if (!opt) return;
    const ionsim::PresetOptions d;
    opt->gamma = d.gamma;
    opt->gamma0 = d.gamma0;
    opt->omega_r = d.omega_r;
    opt->delta_g = d.delta_g;
    opt->epsilon = d.epsilon;
    opt->delta_b = d.delta_b;
    opt->probe_rabi = d.probe_rabi;
    opt->repump_rabi = d.repump_rabi;
}

ionsim_scheme* ionsim_scheme_preset(const char* name, const ionsim_preset_options* opt) {
    if (!name) {
        fail(IONSIM_ERR_INVALID_ARGUMENT, "null pointer argument");
        return nullptr;
    }
    ionsim_scheme* out = nullptr;
    const ionsim_status st = guarded([&] {
        ionsim::PresetOptions o;
        if (opt) {
            o.gamma = opt->gamma;
            o.gamma0 = opt->gamma0;
            o.omega_r = opt->omega_r;
            o.delta_g = opt->delta_g;
            o.epsilon = opt->epsilon;
            o.delta_b = opt->delta_b;
            o.probe_rabi = opt->probe_rabi;
            o.repump_rabi = opt->repump_rabi;
        }
        out = new ionsim_scheme{ionsim::preset_scheme(name, o)};
    });
    return st == IONSIM_OK ? out : nullptr;
}

ionsim_scheme* ionsim_scheme_load(const char* path) {
    if (!path) {
        fail(IONSIM_ERR_INVALID_ARGUMENT, "null pointer argument");
        return nullptr;
    }
    ionsim_scheme* out = nullptr;
    const ionsim_status st =
        guarded([&] { out = new ionsim_scheme{ionsim::scheme_from_file(path)}; });
    return st == IONSIM_OK ? out : nullptr;
}

void ionsim_scheme_free(ionsim_scheme* s) { delete s; }

int ionsim_scheme_dim(const ionsim_scheme* s) { return s ? s->scheme.dim() : 0; }

ionsim_status ionsim_steady_state(const ionsim_scheme* s, double* rho) {
    IONSIM_REQUIRE(s, rho);
    return guarded([&] {
        const auto dm = ionsim::steady_state(ionsim::build_liouvillian(s->scheme));
        write_matrix(dm.m, rho);
    });
}

ionsim_status ionsim_probe_spectrum(const ionsim_scheme* s, const double* grid, size_t n,
                                    double* transmission, double* phase) {
    IONSIM_REQUIRE(s, transmission, phase);
    if (n > 0) IONSIM_REQUIRE(grid);
    return guarded([&] {
        const auto pts = ionsim::probe_spectrum(s->scheme, std::span(grid, n));
        for (size_t i = 0; i < n; ++i) {
            transmission[i] = pts[i].transmission;
            phase[i] = pts[i].phase;
        }
    });
}

void ionsim_protocol_params_default(ionsim_protocol_params* p) {
    if (!p) return;
    const ionsim::ProtocolParams d;
    p->p_e = d.p_e;
    p->eta = d.eta;
    p->dark_rate = d.dark_rate;
    p->gate = d.gate;
    p->duty_cycle = d.duty_cycle;
    p->phase_jitter_sigma = d.phase_jitter_sigma;
    p->kappa_recoil = d.kappa_recoil;
    p->kappa_dephasing = d.kappa_dephasing;
    p->double_scatter = d.double_scatter;
    p->readout_fidelity = d.readout_fidelity;
    for (int i = 0; i < 4; ++i) p->phases[i] = d.phases[i];
}

ionsim_status ionsim_calibrate_herald_model(double p_e, double eta, double dark_rate,
                                            double psi_fraction, double dark_fraction,
                                            double* gate, double* double_scatter) {
    IONSIM_REQUIRE(gate, double_scatter);
    return guarded([&] {
        const auto c =
            ionsim::calibrate_herald_model(p_e, eta, dark_rate, psi_fraction, dark_fraction);
        *gate = c.gate;
        *double_scatter = c.double_scatter;
    });
}

ionsim_status ionsim_analytic_single_photon(double p_e, double eta, double* fidelity,
                                            double* success_probability) {
    IONSIM_REQUIRE(fidelity, success_probability);
    return guarded([&] {
        const auto a = ionsim::analytic_single_photon(p_e, eta);
        *fidelity = a.fidelity;
        *success_probability = a.success_probability;
    });
}

ionsim_status ionsim_analytic_two_photon(double eta, double* eta_sq, double* two_eta_sq) {
    IONSIM_REQUIRE(eta_sq, two_eta_sq);
    return guarded([&] {
        const auto a = ionsim::analytic_two_photon(eta);
        *eta_sq = a.eta_squared;
        *two_eta_sq = a.two_eta_squared;
    });
}

ionsim_status ionsim_success_ratio(double eta, double target_fidelity, double* ratio) {
    IONSIM_REQUIRE(ratio);
    return guarded([&] { *ratio = ionsim::success_ratio(eta, target_fidelity); });
}

ionsim_status ionsim_detection_chain(const double* stages, size_t n, double* eta) {
    IONSIM_REQUIRE(eta);
    if (n > 0) IONSIM_REQUIRE(stages);
    return guarded(
        [&] { *eta = ionsim::detection_chain_efficiency(std::span(stages, n)); });
}

ionsim_status ionsim_herald_project(const ionsim_protocol_params* p, double* rho,
                                    double* herald_probability) {
    IONSIM_REQUIRE(p, rho, herald_probability);
    return guarded([&] {
        const auto cpp = to_cpp(*p);
        const auto joint = ionsim::joint_state(cpp.p_e, cpp.phases);
        const auto res = ionsim::herald_project(joint, cpp);
        write_matrix(res.state.rho, rho);
        *herald_probability = res.herald_probability;
    });
}

ionsim_status ionsim_fidelity(const double* rho, double* out) {
    IONSIM_REQUIRE(rho, out);
    return guarded([&] {
        *out = ionsim::fidelity(ionsim::TwoQubitState::checked(read_state(rho)));
    });
}

ionsim_status ionsim_rotate(const double* rho_in, double theta, double phi, double* rho_out) {
    IONSIM_REQUIRE(rho_in, rho_out);
    return guarded([&] {
        const auto st = ionsim::TwoQubitState::checked(read_state(rho_in));
        write_matrix(ionsim::rotate(st, {theta, phi}).rho, rho_out);
    });
}

ionsim_status ionsim_parity(const double* rho, double* out) {
    IONSIM_REQUIRE(rho, out);
    return guarded([&] {
        *out = ionsim::parity(ionsim::TwoQubitState::checked(read_state(rho)));
    });
}

ionsim_status ionsim_parity_scan(const double* rho, int double_pulse, const double* phis,
                                 size_t n, double* values, double* contrast, double* offset) {
    IONSIM_REQUIRE(rho, values, contrast, offset);
    if (n > 0) IONSIM_REQUIRE(phis);
    return guarded([&] {
        const auto st = ionsim::TwoQubitState::checked(read_state(rho));
        const auto scan = ionsim::parity_scan(st, double_pulse != 0, std::span(phis, n));
        for (size_t i = 0; i < n; ++i) values[i] = scan.value[i];
        *contrast = scan.contrast;
        *offset = scan.offset;
    });
}

ionsim_status ionsim_monte_carlo(const ionsim_protocol_params* p, uint64_t n_trials,
                                 uint64_t seed, ionsim_mc_stats* stats) {
    IONSIM_REQUIRE(p, stats);
    return guarded([&] {
        ionsim::McOptions opt;
        opt.n_trials = n_trials;
        opt.seed = seed;
        const auto s = ionsim::monte_carlo(to_cpp(*p), opt);
        stats->n_trials = s.n_trials;
        stats->n_heralds = s.n_heralds;
        stats->herald_rate_per_min = s.herald_rate_per_min;
        for (int i = 0; i < 3; ++i) {
            stats->counts[i] = s.counts[i];
            stats->fractions[i] = s.fractions[i];
        }
    });
}

ionsim_status ionsim_monte_carlo_parity(const ionsim_protocol_params* p, uint64_t n_trials,
                                        uint64_t seed, int double_pulse, const double* phis,
                                        size_t n, double* mean, double* std_error,
                                        uint64_t* samples, ionsim_mc_stats* stats) {
    IONSIM_REQUIRE(p, mean, std_error, samples);
    if (n > 0) IONSIM_REQUIRE(phis);
    return guarded([&] {
        ionsim::McOptions opt;
        opt.n_trials = n_trials;
        opt.seed = seed;
        opt.parity_phis.assign(phis, phis + n);
        opt.double_pulse = double_pulse != 0;
        const auto s = ionsim::monte_carlo(to_cpp(*p), opt);
        for (size_t i = 0; i < n; ++i) {
            mean[i] = s.parity[i].mean;
            std_error[i] = s.parity[i].std_error;
            samples[i] = s.parity[i].n;
        }
        if (stats) {
            stats->n_trials = s.n_trials;
            stats->n_heralds = s.n_heralds;
            stats->herald_rate_per_min = s.herald_rate_per_min;
            for (int i = 0; i < 3; ++i) {
                stats->counts[i] = s.counts[i];
                stats->fractions[i] = s.fractions[i];
            }
        }
    });
}

} // extern "C"
