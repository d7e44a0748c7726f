#ifndef IONSIM_H
#define IONSIM_H

/*
 * C API of the ionsim shared library.
 *
 * All functions return an ionsim_status; on failure ionsim_last_error()
 * gives a thread-local description. Density matrices cross the boundary
 * as interleaved re/im doubles in column-major order (4x4 state: 32
 * doubles, basis {gg, ge, eg, ee}).
 *
 * Units: rates, Rabi frequencies and detunings in ordinary-frequency
 * MHz; lengths in meters; angles in radians.
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define IONSIM_API __declspec(dllexport)
#else
#define IONSIM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ionsim_status {
    IONSIM_OK = 0,
    IONSIM_ERR_INVALID_ARGUMENT = 1,
    IONSIM_ERR_DEGENERATE_STEADY_STATE = 2,
    IONSIM_ERR_IO = 3,
    IONSIM_ERR_INTERNAL = 99
} ionsim_status;

IONSIM_API const char* ionsim_version(void);
IONSIM_API const char* ionsim_last_error(void);

/* ---- lineshape ---------------------------------------------------- */

typedef struct ionsim_two_level_params {
    double gamma;   /* HWHM linewidth, MHz */
    double epsilon; /* solid-angle fraction, [0, 0.5] */
    double delta0;  /* line-center offset, MHz */
} ionsim_two_level_params;

typedef struct ionsim_doublet_params {
    ionsim_two_level_params base;
    double delta_b;   /* Zeeman splitting, MHz */
    double rho_minus; /* ground population of the sigma- transition */
    double rho_plus;
} ionsim_doublet_params;

IONSIM_API ionsim_status ionsim_lorentzian(double delta, const ionsim_two_level_params* p,
                                           double* re, double* im);
IONSIM_API ionsim_status ionsim_transmission(double delta, const ionsim_two_level_params* p,
                                             double* out);
IONSIM_API ionsim_status ionsim_phase_shift(double delta, const ionsim_two_level_params* p,
                                            double* out);
IONSIM_API ionsim_status ionsim_doublet_outputs(double delta, const ionsim_doublet_params* p,
                                                double* ep_re, double* ep_im, double* em_re,
                                                double* em_im);
/* out = {i0, i45, i90, s0, s1, s2} */
IONSIM_API ionsim_status ionsim_polarimetry(double delta, const ionsim_doublet_params* p,
                                            double out[6]);
IONSIM_API ionsim_status ionsim_faraday_angle(double delta, const ionsim_doublet_params* p,
                                              double* exact, double* estimator);

typedef struct ionsim_lambda_params {
    double gamma;   /* optical linewidth, MHz */
    double gamma0;  /* ground-state dephasing, MHz */
    double omega_r; /* control Rabi frequency, MHz */
    double delta_g; /* probe detuning, MHz */
} ionsim_lambda_params;

IONSIM_API ionsim_status ionsim_eit_susceptibility(double delta_two_photon,
                                                   const ionsim_lambda_params* p, double* re,
                                                   double* im);

/* ---- mirror -------------------------------------------------------- */

typedef struct ionsim_cavity_params {
    double epsilon;
    double r; /* mirror amplitude reflectivity, [0, 1) */
    double atom_mirror_distance; /* meters */
    double wavelength;           /* meters */
} ionsim_cavity_params;

IONSIM_API ionsim_status ionsim_fp_transmission(const ionsim_cavity_params* p, double* out);
IONSIM_API ionsim_status ionsim_fp_transmission_phi(double epsilon, double r, double phi,
                                                    double* out);
IONSIM_API ionsim_status ionsim_qed_transmission(const ionsim_cavity_params* p, double* out);
IONSIM_API ionsim_status ionsim_qed_transmission_phi(double epsilon, double r, double phi,
                                                     double* out);
IONSIM_API ionsim_status ionsim_finesse(const ionsim_cavity_params* p, double* out);
/* transmission[i], reflection_proxy[i] for each position */
IONSIM_API ionsim_status ionsim_fringe_scan(const ionsim_cavity_params* p,
                                            const double* positions, size_t n,
                                            double reflection_amplitude, double* transmission,
                                            double* reflection_proxy);

/* ---- bloch ---------------------------------------------------------- */

typedef struct ionsim_scheme ionsim_scheme; /* opaque */

typedef struct ionsim_preset_options {
    double gamma;       /* HWHM, MHz */
    double gamma0;      /* ground-state dephasing, MHz */
    double omega_r;     /* control half-Rabi, MHz */
    double delta_g;     /* probe detuning, MHz */
    double epsilon;     /* solid-angle fraction */
    double delta_b;     /* Zeeman doublet splitting, MHz */
    double probe_rabi;  /* 0 = automatic weak choice */
    double repump_rabi; /* 8-level repump drive, MHz */
} ionsim_preset_options;

IONSIM_API void ionsim_preset_options_default(ionsim_preset_options* opt);

/* name: two_level | lambda | ba138_4level | ba138_8level */
IONSIM_API ionsim_scheme* ionsim_scheme_preset(const char* name,
                                               const ionsim_preset_options* opt);
IONSIM_API ionsim_scheme* ionsim_scheme_load(const char* path);
IONSIM_API void ionsim_scheme_free(ionsim_scheme* s);
IONSIM_API int ionsim_scheme_dim(const ionsim_scheme* s);

/* rho: 2*dim*dim doubles, interleaved re/im, column-major */
IONSIM_API ionsim_status ionsim_steady_state(const ionsim_scheme* s, double* rho);
IONSIM_API ionsim_status ionsim_probe_spectrum(const ionsim_scheme* s, const double* grid,
                                               size_t n, double* transmission, double* phase);

/* ---- entangle ------------------------------------------------------- */

typedef struct ionsim_protocol_params {
    double p_e;
    double eta;
    double dark_rate;  /* counts/s */
    double gate;       /* s */
    double duty_cycle; /* trials/s */
    double phase_jitter_sigma;
    double kappa_recoil;
    double kappa_dephasing;
    double double_scatter;
    double readout_fidelity;
    double phases[4]; /* phi_L,A phi_L,B phi_D,A phi_D,B */
} ionsim_protocol_params;

/* Paper-parameter defaults with the calibrated herald-channel weights. */
IONSIM_API void ionsim_protocol_params_default(ionsim_protocol_params* p);

/* Gate and double-scatter weight reproducing the stated herald
 * decomposition (coherent single-excitation fraction, dark fraction). */
IONSIM_API ionsim_status ionsim_calibrate_herald_model(double p_e, double eta, double dark_rate,
                                                       double psi_fraction, double dark_fraction,
                                                       double* gate, double* double_scatter);

IONSIM_API ionsim_status ionsim_analytic_single_photon(double p_e, double eta, double* fidelity,
                                                       double* success_probability);
IONSIM_API ionsim_status ionsim_analytic_two_photon(double eta, double* eta_sq,
                                                    double* two_eta_sq);
IONSIM_API ionsim_status ionsim_success_ratio(double eta, double target_fidelity, double* ratio);
IONSIM_API ionsim_status ionsim_detection_chain(const double* stages, size_t n, double* eta);

/* rho: 32 doubles (4x4, interleaved, column-major) */
IONSIM_API ionsim_status ionsim_herald_project(const ionsim_protocol_params* p, double* rho,
                                               double* herald_probability);
IONSIM_API ionsim_status ionsim_fidelity(const double* rho, double* out);
IONSIM_API ionsim_status ionsim_rotate(const double* rho_in, double theta, double phi,
                                       double* rho_out);
IONSIM_API ionsim_status ionsim_parity(const double* rho, double* out);
IONSIM_API ionsim_status ionsim_parity_scan(const double* rho, int double_pulse,
                                            const double* phis, size_t n, double* values,
                                            double* contrast, double* offset);

typedef struct ionsim_mc_stats {
    uint64_t n_trials;
    uint64_t n_heralds;
    double herald_rate_per_min;
    uint64_t counts[3];    /* gg, single excitation, ee */
    double fractions[3];
} ionsim_mc_stats;

IONSIM_API ionsim_status ionsim_monte_carlo(const ionsim_protocol_params* p, uint64_t n_trials,
                                            uint64_t seed, ionsim_mc_stats* stats);
/* parity curve sampled at phis; mean/std_error/n per phase */
IONSIM_API ionsim_status ionsim_monte_carlo_parity(const ionsim_protocol_params* p,
                                                   uint64_t n_trials, uint64_t seed,
                                                   int double_pulse, const double* phis,
                                                   size_t n, double* mean, double* std_error,
                                                   uint64_t* samples, ionsim_mc_stats* stats);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* IONSIM_H */
