#ifndef IONSIM_ENTANGLE_HPP
#define IONSIM_ENTANGLE_HPP

// Single-photon heralded entanglement protocol: analytic rate/fidelity
// formulas, joint-state herald projection with detection imperfections,
// collective-rotation/parity state estimation, and a seeded Monte-Carlo
// trial engine.
//
// Two-qubit basis ordering is {gg, ge, eg, ee} with the first letter
// referring to atom A.

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ionsim {

struct ProtocolParams {
    double p_e = 0.07;              // excitation probability per atom
    double eta = 8e-4;              // overall single-photon detection efficiency
    double dark_rate = 10.0;        // detector dark counts, counts/s
    double gate = 2.3406741573033708e-7; // herald window, s (see calibrate_herald_model)
    double duty_cycle = 2300.0;     // trials per second, Hz
    double phase_jitter_sigma = 0.0; // std-dev of the state phase, rad
    double kappa_recoil = 0.45;     // coherence kept after recoil kicks
    double kappa_dephasing = 0.96;  // coherence kept after magnetic dephasing
    double double_scatter = 0.0;    // same-ion double-scatter channel weight
    double readout_fidelity = 0.98; // {gg, single, ee} discrimination probability
    // Excitation-laser and detection-path phases (phi_L,A phi_L,B
    // phi_D,A phi_D,B), radians.
    std::array<double, 4> phases{0.0, 0.0, 0.0, 0.0};

    void validate() const;
};

struct TwoQubitState {
    Eigen::Matrix4cd rho;

    static TwoQubitState checked(Eigen::Matrix4cd raw); // Hermitian/trace/PSD
};

struct RotationPulse {
    double theta = 0.0; // pulse area, >= 0
    double phi = 0.0;   // pulse phase
};

// Normalized amplitude vector over {g,e}^2 (x) {0,1}^2 photon modes,
// index = 4*atom + photon with atom/photon in {gg=0, ge=1, eg=2, ee=3}
// and photon pairs {00, 01, 10, 11}.
struct JointState {
    Eigen::Matrix<std::complex<double>, 16, 1> amplitudes;
    double p_e = 0.0;
};

struct AnalyticSinglePhoton {
    double fidelity;            // F1 = (1 - p_e) / (1 - eta p_e)
    double success_probability; // P_s1 = 2 eta p_e (1 - eta p_e)
};

struct AnalyticTwoPhoton {
    double eta_squared;     // eta^2 convention
    double two_eta_squared; // 2 eta^2 convention
};

AnalyticSinglePhoton analytic_single_photon(double p_e, double eta);
AnalyticTwoPhoton analytic_two_photon(double eta);

// Solves p_e from F1 = target and returns P_s1 / P_s2 with P_s2 = eta^2.
// Throws if the target fidelity would need p_e > 1.
double success_ratio(double eta, double target_fidelity);

// Product of the multiplicative stage efficiencies; empty list gives 1.
double detection_chain_efficiency(std::span<const double> stages);

JointState joint_state(double p_e, const std::array<double, 4>& phases);

struct HeraldResult {
    TwoQubitState state;
    double herald_probability; // per trial
    // Per-channel herald weights: coherent single excitation, double
    // excitation of both ions, same-ion double scatter, dark counts.
    double w_psi, w_ee, w_double_scatter, w_dark;
};

// Conditional two-atom state after a single herald click, mixing the
// |Psi^phi> projection with the double-excitation, double-scatter and
// dark-count channels, then scaling the coherence by
// kappa_recoil * kappa_dephasing * exp(-sigma^2/2).
HeraldResult herald_project(const JointState& joint, const ProtocolParams& params);

// Gate and double-scatter weight that reproduce the measured herald
// decomposition (dark fraction, coherent single-excitation fraction)
// at the given excitation/detection parameters.
struct HeraldCalibration {
    double gate;
    double double_scatter;
};
HeraldCalibration calibrate_herald_model(double p_e, double eta, double dark_rate,
                                         double psi_fraction = 0.89,
                                         double dark_fraction = 0.02);

// Collective rotation R(theta, phi) = exp[-i theta/2 (cos phi Sx + sin phi Sy)]
// applied to both qubits.
TwoQubitState rotate(const TwoQubitState& state, const RotationPulse& pulse);
Eigen::Matrix4cd rotation_matrix(const RotationPulse& pulse);

// Tr(P rho) with P = p_gg + p_ee - p_eg - p_ge.
double parity(const TwoQubitState& state);

struct ParityScan {
    std::vector<double> phi;
    std::vector<double> value;
    double contrast; // (max - min) / 2
    double offset;   // (max + min) / 2
};

// Trace (i): single pulse R(pi/2, phi). Trace (ii): double pulse
// R(pi/2, phi) R(pi/2, pi/2), oscillating with period pi and
// <P>_{phi->0} = 2 Re(rho_ge,eg - rho_gg,ee).
ParityScan parity_scan(const TwoQubitState& state, bool double_pulse,
                       std::span<const double> phi_grid);

// F = <Psi+|rho|Psi+> = 1/2 [rho_ge + rho_eg + 2 Re(rho_eg,ge)].
double fidelity(const TwoQubitState& state);

struct McParityPoint {
    double phi;
    double mean;
    double std_error;
    std::uint64_t n;
};

struct McStats {
    std::uint64_t n_trials = 0;
    std::uint64_t n_heralds = 0;
    double herald_rate_per_min = 0.0;
    // Measured population histogram after readout discrimination:
    // {gg, single excitation, ee}.
    std::array<std::uint64_t, 3> counts{0, 0, 0};
    std::array<double, 3> fractions{0.0, 0.0, 0.0};
    std::vector<McParityPoint> parity; // double-pulse trace when requested
};

struct McOptions {
    std::uint64_t n_trials = 1000000;
    std::uint64_t seed = 1;
    std::vector<double> parity_phis; // empty = skip parity sampling
    bool double_pulse = true;
};

// Seed-reproducible Monte-Carlo realization of the protocol; converges
// to herald_project statistics as n_trials grows.
McStats monte_carlo(const ProtocolParams& params, const McOptions& opt);

} // namespace ionsim

#endif
