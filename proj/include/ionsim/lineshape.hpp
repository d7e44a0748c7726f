#ifndef IONSIM_LINESHAPE_HPP
#define IONSIM_LINESHAPE_HPP

// Closed-form free-space scattering responses of a single trapped ion:
// probe transmission and phase shift, Zeeman-doublet polarimetry and
// Faraday rotation, and the analytic Lambda-system EIT susceptibility.
//
// All rates and detunings are ordinary frequencies in MHz; every formula
// uses only ratios so no 2*pi factors enter. gamma is the half width
// (HWHM) of the amplitude response.

#include <complex>
#include <stdexcept>

namespace ionsim {

using Complex = std::complex<double>;

// Two-level probe response: gamma (HWHM, MHz), solid-angle fraction
// epsilon in [0, 0.5], line-center offset delta0 (MHz).
struct TwoLevelParams {
    double gamma = 5.5;
    double epsilon = 0.04;
    double delta0 = 0.0;

    void validate() const {
        if (!(gamma > 0.0))
            throw std::invalid_argument("TwoLevelParams: gamma must be > 0");
        if (!(epsilon >= 0.0 && epsilon <= 0.5))
            throw std::invalid_argument("TwoLevelParams: epsilon must be in [0, 0.5]");
    }
};

// Zeeman doublet driven by the two circular probe components.
// The sigma- line sits at delta0 - delta_b, the sigma+ line at
// delta0 + delta_b. rho_minus/rho_plus are the ground-state populations
// feeding the two transitions and must sum to one.
struct ZeemanDoubletParams {
    TwoLevelParams base;
    double delta_b = 9.0;
    double rho_minus = 0.9;
    double rho_plus = 0.1;

    void validate() const {
        base.validate();
        if (rho_minus < 0.0 || rho_minus > 1.0 || rho_plus < 0.0 || rho_plus > 1.0)
            throw std::invalid_argument("ZeemanDoubletParams: populations must be in [0,1]");
        if (std::abs(rho_minus + rho_plus - 1.0) > 1e-12)
            throw std::invalid_argument("ZeemanDoubletParams: rho_minus + rho_plus must equal 1");
    }
};

// Lambda-system parameters: optical linewidth gamma, ground-state
// dephasing gamma0, control Rabi frequency omega_r, probe detuning
// delta_g. The two-photon detuning is passed per call.
struct LambdaParams {
    double gamma = 10.0;
    double gamma0 = 0.0;
    double omega_r = 2.0;
    double delta_g = 0.0;

    void validate() const {
        if (!(gamma > 0.0))
            throw std::invalid_argument("LambdaParams: gamma must be > 0");
        if (gamma0 < 0.0)
            throw std::invalid_argument("LambdaParams: gamma0 must be >= 0");
        if (omega_r < 0.0)
            throw std::invalid_argument("LambdaParams: omega_r must be >= 0");
    }
};

// Detected intensities (normalized to input) and the Stokes parameters
// they generate: s0 = i0 + i90, s1 = i0 - i90, s2 = 2*i45 - s0.
struct StokesSample {
    double i0, i45, i90;
    double s0, s1, s2;
};

struct FaradayAngle {
    double exact;      // 0.5 * arg[1 - 2 eps (L+ - L-)]
    double estimator;  // 0.5 * atan((2 I45 - I0) / I0)
};

// L(delta) = gamma / (gamma + i (delta - delta0)); |L| <= 1.
Complex lorentzian(double delta, const TwoLevelParams& p);

// T(delta) = |1 - 2 eps L(delta)|^2, in [0, 1].
double transmission(double delta, const TwoLevelParams& p);

// phi(delta) = arg[1 - 2 eps L(delta)], odd about delta0.
double phase_shift(double delta, const TwoLevelParams& p);

// Output field amplitudes (E+_out, E-_out) of the two circular
// components, normalized to E_in and including the 1/sqrt(2) split.
std::pair<Complex, Complex> doublet_outputs(double delta, const ZeemanDoubletParams& p);

StokesSample polarimetry(double delta, const ZeemanDoubletParams& p);

FaradayAngle faraday_angle(double delta, const ZeemanDoubletParams& p);

// L_Lambda(delta) = gamma (gamma0 - i delta) /
//                   ((gamma0 - i delta)(gamma + i delta_g) + omega_r^2)
Complex eit_susceptibility(double delta_two_photon, const LambdaParams& p);

} // namespace ionsim

#endif
