#ifndef IONSIM_MIRROR_HPP
#define IONSIM_MIRROR_HPP

// Atom-mirror Fabry-Perot model: the ion acts as a mirror with
// amplitude reflectivity 2*epsilon facing a dielectric mirror of
// amplitude reflectivity r at distance R, probed on resonance.

#include <complex>
#include <stdexcept>
#include <vector>

namespace ionsim {

struct CavityParams {
    double epsilon = 0.04;        // solid-angle fraction
    double r = 0.5;               // mirror amplitude reflectivity, [0, 1)
    double atom_mirror_distance = 0.3; // meters
    double wavelength = 493e-9;   // meters

    double t2() const { return 1.0 - r * r; } // amplitude transmissivity squared

    void validate() const {
        if (!(epsilon >= 0.0 && epsilon <= 0.5))
            throw std::invalid_argument("CavityParams: epsilon must be in [0, 0.5]");
        if (!(r >= 0.0 && r < 1.0))
            throw std::invalid_argument("CavityParams: r must be in [0, 1)");
        if (!(2.0 * epsilon * r < 1.0))
            throw std::invalid_argument("CavityParams: 2*epsilon*r must be < 1");
        if (!(wavelength > 0.0))
            throw std::invalid_argument("CavityParams: wavelength must be > 0");
        if (!std::isfinite(atom_mirror_distance))
            throw std::invalid_argument("CavityParams: distance must be finite");
    }
};

// Round-trip phase 2 k R, reduced modulo 2*pi via R mod (lambda/2) to
// avoid precision loss at metre-scale distances.
double round_trip_phase(const CavityParams& p, double position);

// T = |t (1 - 2 eps) / (1 - 2 r eps e^{i phi})|^2 at phi = round-trip phase.
double fp_transmission(const CavityParams& p);
double fp_transmission_phi(double epsilon, double r, double phi);

// Same transmission through the cavity-QED form
// T = t^2 |1 - 2 g_eps gbar*/(gamma~ + i Delta~)|^2 with the coupling
// ratio eps (1 - r e^{i phi}) / (1 - 2 r eps e^{i phi}).
double qed_transmission(const CavityParams& p);
double qed_transmission_phi(double epsilon, double r, double phi);

// The single complex coupling ratio g_eps gbar*/(gamma~ + i Delta~).
std::complex<double> qed_coupling_ratio(double epsilon, double r, double phi);

// F = pi 2 eps r / (1 - (2 eps r)^2).
double finesse(const CavityParams& p);

struct FringePoint {
    double position;
    double transmission;
    double reflection_proxy;
};

// Transmission vs mirror position (period lambda/2) plus a
// phenomenological anti-phased reflection proxy of amplitude
// reflection_amplitude (the paper gives no absolute reflection
// normalization).
std::vector<FringePoint> fringe_scan(const CavityParams& p,
                                     const std::vector<double>& positions,
                                     double reflection_amplitude = 1.0);

} // namespace ionsim

#endif
