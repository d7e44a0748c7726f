#ifndef IONSIM_BLOCH_HPP
#define IONSIM_BLOCH_HPP

// Steady-state optical-Bloch / Liouvillian solver for multi-level
// schemes, plus the built-in presets (two_level, lambda, ba138_4level,
// ba138_8level) used to cross-check the closed-form lineshapes.
//
// Conventions: rates, Rabi frequencies and detunings in MHz. A coupling
// with detuning D contributes a rotating-frame diagonal shift
// d_upper - d_lower = (zeeman_upper - zeeman_lower) - D, assigned by a
// breadth-first walk of the coupling graph.

#include <Eigen/Dense>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ionsim {

class DegenerateSteadyStateError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Level {
    std::string label;
    double zeeman = 0.0; // MHz
};

struct Decay {
    std::string upper, lower;
    double rate = 0.0; // population decay rate, MHz
    std::string polarization = "pi";
};

struct Coupling {
    std::string lower, upper;
    double rabi = 0.0;     // Rabi frequency of the coupling, MHz
    double detuning = 0.0; // laser detuning from the unshifted line, MHz
    std::string polarization = "pi";
    bool probe = false; // enters the input-output relation
    bool scan = false;  // detuning offset by the spectrum grid value
};

struct Dephasing {
    std::string a, b;
    double rate = 0.0;
};

struct LevelScheme {
    std::vector<Level> levels;
    std::vector<Decay> decays;
    std::vector<Coupling> couplings;
    std::vector<Dephasing> dephasings;
    double epsilon = 0.04; // probe solid-angle fraction

    int index(const std::string& label) const;
    int dim() const { return static_cast<int>(levels.size()); }
    void validate() const;
};

// Hermitian, trace-one, positive-semidefinite complex matrix.
struct DensityMatrix {
    Eigen::MatrixXcd m;

    // Enforces Hermiticity within 1e-10, trace within 1e-10 of one and
    // eigenvalues >= -1e-8; throws otherwise.
    static DensityMatrix checked(Eigen::MatrixXcd raw);
};

// Rotating-frame Hamiltonian of the scheme (dim x dim).
Eigen::MatrixXcd hamiltonian(const LevelScheme& scheme, double grid_offset = 0.0);

// Lindblad superoperator acting on column-major vec(rho),
// dim^2 x dim^2. For any Hermitian rho the image is traceless and
// Hermitian-preserving.
Eigen::MatrixXcd build_liouvillian(const LevelScheme& scheme, double grid_offset = 0.0);

// Null-space steady state with the trace constraint appended as a
// replacement row. Residual ||L rho||_max <= 1e-10 enforced; a
// degenerate (multi-dimensional) null space raises
// DegenerateSteadyStateError instead of being silently resolved.
DensityMatrix steady_state(const Eigen::MatrixXcd& liouvillian);

struct SpectrumPoint {
    double detuning;
    double transmission;
    double phase;
};

// Weak-probe transmission/phase spectrum via the input-output relation.
// grid values offset the detuning of every scan-flagged coupling.
// Refuses schemes whose probe saturation parameter exceeds 1e-2.
std::vector<SpectrumPoint> probe_spectrum(const LevelScheme& scheme,
                                          std::span<const double> grid);

struct PresetOptions {
    double gamma = 5.5;     // HWHM of the optical line, MHz
    double gamma0 = 0.0;    // ground-state dephasing (lambda), MHz
    double omega_r = 2.0;   // control half-Rabi of Eq.-(10) form, MHz
    double delta_g = 0.0;   // probe detuning, MHz
    double epsilon = 0.04;  // solid-angle fraction
    double delta_b = 9.0;   // Zeeman doublet splitting, MHz
    double probe_rabi = 0.0;  // 0 = auto weak choice
    double repump_rabi = 2.0; // 8-level repump drive, MHz
};

// Presets: "two_level", "lambda", "ba138_4level", "ba138_8level".
LevelScheme preset_scheme(const std::string& name, const PresetOptions& opt = {});

// Structured key-value (JSON) scheme description; see README for the
// documented schema. Unknown keys are rejected.
LevelScheme scheme_from_json_text(const std::string& text);
LevelScheme scheme_from_file(const std::string& path);

} // namespace ionsim

#endif
