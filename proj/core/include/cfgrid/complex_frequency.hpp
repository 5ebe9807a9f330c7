#pragma once

#include <complex>
#include <limits>
#include <vector>

namespace cfgrid {

using Complex = std::complex<double>;

inline constexpr double kDefaultEpsMag = 1e-9;
inline constexpr double kDefaultEpsSing = 1e-9;

/// rho + j*omega. rho in 1/s, omega in rad/s.
struct ComplexFrequency {
    double rho = 0.0;
    double omega = 0.0;
    bool singular = false;

    Complex value() const { return {rho, omega}; }

    static ComplexFrequency from(Complex c) { return {c.real(), c.imag(), false}; }
    static ComplexFrequency flagged() {
        constexpr double nan = std::numeric_limits<double>::quiet_NaN();
        return {nan, nan, true};
    }
};

/// u = exp(kappa + j*theta)
struct PolarComplex {
    double kappa = 0.0;
    double theta = 0.0;
};

struct ComplexSignal {
    std::vector<Complex> samples;
    double dt = 0.0;
};

struct CfEstimateOptions {
    double eps_mag = kDefaultEpsMag;
    // Largest per-step phase increment accepted as unambiguous.
    double max_phase_step = 0.9 * 3.14159265358979323846;
};

PolarComplex to_log_polar(Complex u, double eps_mag = kDefaultEpsMag);

/// Time derivative implied by the CF: (rho + j omega) * u.
Complex apply_cf(Complex u, const ComplexFrequency& cf);

/// Per-sample CF by second-order differences on (kappa, theta).
/// Samples at or below eps_mag come back flagged, as does every sample whose
/// stencil touches one of them.
std::vector<ComplexFrequency> estimate_cf(const ComplexSignal& signal,
                                          const CfEstimateOptions& options = {});

/// Wraps an angle into (-pi, pi].
double wrap_angle(double a);

/// Second-order derivative of a uniformly sampled real series. Central in the
/// interior, one-sided at both ends.
std::vector<double> differentiate(const std::vector<double>& x, double dt);

}  // namespace cfgrid
