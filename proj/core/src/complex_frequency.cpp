#include "cfgrid/complex_frequency.hpp"

#include <cmath>
#include <numbers>

#include "cfgrid/error.hpp"

namespace cfgrid {

double wrap_angle(double a) {
    double w = std::remainder(a, 2.0 * std::numbers::pi);
    if (w <= -std::numbers::pi) w += 2.0 * std::numbers::pi;
    return w;
}

PolarComplex to_log_polar(Complex u, double eps_mag) {
    double mag = std::abs(u);
    if (!(mag > eps_mag)) fail(ErrorKind::MagnitudeUnderflow, "|u| <= eps_mag");
    double theta = std::arg(u);
    if (theta == -std::numbers::pi) theta = std::numbers::pi;
    return {std::log(mag), theta};
}

Complex apply_cf(Complex u, const ComplexFrequency& cf) { return cf.value() * u; }

std::vector<double> differentiate(const std::vector<double>& x, double dt) {
    const std::size_t n = x.size();
    if (n < 3) fail(ErrorKind::TooFewSamples, "need at least 3 samples");
    std::vector<double> d(n);
    const double s = 1.0 / (2.0 * dt);
    d[0] = (-3.0 * x[0] + 4.0 * x[1] - x[2]) * s;
    for (std::size_t k = 1; k + 1 < n; ++k) d[k] = (x[k + 1] - x[k - 1]) * s;
    d[n - 1] = (3.0 * x[n - 1] - 4.0 * x[n - 2] + x[n - 3]) * s;
    return d;
}

std::vector<ComplexFrequency> estimate_cf(const ComplexSignal& signal,
                                          const CfEstimateOptions& options) {
    const auto& u = signal.samples;
    const std::size_t n = u.size();
    if (n < 3) fail(ErrorKind::TooFewSamples, "need at least 3 samples, got " + std::to_string(n));
    if (!(signal.dt > 0.0)) fail(ErrorKind::InvalidArgument, "dt must be positive");

    std::vector<char> bad(n, 0);
    std::vector<double> kappa(n, 0.0), theta(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        double mag = std::abs(u[k]);
        if (!(mag > options.eps_mag) || !std::isfinite(mag)) {
            bad[k] = 1;
            continue;
        }
        kappa[k] = std::log(mag);
        theta[k] = std::arg(u[k]);
    }

    // Unwrap along valid runs; a flagged sample breaks the chain.
    std::vector<double> unwrapped(theta);
    for (std::size_t k = 1; k < n; ++k) {
        if (bad[k] || bad[k - 1]) continue;
        double step = wrap_angle(theta[k] - theta[k - 1]);
        if (std::abs(step) > options.max_phase_step)
            fail(ErrorKind::UnwrapAliasing,
                 "phase step " + std::to_string(step) + " rad at sample " + std::to_string(k));
        unwrapped[k] = unwrapped[k - 1] + step;
    }

    std::vector<ComplexFrequency> out(n);
    const double s = 1.0 / (2.0 * signal.dt);
    auto central = [&](const std::vector<double>& f, std::size_t k) {
        return (f[k + 1] - f[k - 1]) * s;
    };
    for (std::size_t k = 0; k < n; ++k) {
        if (k == 0) {
            if (bad[0] || bad[1] || bad[2]) { out[k] = ComplexFrequency::flagged(); continue; }
            out[k] = {(-3.0 * kappa[0] + 4.0 * kappa[1] - kappa[2]) * s,
                      (-3.0 * unwrapped[0] + 4.0 * unwrapped[1] - unwrapped[2]) * s, false};
        } else if (k == n - 1) {
            if (bad[n - 1] || bad[n - 2] || bad[n - 3]) { out[k] = ComplexFrequency::flagged(); continue; }
            out[k] = {(3.0 * kappa[n - 1] - 4.0 * kappa[n - 2] + kappa[n - 3]) * s,
                      (3.0 * unwrapped[n - 1] - 4.0 * unwrapped[n - 2] + unwrapped[n - 3]) * s, false};
        } else {
            if (bad[k - 1] || bad[k] || bad[k + 1]) { out[k] = ComplexFrequency::flagged(); continue; }
            out[k] = {central(kappa, k), central(unwrapped, k), false};
        }
    }
    return out;
}

}  // namespace cfgrid
