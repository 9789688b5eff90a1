// quadrature.hpp — adaptive 1-D integration with convergence reporting

#pragma once

#include <complex>
#include <functional>
#include <limits>

namespace bosedot::quad {

struct Options {
    double abs_tol{1e-10};
    double rel_tol{1e-12};
    unsigned max_depth{14}; // at most 2^max_depth panels
};

struct Result {
    double value{0.0};
    double error{0.0};
};

// Gauss-Kronrod 61-point adaptive panels; b may be +infinity.
// Throws ConvergenceError when the error estimate exceeds max(abs_tol, rel_tol*|value|).
Result integrate(const std::function<double(double)>& f, double a, double b, const Options& opt = {});

std::complex<double> integrate_complex(const std::function<std::complex<double>(double)>& f,
                                       double a, double b, const Options& opt = {});

// 4 pi int_0^inf k^2 h(k) dk, the radial reduction of a 3-D integral of a radial function.
double radial(const std::function<double(double)>& h, const Options& opt = {});
std::complex<double> radial_complex(const std::function<std::complex<double>(double)>& h,
                                    const Options& opt = {});

} // namespace bosedot::quad
