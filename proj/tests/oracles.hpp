#pragma once

// Closed forms used as independent references in the tests. Nothing here
// calls into the library.

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

namespace oracle {

using cplx = std::complex<double>;

// Solution of p_t = p_ss from A exp(-(s - c)^2 / (2 sigma^2)).
inline double heat_gaussian(double s, double t, double sigma, double c = 0.0) {
    const double v = sigma * sigma + 2.0 * t;
    return sigma / std::sqrt(v) * std::exp(-(s - c) * (s - c) / (2.0 * v));
}

inline double gaussian(double s, double sigma, double c = 0.0) {
    return std::exp(-(s - c) * (s - c) / (2.0 * sigma * sigma));
}

inline double gaussian_d1(double s, double sigma, double c = 0.0) {
    return -(s - c) / (sigma * sigma) * gaussian(s, sigma, c);
}

inline double gaussian_d2(double s, double sigma, double c = 0.0) {
    const double u = (s - c) / sigma;
    return (u * u - 1.0) / (sigma * sigma) * gaussian(s, sigma, c);
}

// mu1 (2 pi i k)^2 + mu2 (2 pi i k)^3 written out by hand.
inline cplx symbol(cplx mu1, cplx mu2, double k) {
    const double w = 2.0 * std::numbers::pi * k;
    return -mu1 * w * w + mu2 * cplx{0.0, -w * w * w};
}

// Trapezoid sum of e^{2 xi} over xi_j = -L + j h, j = 0..N.
inline double trapezoid_exp2(double L, int N) {
    const double h = L / N;
    double s = 0.0;
    for (int j = 0; j <= N; ++j) {
        const double w = (j == 0 || j == N) ? 0.5 * h : h;
        s += w * std::exp(2.0 * (-L + j * h));
    }
    return s;
}

// Exact solution of the discrete equation for scalar data e^s with the
// companion e^s: g(0,0) = e^x / (1 + S^2 e^{2x}), S the trapezoid sum above.
inline double discrete_rank_one(double x, double L, int N) {
    const double S = trapezoid_exp2(L, N);
    return std::exp(x) / (1.0 + S * S * std::exp(2.0 * x));
}

// Focusing NLS g_t = -i g_xx - 2 i |g|^2 g: plane wave A e^{i(kx - w t)}
// with w = -k^2 + 2|A|^2.
inline cplx nls_plane_wave(double x, double t, double a, double k) {
    const double w = -k * k + 2.0 * a * a;
    return a * std::exp(cplx{0.0, k * x - w * t});
}

// Potential KdV g_t + g_xxx - 3 g_x^2 = 0: g = -sqrt(c) tanh(sqrt(c)/2 (x - c t)).
inline double kdv_kink(double x, double t, double c) {
    return -std::sqrt(c) * std::tanh(0.5 * std::sqrt(c) * (x - c * t));
}

// mKdV g_t + g_xxx - 6 g^2 g_x = 0: g = k tanh(k (x + 2 k^2 t)).
inline double mkdv_kink(double x, double t, double k) {
    return k * std::tanh(k * (x + 2.0 * k * k * t));
}

// Least-squares slope of log e against log h.
inline double fitted_order(const std::vector<double>& h, const std::vector<double>& e) {
    const double n = static_cast<double>(h.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < h.size(); ++i) {
        const double lx = std::log(h[i]), ly = std::log(e[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace oracle
