#pragma once

// Truncated Fourier-basis (Hill's method) eigenvalue oracles, independent of
// the ODE integrator.

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <complex>
#include <numbers>
#include <vector>

#include "hillspec/potential.hpp"

namespace oracle {

using cplx = std::complex<double>;

inline std::vector<cplx> sorted_by_real(const Eigen::VectorXcd& ev)
{
    std::vector<cplx> out(ev.data(), ev.data() + ev.size());
    std::sort(out.begin(), out.end(), [](cplx a, cplx b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });
    return out;
}

/// Periodic (shift 0) or antiperiodic (shift 1) eigenvalues in the basis
/// exp(i(2n + shift)x), |n| <= modes.
inline std::vector<cplx> floquet_eigenvalues(const hill::Potential& p, int modes, int shift)
{
    const int size = shift == 0 ? 2 * modes + 1 : 2 * modes;
    const int first = -modes;
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(size, size);
    for (int r = 0; r < size; ++r) {
        for (int c = 0; c < size; ++c) {
            const int m = first + r, n = first + c;
            h(r, c) = p.coefficient(m - n);
        }
        const double k = 2.0 * (first + r) + shift;
        h(r, r) += k * k;
    }
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(h, false);
    return sorted_by_real(es.eigenvalues());
}

inline std::vector<cplx> periodic_eigenvalues(const hill::Potential& p, int modes = 64)
{
    return floquet_eigenvalues(p, modes, 0);
}

inline std::vector<cplx> antiperiodic_eigenvalues(const hill::Potential& p, int modes = 64)
{
    return floquet_eigenvalues(p, modes, 1);
}

/// integral over [0, pi] of exp(i a x)
inline cplx exp_integral(int a)
{
    if (a == 0)
        return std::numbers::pi;
    const cplx ia(0.0, static_cast<double>(a));
    return (std::exp(ia * std::numbers::pi) - 1.0) / ia;
}

/// Dirichlet eigenvalues in the sine basis sin(kx), k = 1..modes.
inline std::vector<cplx> dirichlet_eigenvalues(const hill::Potential& p, int modes = 64)
{
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(modes, modes);
    for (int j = 1; j <= modes; ++j) {
        for (int k = 1; k <= modes; ++k) {
            // (2/pi) int sin(jx) sin(kx) V(x) dx with sin sin = (cos(j-k)x - cos(j+k)x)/2
            cplx acc{};
            for (const auto& t : p.modes()) {
                const int a = 2 * t.n;
                const cplx cm = 0.5 * (exp_integral(a + (j - k)) + exp_integral(a - (j - k)));
                const cplx cp = 0.5 * (exp_integral(a + (j + k)) + exp_integral(a - (j + k)));
                acc += t.c * 0.5 * (cm - cp);
            }
            h(j - 1, k - 1) = acc * (2.0 / std::numbers::pi);
        }
        h(j - 1, j - 1) += static_cast<double>(j) * j;
    }
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(h, false);
    return sorted_by_real(es.eigenvalues());
}

}  // namespace oracle
