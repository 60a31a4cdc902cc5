#pragma once

// Fundamental system of -y'' + V y = z y over one period, together with its
// variational equations in z.  With y_k = d^k y / dz^k the hierarchy is
//
//     y_k'' = (V - z) y_k - k y_{k-1},    y_k(0) = y_k'(0) = 0 for k >= 1,
//
// so a single integration yields theta, phi and their z-derivatives at pi.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hillspec/detail/dop853.hpp"
#include "hillspec/errors.hpp"
#include "hillspec/parallel.hpp"
#include "hillspec/potential.hpp"

namespace hill {

inline constexpr double default_tol = 1e-10;
inline constexpr int max_derivative_order = 3;

/// theta, theta', phi, phi' (or one of their z-derivatives) at x = pi.
struct MonodromyEntries {
    cplx theta{}, theta_prime{}, phi{}, phi_prime{};
};

struct DiscriminantSample {
    cplx z{};
    cplx theta_pi{}, phi_pi{}, theta_prime_pi{}, phi_prime_pi{};
    cplx dz_theta_pi{}, dz_phi_pi{}, dz_theta_prime_pi{}, dz_phi_prime_pi{};
    cplx delta_plus{}, delta_minus{}, delta_plus_dot{};
    double est_error = 0.0;

    /// Highest z-derivative carried; taylor[k] is valid for k <= order.
    int order = 1;
    std::array<MonodromyEntries, max_derivative_order + 1> taylor{};

    cplx delta_plus_derivative(int k) const
    {
        return 0.5 * (taylor[static_cast<std::size_t>(k)].theta +
                      taylor[static_cast<std::size_t>(k)].phi_prime);
    }
    cplx delta_minus_derivative(int k) const
    {
        return 0.5 * (taylor[static_cast<std::size_t>(k)].theta -
                      taylor[static_cast<std::size_t>(k)].phi_prime);
    }
    cplx delta_plus_ddot() const { return delta_plus_derivative(2); }

    cplx wronskian() const { return theta_pi * phi_prime_pi - phi_pi * theta_prime_pi; }

    /// Magnitude of the products whose difference is the Wronskian; the
    /// floating-point floor for identity checks.
    double product_scale() const
    {
        return std::abs(theta_pi * phi_prime_pi) + std::abs(phi_pi * theta_prime_pi);
    }
};

namespace detail {

inline double step_bound(cplx z) { return 0.5 / (1.0 + std::sqrt(std::abs(z))); }

template <int K>
struct FundamentalRhs {
    static constexpr std::size_t size = 4 * (K + 1);
    const Potential* v;
    cplx z;

    void operator()(double x, const State<size>& y, State<size>& dy) const
    {
        const cplx w = v->eval_reduced(x) - z;
        for (int k = 0; k <= K; ++k) {
            const std::size_t b = 4 * static_cast<std::size_t>(k);
            dy[b + 0] = y[b + 1];
            dy[b + 1] = w * y[b + 0];
            dy[b + 2] = y[b + 3];
            dy[b + 3] = w * y[b + 2];
            if (k > 0) {
                const double kk = static_cast<double>(k);
                dy[b + 1] -= kk * y[b - 4];
                dy[b + 3] -= kk * y[b - 2];
            }
        }
    }
};

inline void check_tol(double tol)
{
    if (!(tol >= 1e-13 && tol <= 1e-4))
        throw InvalidInput("integration tolerance must lie in [1e-13, 1e-4], got " +
                           std::to_string(tol));
}

template <int K>
DiscriminantSample integrate_order(const Potential& p, cplx z, double tol)
{
    using Rhs = FundamentalRhs<K>;
    State<Rhs::size> y{};
    y[0] = 1.0;  // theta(0)
    y[3] = 1.0;  // phi'(0)
    const StepControl ctl{tol, step_bound(z), 400000};
    const std::array<double, 1> target{std::numbers::pi};
    const auto stats =
        integrate_through(Rhs{&p, z}, y, 0.0, std::span<const double>(target), ctl,
                          [](std::size_t, double, const State<Rhs::size>&) {});
    if (!stats.ok)
        throw IntegrationError(z, stats.last_err_unit * tol,
                               "tolerance not met within step budget");

    DiscriminantSample s;
    s.z = z;
    s.order = K;
    for (int k = 0; k <= K; ++k) {
        const std::size_t b = 4 * static_cast<std::size_t>(k);
        s.taylor[static_cast<std::size_t>(k)] = {y[b + 0], y[b + 1], y[b + 2], y[b + 3]};
    }
    const auto& m0 = s.taylor[0];
    s.theta_pi = m0.theta;
    s.theta_prime_pi = m0.theta_prime;
    s.phi_pi = m0.phi;
    s.phi_prime_pi = m0.phi_prime;
    if constexpr (K >= 1) {
        const auto& m1 = s.taylor[1];
        s.dz_theta_pi = m1.theta;
        s.dz_theta_prime_pi = m1.theta_prime;
        s.dz_phi_pi = m1.phi;
        s.dz_phi_prime_pi = m1.phi_prime;
    }
    s.delta_plus = 0.5 * (s.theta_pi + s.phi_prime_pi);
    s.delta_minus = 0.5 * (s.theta_pi - s.phi_prime_pi);
    s.delta_plus_dot = 0.5 * (s.dz_theta_pi + s.dz_phi_prime_pi);
    s.est_error = stats.est_error;
    return s;
}

}  // namespace detail

/// Monodromy data and its z-derivatives up to `order` (0..3) at z.
inline DiscriminantSample integrate_fundamental(const Potential& p, cplx z,
                                                double tol = default_tol, int order = 1)
{
    detail::check_tol(tol);
    switch (order) {
    case 0: return detail::integrate_order<0>(p, z, tol);
    case 1: return detail::integrate_order<1>(p, z, tol);
    case 2: return detail::integrate_order<2>(p, z, tol);
    case 3: return detail::integrate_order<3>(p, z, tol);
    default:
        throw InvalidInput("derivative order must be in [0, 3], got " + std::to_string(order));
    }
}

struct GridEntry {
    std::optional<DiscriminantSample> sample;
    std::string error;  // set when sample is empty
    bool ok() const { return sample.has_value(); }
};

/// Element-wise integrate_fundamental; failures are reported per index.
inline std::vector<GridEntry> eval_grid(const Potential& p, const std::vector<cplx>& zs,
                                        double tol = default_tol, int workers = 1,
                                        int order = 1)
{
    detail::check_tol(tol);
    std::vector<GridEntry> out(zs.size());
    parallel_for(zs.size(), workers, [&](std::size_t i) {
        try {
            out[i].sample = integrate_fundamental(p, zs[i], tol, order);
        } catch (const NumericalError& e) {
            out[i].error = e.what();
        }
    });
    return out;
}

/// theta(z, x), phi(z, x) and x-derivatives on a set of abscissae.
struct GridSolution {
    std::vector<double> x;
    std::vector<cplx> theta, theta_prime, phi, phi_prime;
};

/// Dense solution values on arbitrary (not necessarily sorted) nodes,
/// integrating outward from x = 0 in both directions.
inline GridSolution solve_on_grid(const Potential& p, cplx z, const std::vector<double>& xs,
                                  double tol = default_tol)
{
    detail::check_tol(tol);
    GridSolution out;
    out.x = xs;
    const std::size_t n = xs.size();
    out.theta.resize(n);
    out.theta_prime.resize(n);
    out.phi.resize(n);
    out.phi_prime.resize(n);

    std::vector<std::size_t> fwd, bwd;
    for (std::size_t i = 0; i < n; ++i)
        (xs[i] >= 0.0 ? fwd : bwd).push_back(i);
    std::sort(fwd.begin(), fwd.end(), [&](auto a, auto b) { return xs[a] < xs[b]; });
    std::sort(bwd.begin(), bwd.end(), [&](auto a, auto b) { return xs[a] > xs[b]; });

    // Eval reduces x mod pi itself, so the integrator may run past [0, pi].
    struct DenseRhs {
        const Potential* v;
        cplx z;
        void operator()(double x, const detail::State<4>& y, detail::State<4>& dy) const
        {
            const cplx w = (*v)(x) - z;
            dy[0] = y[1];
            dy[1] = w * y[0];
            dy[2] = y[3];
            dy[3] = w * y[2];
        }
    };

    const detail::StepControl ctl{tol, detail::step_bound(z), 4000000};
    for (const auto* order : {&fwd, &bwd}) {
        if (order->empty())
            continue;
        std::vector<double> targets;
        targets.reserve(order->size());
        for (auto i : *order)
            targets.push_back(xs[i]);
        detail::State<4> y{1.0, 0.0, 0.0, 1.0};
        const auto stats = detail::integrate_through(
            DenseRhs{&p, z}, y, 0.0, std::span<const double>(targets), ctl,
            [&](std::size_t k, double, const detail::State<4>& s) {
                const std::size_t i = (*order)[k];
                out.theta[i] = s[0];
                out.theta_prime[i] = s[1];
                out.phi[i] = s[2];
                out.phi_prime[i] = s[3];
            });
        if (!stats.ok)
            throw IntegrationError(z, stats.last_err_unit * tol,
                                   "dense solution did not meet tolerance");
    }
    return out;
}

}  // namespace hill
