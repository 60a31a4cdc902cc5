#pragma once

// Dormand-Prince 8(5,3) embedded Runge-Kutta pair on complex state vectors.
// Tableau after Hairer, Norsett & Wanner (DOP853).

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>

namespace hill::detail {

namespace dop853 {
inline constexpr double c2 = 0.526001519587677318785587544488e-01;
inline constexpr double c3 = 0.789002279381515978178381316732e-01;
inline constexpr double c4 = 0.118350341907227396726757197510e+00;
inline constexpr double c5 = 0.281649658092772603273242802490e+00;
inline constexpr double c6 = 0.333333333333333333333333333333e+00;
inline constexpr double c7 = 0.25e+00;
inline constexpr double c8 = 0.307692307692307692307692307692e+00;
inline constexpr double c9 = 0.651282051282051282051282051282e+00;
inline constexpr double c10 = 0.6e+00;
inline constexpr double c11 = 0.857142857142857142857142857142e+00;
inline constexpr double a21 = 5.26001519587677318785587544488e-2;
inline constexpr double a31 = 1.97250569845378994544595329183e-2;
inline constexpr double a32 = 5.91751709536136983633785987549e-2;
inline constexpr double a41 = 2.95875854768068491816892993775e-2;
inline constexpr double a43 = 8.87627564304205475450678981324e-2;
inline constexpr double a51 = 2.41365134159266685502369798665e-1;
inline constexpr double a53 = -8.84549479328286085344864962717e-1;
inline constexpr double a54 = 9.24834003261792003115737966543e-1;
inline constexpr double a61 = 3.7037037037037037037037037037e-2;
inline constexpr double a64 = 1.70828608729473871279604482173e-1;
inline constexpr double a65 = 1.25467687566822425016691814123e-1;
inline constexpr double a71 = 3.7109375e-2;
inline constexpr double a74 = 1.70252211019544039314978060272e-1;
inline constexpr double a75 = 6.02165389804559606850219397283e-2;
inline constexpr double a76 = -1.7578125e-2;
inline constexpr double a81 = 3.70920001185047927108779319836e-2;
inline constexpr double a84 = 1.70383925712239993810214054705e-1;
inline constexpr double a85 = 1.07262030446373284651809199168e-1;
inline constexpr double a86 = -1.53194377486244017527936158236e-2;
inline constexpr double a87 = 8.27378916381402288758473766002e-3;
inline constexpr double a91 = 6.24110958716075717114429577812e-1;
inline constexpr double a94 = -3.36089262944694129406857109825e0;
inline constexpr double a95 = -8.68219346841726006818189891453e-1;
inline constexpr double a96 = 2.75920996994467083049415600797e1;
inline constexpr double a97 = 2.01540675504778934086186788979e1;
inline constexpr double a98 = -4.34898841810699588477366255144e1;
inline constexpr double a101 = 4.77662536438264365890433908527e-1;
inline constexpr double a104 = -2.48811461997166764192642586468e0;
inline constexpr double a105 = -5.90290826836842996371446475743e-1;
inline constexpr double a106 = 2.12300514481811942347288949897e1;
inline constexpr double a107 = 1.52792336328824235832596922938e1;
inline constexpr double a108 = -3.32882109689848629194453265587e1;
inline constexpr double a109 = -2.03312017085086261358222928593e-2;
inline constexpr double a111 = -9.3714243008598732571704021658e-1;
inline constexpr double a114 = 5.18637242884406370830023853209e0;
inline constexpr double a115 = 1.09143734899672957818500254654e0;
inline constexpr double a116 = -8.14978701074692612513997267357e0;
inline constexpr double a117 = -1.85200656599969598641566180701e1;
inline constexpr double a118 = 2.27394870993505042818970056734e1;
inline constexpr double a119 = 2.49360555267965238987089396762e0;
inline constexpr double a1110 = -3.0467644718982195003823669022e0;
inline constexpr double a121 = 2.27331014751653820792359768449e0;
inline constexpr double a124 = -1.05344954667372501984066689879e1;
inline constexpr double a125 = -2.00087205822486249909675718444e0;
inline constexpr double a126 = -1.79589318631187989172765950534e1;
inline constexpr double a127 = 2.79488845294199600508499808837e1;
inline constexpr double a128 = -2.85899827713502369474065508674e0;
inline constexpr double a129 = -8.87285693353062954433549289258e0;
inline constexpr double a1210 = 1.23605671757943030647266201528e1;
inline constexpr double a1211 = 6.43392746015763530355970484046e-1;
inline constexpr double b1 = 5.42937341165687622380535766363e-2;
inline constexpr double b6 = 4.45031289275240888144113950566e0;
inline constexpr double b7 = 1.89151789931450038304281599044e0;
inline constexpr double b8 = -5.8012039600105847814672114227e0;
inline constexpr double b9 = 3.1116436695781989440891606237e-1;
inline constexpr double b10 = -1.52160949662516078556178806805e-1;
inline constexpr double b11 = 2.01365400804030348374776537501e-1;
inline constexpr double b12 = 4.47106157277725905176885569043e-2;
inline constexpr double e31 = 0.244094488188976377952755905512e+00;
inline constexpr double e32 = 0.733846688281611857341361741547e+00;
inline constexpr double e33 = 0.220588235294117647058823529412e-01;
inline constexpr double e51 = 0.1312004499419488073250102996e-01;
inline constexpr double e56 = -0.1225156446376204440720569753e+01;
inline constexpr double e57 = -0.4957589496572501915214079952e+00;
inline constexpr double e58 = 0.1664377182454986536961530415e+01;
inline constexpr double e59 = -0.3503288487499736816886487290e+00;
inline constexpr double e510 = 0.3341791187130174790297318841e+00;
inline constexpr double e511 = 0.8192320648511571246570742613e-01;
inline constexpr double e512 = -0.2235530786388629525884427845e-01;
}  // namespace dop853

struct StepControl {
    double tol = 1e-10;
    double max_step = 0.1;
    long max_steps = 200000;
};

struct StepStats {
    bool ok = true;
    long accepted = 0;
    long rejected = 0;
    double est_error = 0.0;     // accumulated scaled local error
    double last_err_unit = 0.0; // error per unit step of the last attempt
};

template <std::size_t N>
using State = std::array<std::complex<double>, N>;

/// Integrates y' = rhs(x, y) from x0 through the monotone sequence of
/// targets, landing exactly on each one and handing the state to
/// on_target(index, x, y).  Local errors are measured per unit step against
/// tol * max(1, |y_i|).
template <std::size_t N, class Rhs, class Observer>
StepStats integrate_through(Rhs&& rhs, State<N>& y, double x0, std::span<const double> targets,
                            const StepControl& ctl, Observer&& on_target)
{
    using namespace dop853;
    using C = std::complex<double>;
    StepStats stats;
    if (targets.empty())
        return stats;

    const double dir = targets.back() >= x0 ? 1.0 : -1.0;
    double x = x0;
    double h = std::min(ctl.max_step, 0.02);
    State<N> k1, k2, k3, k4, k5, k6, k7, k8, k9, k10, k11, k12, yw, ynew;
    rhs(x, y, k1);

    std::size_t next = 0;
    bool last_rejected = false;
    while (next < targets.size()) {
        const double target = targets[next];
        const double remaining = (target - x) * dir;
        if (remaining <= 1e-15 * std::max(1.0, std::abs(target))) {
            x = target;
            on_target(next, x, static_cast<const State<N>&>(y));
            ++next;
            continue;
        }
        if (stats.accepted + stats.rejected >= ctl.max_steps) {
            stats.ok = false;
            return stats;
        }

        double hs = std::min({h, ctl.max_step, remaining});
        bool landing = false;
        if (remaining <= 1.05 * hs) {
            hs = remaining;
            landing = true;
        }
        const double hh = dir * hs;

        for (std::size_t i = 0; i < N; ++i)
            yw[i] = y[i] + hh * (a21 * k1[i]);
        rhs(x + c2 * hh, yw, k2);
        for (std::size_t i = 0; i < N; ++i)
            yw[i] = y[i] + hh * (a31 * k1[i] + a32 * k2[i]);
        rhs(x + c3 * hh, yw, k3);
        for (std::size_t i = 0; i < N; ++i)
            yw[i] = y[i] + hh * (a41 * k1[i] + a43 * k3[i]);
        rhs(x + c4 * hh, yw, k4);
        for (std::size_t i = 0; i < N; ++i)
            yw[i] = y[i] + hh * (a51 * k1[i] + a53 * k3[i] + a54 * k4[i]);
        rhs(x + c5 * hh, yw, k5);
        for (std::size_t i = 0; i < N; ++i)
            yw[i] = y[i] + hh * (a61 * k1[i] + a64 * k4[i] + a65 * k5[i]);
        rhs(x + c6 * hh, yw, k6);
        for (std::size_t i = 0; i < N; ++i)
            yw[i] = y[i] + hh * (a71 * k1[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
        rhs(x + c7 * hh, yw, k7);
        for (std::size_t i = 0; i < N; ++i)
            yw[i] = y[i] + hh * (a81 * k1[i] + a84 * k4[i] + a85 * k5[i] + a86 * k6[i] + a87 * k7[i]);
        rhs(x + c8 * hh, yw, k8);
        for (std::size_t i = 0; i < N; ++i)
            yw[i] = y[i] + hh * (a91 * k1[i] + a94 * k4[i] + a95 * k5[i] + a96 * k6[i] +
                                 a97 * k7[i] + a98 * k8[i]);
        rhs(x + c9 * hh, yw, k9);
        for (std::size_t i = 0; i < N; ++i)
            yw[i] = y[i] + hh * (a101 * k1[i] + a104 * k4[i] + a105 * k5[i] + a106 * k6[i] +
                                 a107 * k7[i] + a108 * k8[i] + a109 * k9[i]);
        rhs(x + c10 * hh, yw, k10);
        for (std::size_t i = 0; i < N; ++i)
            yw[i] = y[i] + hh * (a111 * k1[i] + a114 * k4[i] + a115 * k5[i] + a116 * k6[i] +
                                 a117 * k7[i] + a118 * k8[i] + a119 * k9[i] + a1110 * k10[i]);
        rhs(x + c11 * hh, yw, k11);
        for (std::size_t i = 0; i < N; ++i)
            yw[i] = y[i] + hh * (a121 * k1[i] + a124 * k4[i] + a125 * k5[i] + a126 * k6[i] +
                                 a127 * k7[i] + a128 * k8[i] + a129 * k9[i] + a1210 * k10[i] +
                                 a1211 * k11[i]);
        rhs(x + hh, yw, k12);

        double err3 = 0.0, err5 = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const C incr = b1 * k1[i] + b6 * k6[i] + b7 * k7[i] + b8 * k8[i] + b9 * k9[i] +
                           b10 * k10[i] + b11 * k11[i] + b12 * k12[i];
            ynew[i] = y[i] + hh * incr;
            const double sc =
                ctl.tol * std::max({1.0, std::abs(y[i]), std::abs(ynew[i])});
            const C e3 = incr - e31 * k1[i] - e32 * k9[i] - e33 * k12[i];
            const C e5 = e51 * k1[i] + e56 * k6[i] + e57 * k7[i] + e58 * k8[i] + e59 * k9[i] +
                         e510 * k10[i] + e511 * k11[i] + e512 * k12[i];
            err3 += std::norm(e3) / (sc * sc);
            err5 += std::norm(e5) / (sc * sc);
        }
        double denom = err5 + 0.01 * err3;
        const double err =
            denom > 0.0 ? hs * err5 / std::sqrt(static_cast<double>(N) * denom) : 0.0;
        const double err_unit = err / hs;
        stats.last_err_unit = err_unit;

        if (!std::isfinite(err_unit)) {
            stats.ok = false;
            return stats;
        }

        if (err_unit <= 1.0) {
            x = landing ? target : x + hh;
            y = ynew;
            rhs(x, y, k1);
            ++stats.accepted;
            stats.est_error += err * ctl.tol;
            double fac = err_unit == 0.0 ? 6.0 : 0.9 * std::pow(err_unit, -0.125);
            fac = std::clamp(fac, 0.333, 6.0);
            if (last_rejected)
                fac = std::min(fac, 1.0);
            double proposed = hs * fac;
            // A forced short landing step says little about the natural step.
            if (landing && hs < h && fac >= 1.0)
                proposed = std::max(proposed, h);
            h = proposed;
            last_rejected = false;
            if (landing) {
                on_target(next, x, static_cast<const State<N>&>(y));
                ++next;
            }
        } else {
            ++stats.rejected;
            h = hs * std::max(0.333, 0.9 * std::pow(err_unit, -0.125));
            last_rejected = true;
        }
        if (h < 1e-14 * (1.0 + std::abs(x))) {
            stats.ok = false;
            return stats;
        }
    }
    return stats;
}

}  // namespace hill::detail
