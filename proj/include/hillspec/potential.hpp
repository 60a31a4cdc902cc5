#pragma once

// Pi-periodic complex potentials.  Every representation is reduced to a
// finite Fourier series V(x) = sum_n c_n exp(2inx), which is what the
// integrators evaluate.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "hillspec/errors.hpp"

namespace hill {

struct FourierTerm {
    int n = 0;
    cplx c{};
};

struct FourierSeries {
    std::vector<FourierTerm> terms;
};

struct GridSamples {
    std::vector<cplx> values;  // V(j*pi/N), j = 0..N-1
};

enum class BuiltinKind { zero, mathieu, gasymov, complex_mathieu };

struct Builtin {
    BuiltinKind kind = BuiltinKind::zero;
    double q = 0.0;
};

/// Range of Re V and Im V over a period, padded by an interpolation bound.
struct PotentialBounds {
    double re_min = 0.0, re_max = 0.0;
    double im_min = 0.0, im_max = 0.0;
};

class Potential {
public:
    using Repr = std::variant<FourierSeries, GridSamples, Builtin>;

    Potential() : Potential(Repr{Builtin{}}, {}) {}

    static Potential zero() { return builtin(BuiltinKind::zero, 0.0); }
    static Potential mathieu(double q) { return builtin(BuiltinKind::mathieu, q); }
    static Potential gasymov() { return builtin(BuiltinKind::gasymov, 0.0); }
    static Potential complex_mathieu(double q) { return builtin(BuiltinKind::complex_mathieu, q); }

    static Potential builtin(BuiltinKind kind, double q)
    {
        std::vector<FourierTerm> modes;
        switch (kind) {
        case BuiltinKind::zero:
            break;
        case BuiltinKind::mathieu:
            modes = {{-1, cplx(q, 0.0)}, {1, cplx(q, 0.0)}};
            break;
        case BuiltinKind::gasymov:
            modes = {{1, cplx(1.0, 0.0)}};
            break;
        case BuiltinKind::complex_mathieu:
            modes = {{-1, cplx(0.0, q)}, {1, cplx(0.0, q)}};
            break;
        }
        return Potential(Repr{Builtin{kind, q}}, std::move(modes));
    }

    static Potential from_fourier(std::vector<FourierTerm> coeffs)
    {
        std::set<int> seen;
        for (const auto& t : coeffs) {
            if (!seen.insert(t.n).second)
                throw InvalidInput("duplicate Fourier index " + std::to_string(t.n));
        }
        auto modes = coeffs;
        return Potential(Repr{FourierSeries{std::move(coeffs)}}, std::move(modes));
    }

    /// Trigonometric interpolant of uniform samples on [0, pi).  The Nyquist
    /// mode is split evenly between +N/2 and -N/2 so that the interpolant of
    /// real data is real.
    static Potential from_samples(std::vector<cplx> samples)
    {
        const auto count = samples.size();
        if (count < 4 || count % 2 != 0)
            throw InvalidInput("sample count must be even and at least 4, got " +
                               std::to_string(count));
        const int half = static_cast<int>(count / 2);
        const double n_inv = 1.0 / static_cast<double>(count);
        std::vector<FourierTerm> modes;
        for (int n = -half; n <= half; ++n) {
            cplx acc{};
            for (std::size_t j = 0; j < count; ++j) {
                // exp(-2 i n x_j) with x_j = j pi / N
                const double angle = -2.0 * std::numbers::pi * static_cast<double>(n) *
                                     static_cast<double>(j) * n_inv;
                acc += samples[j] * std::polar(1.0, angle);
            }
            acc *= n_inv;
            if (n == -half || n == half)
                acc *= 0.5;
            if (acc != cplx{})
                modes.push_back({n, acc});
        }
        return Potential(Repr{GridSamples{std::move(samples)}}, std::move(modes));
    }

    /// V(x); x is reduced mod pi first.
    cplx operator()(double x) const
    {
        const double r = x - std::numbers::pi * std::floor(x / std::numbers::pi);
        return eval_reduced(r);
    }

    cplx eval(double x) const { return (*this)(x); }

    /// Evaluation without range reduction, for integrators that stay in [0, pi].
    cplx eval_reduced(double x) const
    {
        if (max_pos_ == 0 && max_neg_ == 0)
            return c0_;
        const cplx w = std::polar(1.0, 2.0 * x);
        cplx pos{};
        for (int n = max_pos_; n >= 1; --n)
            pos = (pos + dense_[static_cast<std::size_t>(offset_ + n)]) * w;
        const cplx wc = std::conj(w);
        cplx neg{};
        for (int n = max_neg_; n >= 1; --n)
            neg = (neg + dense_[static_cast<std::size_t>(offset_ - n)]) * wc;
        return c0_ + pos + neg;
    }

    cplx mean() const { return c0_; }
    const Repr& repr() const { return repr_; }
    const std::vector<FourierTerm>& modes() const { return modes_; }

    /// Fourier coefficient c_n (zero when absent).
    cplx coefficient(int n) const
    {
        if (n > max_pos_ || -n > max_neg_)
            return {};
        return dense_[static_cast<std::size_t>(offset_ + n)];
    }

    int bandwidth() const { return std::max(max_pos_, max_neg_); }

    /// True when V is real-valued: c_{-n} = conj(c_n).
    bool is_real(double tol = 1e-14) const
    {
        const int b = bandwidth();
        for (int n = 0; n <= b; ++n) {
            if (std::abs(coefficient(-n) - std::conj(coefficient(n))) > tol)
                return false;
        }
        return true;
    }

    const PotentialBounds& bounds() const { return bounds_; }

    std::string describe() const
    {
        struct Visitor {
            std::string operator()(const FourierSeries& f) const
            {
                return "fourier(" + std::to_string(f.terms.size()) + " terms)";
            }
            std::string operator()(const GridSamples& g) const
            {
                return "samples(" + std::to_string(g.values.size()) + ")";
            }
            std::string operator()(const Builtin& b) const
            {
                switch (b.kind) {
                case BuiltinKind::zero: return "zero";
                case BuiltinKind::mathieu: return "mathieu(q=" + std::to_string(b.q) + ")";
                case BuiltinKind::gasymov: return "gasymov";
                case BuiltinKind::complex_mathieu:
                    return "complex_mathieu(q=" + std::to_string(b.q) + ")";
                }
                return "builtin";
            }
        };
        return std::visit(Visitor{}, repr_);
    }

private:
    Potential(Repr repr, std::vector<FourierTerm> modes)
        : repr_(std::move(repr)), modes_(std::move(modes))
    {
        for (const auto& t : modes_) {
            max_pos_ = std::max(max_pos_, t.n);
            max_neg_ = std::max(max_neg_, -t.n);
        }
        offset_ = max_neg_;
        dense_.assign(static_cast<std::size_t>(max_pos_ + max_neg_ + 1), cplx{});
        for (const auto& t : modes_)
            dense_[static_cast<std::size_t>(offset_ + t.n)] += t.c;
        c0_ = dense_[static_cast<std::size_t>(offset_)];
        compute_bounds();
    }

    void compute_bounds()
    {
        const int b = bandwidth();
        const std::size_t samples = static_cast<std::size_t>(64 + 16 * b);
        double re_lo = 1e300, re_hi = -1e300, im_lo = 1e300, im_hi = -1e300;
        for (std::size_t j = 0; j < samples; ++j) {
            const cplx v = eval_reduced(std::numbers::pi * static_cast<double>(j) /
                                        static_cast<double>(samples));
            re_lo = std::min(re_lo, v.real());
            re_hi = std::max(re_hi, v.real());
            im_lo = std::min(im_lo, v.imag());
            im_hi = std::max(im_hi, v.imag());
        }
        // |V'| <= sum 2|n||c_n|; half a sample spacing bounds the miss.
        double lip = 0.0;
        for (const auto& t : modes_)
            lip += 2.0 * std::abs(t.n) * std::abs(t.c);
        const double pad = lip * 0.5 * std::numbers::pi / static_cast<double>(samples);
        bounds_ = {re_lo - pad, re_hi + pad, im_lo - pad, im_hi + pad};
    }

    Repr repr_;
    std::vector<FourierTerm> modes_;
    std::vector<cplx> dense_;
    int max_pos_ = 0;
    int max_neg_ = 0;
    int offset_ = 0;
    cplx c0_{};
    PotentialBounds bounds_;
};

}  // namespace hill
