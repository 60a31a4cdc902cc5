#pragma once

#include <complex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace hill {

using cplx = std::complex<double>;

inline std::string to_string(cplx z)
{
    std::ostringstream os;
    os.precision(12);
    os << "(" << z.real() << (z.imag() < 0 ? "-" : "+") << std::abs(z.imag()) << "i)";
    return os.str();
}

/// Base class for every numerical failure raised by the library.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Adaptive integration could not reach the requested tolerance.
class IntegrationError : public NumericalError {
public:
    IntegrationError(cplx z, double achieved, const std::string& why)
        : NumericalError("integration failed at z=" + to_string(z) + ": " + why),
          z_(z), achieved_(achieved)
    {
    }

    cplx z() const noexcept { return z_; }
    double achieved_error() const noexcept { return achieved_; }

private:
    cplx z_;
    double achieved_;
};

/// Argument-principle count did not settle on an integer.
class WindingError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Newton refinement diverged or left its basin.
class RootError : public NumericalError {
public:
    RootError(cplx seed, const std::string& why)
        : NumericalError("root refinement from seed " + to_string(seed) + " failed: " + why),
          seed_(seed)
    {
    }

    cplx seed() const noexcept { return seed_; }

private:
    cplx seed_;
};

/// Fewer roots were found in a search window than the winding count demands.
class CountShortfall : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Predictor-corrector continuation lost the arc.
class ContinuationError : public NumericalError {
public:
    ContinuationError(double t, cplx lambda, const std::string& why)
        : NumericalError("arc continuation failed after t=" + std::to_string(t) + ", lambda=" +
                         to_string(lambda) + ": " + why),
          t_(t), lambda_(lambda)
    {
    }

    double last_t() const noexcept { return t_; }
    cplx last_lambda() const noexcept { return lambda_; }

private:
    double t_;
    cplx lambda_;
};

/// Inputs that violate an operation's preconditions.
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace hill
