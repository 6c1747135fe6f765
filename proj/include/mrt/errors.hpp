#ifndef MRT_ERRORS_HPP
#define MRT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace mrt {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NotIrreducible : Error { using Error::Error; };
struct NonConvergence : Error { using Error::Error; };
struct NotQuasiStochastic : Error { using Error::Error; };
struct GridMismatch : Error { using Error::Error; };
struct DivergentMoment : Error { using Error::Error; };
struct NonPositiveDrift : Error { using Error::Error; };
struct TruncationFailure : Error { using Error::Error; };
struct ArithmeticKernel : Error { using Error::Error; };
struct NotSpreadOut : Error { using Error::Error; };
struct WindowTooSmall : Error { using Error::Error; };
struct NoRoot : Error { using Error::Error; };
struct NotPrimitive : Error { using Error::Error; };
struct InsufficientVisits : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

}  // namespace mrt

#endif  // MRT_ERRORS_HPP
