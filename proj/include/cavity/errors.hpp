#ifndef CAVITY_ERRORS_HPP
#define CAVITY_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace cavity {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidEnsembleError : Error { using Error::Error; };
struct ZeroPumpError : Error { using Error::Error; };
struct SingularMatrixError : Error { using Error::Error; };
struct StiffnessError : Error { using Error::Error; };
struct DivergentSeriesError : Error { using Error::Error; };
struct DegenerateRatesError : Error { using Error::Error; };
struct InvalidOverlapError : Error { using Error::Error; };
struct NoRootError : Error { using Error::Error; };
struct GeometryError : Error { using Error::Error; };
struct AllConfinedError : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

} // namespace cavity

#endif
