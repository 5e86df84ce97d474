#pragma once

#include <stdexcept>
#include <string>

namespace spde {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

#define SPDE_ERROR(Name)                 \
  struct Name : Error {                  \
    using Error::Error;                  \
  };

SPDE_ERROR(InvalidGrid)
SPDE_ERROR(UnresolvableScale)
SPDE_ERROR(GridMismatch)
SPDE_ERROR(EllipticityViolation)
SPDE_ERROR(NonpositiveTime)
SPDE_ERROR(OriginSingularity)
SPDE_ERROR(DimensionMismatch)
SPDE_ERROR(InstabilityDetected)
SPDE_ERROR(UnknownVertex)
SPDE_ERROR(TooLarge)
SPDE_ERROR(ParseError)
SPDE_ERROR(ConfigError)
SPDE_ERROR(MalformedDiagram)

#undef SPDE_ERROR

}  // namespace spde
