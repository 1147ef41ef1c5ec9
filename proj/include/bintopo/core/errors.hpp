#pragma once

#include <stdexcept>
#include <string>

namespace bintopo {

// Every failure the library reports is one of these. They all derive from
// std::runtime_error so callers that don't care can catch that.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define BINTOPO_DEFINE_ERROR(Name)   \
  class Name : public Error {        \
   public:                           \
    using Error::Error;              \
  }

BINTOPO_DEFINE_ERROR(ShapeMismatch);
BINTOPO_DEFINE_ERROR(LengthMismatch);
BINTOPO_DEFINE_ERROR(IndexOutOfRange);
BINTOPO_DEFINE_ERROR(EmptyBuffer);
BINTOPO_DEFINE_ERROR(IncompatibleAlgorithm);
BINTOPO_DEFINE_ERROR(NotSteadyState);
BINTOPO_DEFINE_ERROR(SimulationDiverged);
BINTOPO_DEFINE_ERROR(InsufficientHistory);
BINTOPO_DEFINE_ERROR(ConfigError);
BINTOPO_DEFINE_ERROR(IoError);
BINTOPO_DEFINE_ERROR(FormatError);

#undef BINTOPO_DEFINE_ERROR

}  // namespace bintopo
