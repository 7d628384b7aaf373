#pragma once

#include <stdexcept>
#include <string>

namespace mwalk {

// Base class for all domain errors raised by this library. Each concrete
// error corresponds to one rejectable condition; callers that want to react
// to a specific condition catch the concrete type, the CLI catches the base.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct ProbabilitySumError : Error { using Error::Error; };
struct EmptyKernelEntry   : Error { using Error::Error; };
struct BadPeriod          : Error { using Error::Error; };
struct BadDimension       : Error { using Error::Error; };
struct DimensionMismatch  : Error { using Error::Error; };
struct UnknownBuiltin     : Error { using Error::Error; };
struct BadWeights         : Error { using Error::Error; };
struct KernelMismatch     : Error { using Error::Error; };
struct NotIrreducible     : Error { using Error::Error; };
struct BudgetTooSmall     : Error { using Error::Error; };
struct OverflowGuard      : Error { using Error::Error; };
struct GridOutOfRange     : Error { using Error::Error; };
struct NoVisits           : Error { using Error::Error; };
struct TooFewSamples      : Error { using Error::Error; };
struct PipelineMissing    : Error { using Error::Error; };
struct InversionNotConverged : Error { using Error::Error; };
struct ParseError         : Error { using Error::Error; };

} // namespace mwalk
