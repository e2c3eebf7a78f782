#pragma once
#include <stdexcept>
#include <string>

namespace xbs {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

#define XBS_DEFINE_ERROR(NAME)                                                \
    struct NAME : Error {                                                     \
        explicit NAME(const std::string &msg) : Error(#NAME ": " + msg) {}    \
    }

XBS_DEFINE_ERROR(InvalidForest);
XBS_DEFINE_ERROR(CutoffTooLarge);
XBS_DEFINE_ERROR(ShapeError);
XBS_DEFINE_ERROR(NotIncident);
XBS_DEFINE_ERROR(BareRoot);
XBS_DEFINE_ERROR(AssumptionMismatch);
XBS_DEFINE_ERROR(PostprocessorShape);
XBS_DEFINE_ERROR(ArithmeticModeMismatch);
XBS_DEFINE_ERROR(DimensionMismatch);
XBS_DEFINE_ERROR(MissingPotential);
XBS_DEFINE_ERROR(NonConvergence);
XBS_DEFINE_ERROR(SingularCayley);
XBS_DEFINE_ERROR(NewtonDivergence);
XBS_DEFINE_ERROR(UnstableTrajectory);
XBS_DEFINE_ERROR(InsufficientSignal);
XBS_DEFINE_ERROR(ParseError);
XBS_DEFINE_ERROR(InternalError);

#undef XBS_DEFINE_ERROR

} // namespace xbs
