#ifndef LOOPSOLITON_ERRORS_HPP
#define LOOPSOLITON_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace loopsoliton {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define LOOPSOLITON_DEFINE_ERROR(NAME)                                    \
    struct NAME : Error {                                                 \
        explicit NAME(const std::string& msg = #NAME) : Error(msg) {}     \
    }

LOOPSOLITON_DEFINE_ERROR(DegenerateCurve);
LOOPSOLITON_DEFINE_ERROR(BadLeadingCoefficient);
LOOPSOLITON_DEFINE_ERROR(QuadratureFailure);
LOOPSOLITON_DEFINE_ERROR(NonPositiveImTau);
LOOPSOLITON_DEFINE_ERROR(OnThetaDivisor);
LOOPSOLITON_DEFINE_ERROR(BranchPointCollision);
LOOPSOLITON_DEFINE_ERROR(SpecialDivisor);
LOOPSOLITON_DEFINE_ERROR(StepCollapse);
LOOPSOLITON_DEFINE_ERROR(PathThroughBranchPoint);
LOOPSOLITON_DEFINE_ERROR(SeriesDiverges);
LOOPSOLITON_DEFINE_ERROR(ZeroSpeed);
LOOPSOLITON_DEFINE_ERROR(NotUnitSpeed);
LOOPSOLITON_DEFINE_ERROR(NotClosed);
LOOPSOLITON_DEFINE_ERROR(NoConsistentPhase);
LOOPSOLITON_DEFINE_ERROR(NotPrime);
LOOPSOLITON_DEFINE_ERROR(DivergentSum);
LOOPSOLITON_DEFINE_ERROR(ParseError);

#undef LOOPSOLITON_DEFINE_ERROR

} // namespace loopsoliton

#endif
