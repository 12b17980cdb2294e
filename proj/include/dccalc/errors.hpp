#pragma once

#include <stdexcept>
#include <string>

namespace dccalc {

struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define DCCALC_ERROR(Name)                                        \
  struct Name : Error {                                           \
    explicit Name(const std::string& what = #Name) : Error(what) {} \
  }

DCCALC_ERROR(DegenerateCell);
DCCALC_ERROR(NonConformingFacet);
DCCALC_ERROR(QuadratureOrderTooLow);
DCCALC_ERROR(BoundaryFacetSideMissing);
DCCALC_ERROR(UndefinedOnLowerSkeleton);
DCCALC_ERROR(IncompatibleComplexes);
DCCALC_ERROR(IllegalPairing);
DCCALC_ERROR(BothFactorsJump);
DCCALC_ERROR(NotHomeomorphic);
DCCALC_ERROR(InversionDiverged);
DCCALC_ERROR(EllipticityViolated);
DCCALC_ERROR(IncompatibleSystem);
DCCALC_ERROR(CoverageGap);
DCCALC_ERROR(SupportViolation);
DCCALC_ERROR(NotDC0);
DCCALC_ERROR(SamplePointOnSkeleton);
DCCALC_ERROR(ApexQuery);
DCCALC_ERROR(AnnulusTouchesApex);
DCCALC_ERROR(SchemaError);

#undef DCCALC_ERROR

}  // namespace dccalc
