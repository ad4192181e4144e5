#ifndef EMBEDEV_ERRORS_HPP
#define EMBEDEV_ERRORS_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

namespace embedev {

// Base class for all library errors.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Invalid argument / precondition violation (maps to CLI exit code 2).
class DomainError : public Error {
  public:
    using Error::Error;
};

// |V(n)/sin(pi k)| >= 1/2: the angle-branch contract of the Pruefer step
// does not apply. Carries the offending site.
class StepTooLarge : public Error {
  public:
    StepTooLarge(std::int64_t site_, double ratio_)
        : Error("Pruefer step too large at site n=" + std::to_string(site_) +
                ": |V/sin(pi k)| = " + std::to_string(ratio_) + " >= 1/2"),
          site(site_), ratio(ratio_) {}
    std::int64_t site;
    double ratio;
};

// Phase setter cannot be applied: cot is too close to a pole. The caller
// should shift the anchor site by one and retry.
class PhaseSetterSingular : public Error {
  public:
    using Error::Error;
};

// The even-q construction left its phase window.
class PhaseLockLost : public Error {
  public:
    PhaseLockLost(std::int64_t period_, double theta_)
        : Error("even-q phase lock lost at period m=" + std::to_string(period_) +
                ", theta=" + std::to_string(theta_)),
          period(period_), theta(theta_) {}
    std::int64_t period;
    double theta;
};

// The per-period cancellation solve produced an inadmissible numerator.
class DegeneratePeriod : public Error {
  public:
    using Error::Error;
};

// Segment construction cannot start (resonance clash, E = 0, ...).
class ConstructionImpossible : public Error {
  public:
    using Error::Error;
};

// No phase achieved the required contraction on the given segment.
class SegmentTooShort : public Error {
  public:
    using Error::Error;
};

// The gluing schedule failed to converge within its caps.
class ConstructionFailed : public Error {
  public:
    using Error::Error;
};

// Non-finite value during integration (maps to CLI exit code 4).
class NumericFailure : public Error {
  public:
    NumericFailure(std::int64_t site_, const std::string& what_)
        : Error("numeric failure at site n=" + std::to_string(site_) + ": " + what_),
          site(site_) {}
    std::int64_t site;
};

}  // namespace embedev

#endif  // EMBEDEV_ERRORS_HPP
