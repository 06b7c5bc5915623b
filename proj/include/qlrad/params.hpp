#ifndef QLRAD_PARAMS_HPP
#define QLRAD_PARAMS_HPP

#include <optional>

#include "qlrad/errors.hpp"

namespace qlrad {

// Exponent tuple of the radial system
//
//   div(|Du|^{p-2} Du) = v^m |Du|^alpha,
//   div(|Dv|^{p-2} Dv) = v^beta |Du|^q,
//
// under the standing hypotheses N >= 2, p > 1, m > 0, q > 0, alpha >= 0,
// 0 <= beta <= m and delta = (p-1-alpha)(p-1-beta) - q*m != 0.
// Instances are produced by validate(); the rest of the library assumes
// the hypotheses hold.
struct SystemParams {
  int N = 3;
  double p = 2;
  double m = 1;
  double q = 1;
  double alpha = 0;
  double beta = 0;
};

// Closed-form quantities attached to a parameter tuple.
//
//   delta = (p-1-alpha)(p-1-beta) - q m
//   gamma = (N-1)(p-1-alpha)/(p-1)
//   sigma = m/(p-1-alpha) * (q + p(p-1-alpha)) / (mp + p-1-beta)
//   nu_u  = 1 + (p(m+1) - (1+beta))/delta     (u growth exponent)
//   nu_v  = (p(p-1-alpha) + q)/delta          (v growth exponent)
//
// sigma is stored via sigma_minus_one = -delta / ((p-1-alpha)(mp+p-1-beta)),
// which is algebraically identical to the product form and does not lose the
// sign of sigma-1 to cancellation when delta is small.
struct DerivedConstants {
  double delta = 0;
  double gamma = 0;
  double sigma = 0;            // NaN when alpha >= p-1
  double sigma_minus_one = 0;  // NaN when alpha >= p-1
  double nu_u = 0;
  double nu_v = 0;
  std::optional<double> blowup_rate_uprime;  // -1/((sigma-1)(p-1-alpha)), sigma > 1 only
  bool degenerate_alpha = false;             // alpha >= p-1
  bool near_unit_sigma = false;              // |sigma - 1| < 1e-9
};

enum class RegimeTag {
  InvalidDelta,
  NoNonconstantSolutions,
  AllBoundedGlobal,
  UFiniteVBlowup,
  BothBlowup,
};

struct Regime {
  RegimeTag tag = RegimeTag::InvalidDelta;
  bool global_exists = false;
};

const char* regime_tag_name(RegimeTag tag);

// Relative tolerance band around the strict classification inequalities.
// Inputs inside a band (but not exactly on the boundary) are rejected.
inline constexpr double kClassifyBand = 1e-12;

// |sigma - 1| below this is flagged in DerivedConstants.
inline constexpr double kNearUnitSigma = 1e-9;

// Checks the standing hypotheses and the delta != 0 requirement.
// Throws Error(DomainViolation) naming the violated inequality,
// Error(DeltaZero) when delta vanishes (or sits inside the tolerance band),
// Error(NearDegenerate) when the tuple is ambiguously close to the
// u-finite/both-blow-up boundary without lying exactly on it.
SystemParams validate(int N, double p, double m, double q, double alpha,
                      double beta);

DerivedConstants derive(const SystemParams& params);

// Boundary classification per the strict inequalities:
//   NoNonconstantSolutions   alpha >= p-1
//   AllBoundedGlobal         mq <  (p-1-alpha)(p-1-beta)        (sigma < 1)
//   UFiniteVBlowup           mq >  mp + (p-alpha)(p-1-beta)     (sigma > (p-alpha)/(p-1-alpha))
//   BothBlowup               otherwise (the "<= " boundary included)
// The mq-form decides; the sigma-form is evaluated as a consistency check.
Regime classify(const SystemParams& params);

}  // namespace qlrad

#endif  // QLRAD_PARAMS_HPP
