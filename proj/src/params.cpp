#include "qlrad/params.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace qlrad {

namespace {

double delta_of(double p, double m, double q, double alpha, double beta) {
  return (p - 1 - alpha) * (p - 1 - beta) - q * m;
}

}  // namespace

const char* regime_tag_name(RegimeTag tag) {
  switch (tag) {
    case RegimeTag::InvalidDelta: return "InvalidDelta";
    case RegimeTag::NoNonconstantSolutions: return "NoNonconstantSolutions";
    case RegimeTag::AllBoundedGlobal: return "AllBoundedGlobal";
    case RegimeTag::UFiniteVBlowup: return "UFiniteVBlowup";
    case RegimeTag::BothBlowup: return "BothBlowup";
  }
  return "Unknown";
}

SystemParams validate(int N, double p, double m, double q, double alpha,
                      double beta) {
  auto fail = [](const std::string& msg) {
    throw Error(ErrorCode::DomainViolation, msg);
  };
  if (!(N >= 2)) fail("N >= 2 violated");
  if (!(p > 1) || !std::isfinite(p)) fail("p > 1 violated");
  if (!(m > 0) || !std::isfinite(m)) fail("m > 0 violated");
  if (!(q > 0) || !std::isfinite(q)) fail("q > 0 violated");
  if (!(alpha >= 0) || !std::isfinite(alpha)) fail("alpha >= 0 violated");
  if (!(beta >= 0)) fail("0 <= beta violated");
  if (!(beta <= m)) fail("beta <= m violated");

  const double D = p - 1 - alpha;
  const double E = p - 1 - beta;
  const double delta = delta_of(p, m, q, alpha, beta);
  const double delta_scale = std::fabs(D * E) + q * m;
  if (delta == 0.0)
    throw Error(ErrorCode::DeltaZero, "delta = (p-1-alpha)(p-1-beta) - qm = 0");
  if (std::fabs(delta) < kClassifyBand * delta_scale)
    throw Error(ErrorCode::DeltaZero,
                "delta within the 1e-12 degeneracy band of 0");

  // The other classification boundary, mq = mp + (p-alpha)(p-1-beta).
  // Exact equality is a legitimate input (assigned to BothBlowup); anything
  // else inside the band is ambiguous and rejected.
  if (alpha < p - 1) {
    const double thr = m * p + (p - alpha) * E;
    const double d = q * m - thr;
    const double scale = std::fabs(thr) + q * m;
    if (d != 0.0 && std::fabs(d) < kClassifyBand * scale)
      throw Error(ErrorCode::NearDegenerate,
                  "mq within the 1e-12 band of mp + (p-alpha)(p-1-beta)");
    const double da = alpha - (p - 1);
    if (da != 0.0 && std::fabs(da) < kClassifyBand * (alpha + p - 1))
      throw Error(ErrorCode::NearDegenerate,
                  "alpha within the 1e-12 band of p-1");
  }

  return SystemParams{N, p, m, q, alpha, beta};
}

DerivedConstants derive(const SystemParams& params) {
  const double p = params.p, m = params.m, q = params.q;
  const double alpha = params.alpha, beta = params.beta;
  const double D = p - 1 - alpha;
  const double E = p - 1 - beta;

  DerivedConstants out;
  out.delta = delta_of(p, m, q, alpha, beta);
  out.gamma = (params.N - 1) * D / (p - 1);
  out.nu_u = 1 + (p * (m + 1) - (1 + beta)) / out.delta;
  out.nu_v = (p * D + q) / out.delta;
  out.degenerate_alpha = !(alpha < p - 1);

  if (out.degenerate_alpha) {
    out.sigma = std::numeric_limits<double>::quiet_NaN();
    out.sigma_minus_one = std::numeric_limits<double>::quiet_NaN();
    return out;
  }

  // sigma - 1 = -delta / (D (mp + E)); exact rearrangement of the product
  // form, so sigma == 1 can only happen when delta == 0.
  out.sigma_minus_one = -out.delta / (D * (m * p + E));
  out.sigma = 1 + out.sigma_minus_one;
  out.near_unit_sigma = std::fabs(out.sigma_minus_one) < kNearUnitSigma;
  if (out.sigma_minus_one > 0)
    out.blowup_rate_uprime = -1.0 / (out.sigma_minus_one * D);
  return out;
}

Regime classify(const SystemParams& params) {
  const double p = params.p, m = params.m, q = params.q;
  const double alpha = params.alpha, beta = params.beta;

  if (alpha >= p - 1)
    return Regime{RegimeTag::NoNonconstantSolutions, false};

  const double D = p - 1 - alpha;
  const double E = p - 1 - beta;
  const double mq = m * q;
  const double thr = m * p + (p - alpha) * E;

  RegimeTag tag;
  if (mq < D * E)
    tag = RegimeTag::AllBoundedGlobal;
  else if (mq > thr)
    tag = RegimeTag::UFiniteVBlowup;
  else
    tag = RegimeTag::BothBlowup;  // includes mq == thr

  // Self-check against the sigma form of the same dichotomy. Disagreement is
  // only possible within rounding of a boundary, which validate() excludes
  // up to exact boundary hits.
  const DerivedConstants d = derive(params);
  RegimeTag sigma_tag;
  if (d.sigma_minus_one < 0)
    sigma_tag = RegimeTag::AllBoundedGlobal;
  else if (d.sigma > (p - alpha) / D)
    sigma_tag = RegimeTag::UFiniteVBlowup;
  else
    sigma_tag = RegimeTag::BothBlowup;
  if (sigma_tag != tag) {
    const double rel = std::fabs(d.sigma - (p - alpha) / D) / d.sigma;
    if (rel > 1e-9)
      throw std::logic_error("classification self-check failed");
    // exact boundary: the mq form carries the "<=" convention
  }

  return Regime{tag, tag == RegimeTag::AllBoundedGlobal};
}

}  // namespace qlrad
