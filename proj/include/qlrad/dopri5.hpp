#ifndef QLRAD_DOPRI5_HPP
#define QLRAD_DOPRI5_HPP

#include <array>
#include <cmath>
#include <cstddef>

namespace qlrad {

template <std::size_t Dim>
using StateVec = std::array<double, Dim>;

// One trial step of the Dormand-Prince 5(4) embedded pair.
// rhs(x, y) -> StateVec<Dim>. Returns the weighted RMS error estimate
// (accept when <= 1); `out` holds the 5th-order solution at x + h.
// A non-finite return value means the step left the domain of rhs.
template <std::size_t Dim, class Rhs>
double dopri5_try_step(Rhs&& rhs, double x, const StateVec<Dim>& y, double h,
                       double rtol, double atol, StateVec<Dim>& out) {
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                   a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                   a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                   a65 = -5103.0 / 18656;
  constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                   b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  // b(5th) - b(4th), used for the embedded error estimate
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                   e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  StateVec<Dim> t;
  const StateVec<Dim> k1 = rhs(x, y);
  for (std::size_t i = 0; i < Dim; ++i) t[i] = y[i] + h * a21 * k1[i];
  const StateVec<Dim> k2 = rhs(x + h / 5, t);
  for (std::size_t i = 0; i < Dim; ++i)
    t[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
  const StateVec<Dim> k3 = rhs(x + 3 * h / 10, t);
  for (std::size_t i = 0; i < Dim; ++i)
    t[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
  const StateVec<Dim> k4 = rhs(x + 4 * h / 5, t);
  for (std::size_t i = 0; i < Dim; ++i)
    t[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
  const StateVec<Dim> k5 = rhs(x + 8 * h / 9, t);
  for (std::size_t i = 0; i < Dim; ++i)
    t[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] +
                       a65 * k5[i]);
  const StateVec<Dim> k6 = rhs(x + h, t);
  for (std::size_t i = 0; i < Dim; ++i)
    out[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] +
                         b6 * k6[i]);
  const StateVec<Dim> k7 = rhs(x + h, out);

  double err = 0;
  for (std::size_t i = 0; i < Dim; ++i) {
    const double ei = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                           e6 * k6[i] + e7 * k7[i]);
    const double sc =
        atol + rtol * std::fmax(std::fabs(y[i]), std::fabs(out[i]));
    err += (ei / sc) * (ei / sc);
  }
  return std::sqrt(err / Dim);
}

// Standard step-size update for the 5(4) pair.
inline double dopri5_next_h(double h, double err) {
  const double fac =
      (err <= 0) ? 5.0
                 : std::fmin(5.0, std::fmax(0.2, 0.9 * std::pow(err, -0.2)));
  return h * fac;
}

}  // namespace qlrad

#endif  // QLRAD_DOPRI5_HPP
