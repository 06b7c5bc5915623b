#ifndef QLRAD_PICARD_HPP
#define QLRAD_PICARD_HPP

#include <iosfwd>
#include <vector>

#include "qlrad/params.hpp"
#include "qlrad/radial_ode.hpp"

namespace qlrad {

// Discrete representative of a C^1 pair on [0, rho]: uniform nodes with
// values of u, v and u'.
struct GridFunctionPair {
  double rho = 0.1;
  std::vector<double> r;       // n+1 uniform nodes, r[0] = 0
  std::vector<double> u;
  std::vector<double> v;
  std::vector<double> uprime;  // uprime[0] = 0
};

GridFunctionPair constant_pair(double a, double b, double rho,
                               std::size_t cells);

// The integral operator whose fixed points solve the radial system with
// center values (a, b):
//   T1[u,v](r) = a + int_0^r ( (p-1-alpha)/(p-1) t^{-gamma}
//                              int_0^t s^gamma v^m ds )^{1/(p-1-alpha)} dt
//   T2[u,v](r) = b + int_0^r ( t^{1-N} int_0^t s^{N-1} v^beta |u'|^q ds
//                            )^{1/(p-1)} dt
// Quadrature is cell-exact for the power-law leading behavior at t = 0
// (the integrands vanish like fractional powers there).
// Throws Error(QuadratureBreakdown) on non-finite integrands.
GridFunctionPair apply_T(const GridFunctionPair& pair,
                         const SystemParams& params, double a, double b);

struct PicardResult {
  GridFunctionPair pair;
  int iterations = 0;
  double final_change = 0;
  int halvings = 0;  // times rho was halved before convergence
};

// Iterates T from the constant pair until the discrete sup-norm change of
// (u, v, u') drops below tol. On non-convergence (or breakdown) rho is
// halved, up to 6 times; then Error(NoConvergence).
PicardResult solve_fixed_point(const SystemParams& params, double a, double b,
                               double rho = 0.1, double tol = 1e-10,
                               int max_iterations = 200,
                               std::size_t cells = 1024);

// Sup distance of (u, v) between the grid pair and an integrated trajectory,
// over the nodes covered by both (r >= trajectory seed radius).
double sup_distance_to_trajectory(const GridFunctionPair& pair,
                                  const RadialTrajectory& traj);

// Header: r,u,uprime,v. 17 significant digits per value.
void write_picard_csv(const GridFunctionPair& pair, std::ostream& os);

}  // namespace qlrad

#endif  // QLRAD_PICARD_HPP
