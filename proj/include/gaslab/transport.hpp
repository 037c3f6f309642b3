#ifndef GASLAB_TRANSPORT_HPP
#define GASLAB_TRANSPORT_HPP

#include <utility>

#include "gaslab/model.hpp"
#include "gaslab/rng.hpp"

namespace gaslab {

// How ball averages <g(.-z)>_{B_radius(y)} are computed. ClosedForm uses
// Newton's theorem and is valid for CoulombND only; Quadrature handles any
// kernel (radial Gauss-Legendre over exact or angularly integrated shell
// means, split at the singular radius).
struct BallAverageOracle {
    enum class Method { ClosedForm, Quadrature };
    Method method = Method::ClosedForm;
    int node_count = 128;
    double radius = 1.0;

    static BallAverageOracle closed_form(double radius);
    static BallAverageOracle quadrature(double radius, int node_count = 128);
};

enum class MimDirection { i_to_j, j_to_i };

struct MimResult {
    double mim_ij;  // expected energy after replacing y_i by y_j + U, U ~ unif(B_1)
    double mim_ji;
    MimDirection favorable;  // i_to_j iff mim_ij <= mim_ji (ties to i_to_j)
    double slack;            // H^mu + C_bound - min(mim_ij, mim_ji), certified >= 0 for d >= 3
};

// average of g over the uniform ball of o.radius centered at distance
// `dist` from the kernel singularity; equals g(dist) for CoulombND when
// dist >= radius
double ball_average_kernel(const BallAverageOracle& o, const KernelSpec& k, int d, double dist);

// spherical mean of g over the radius-rho sphere centered at distance t
// from the singularity; exact for Coulomb (Newton), angular quadrature for
// Riesz. Exposed for quadrature cross-checks.
double shell_average_kernel(const KernelSpec& k, int d, double rho, double t, int node_count);

// average of W over B_r(y); closed form for Zero and Quadratic
double ball_average_potential(const PotentialSpec& w, int d, double r, const Point& y);

// exact ball-mean increment of W: <W>_{B_r(y)} - W(y), independent of y
// for Quadratic (= a d r^2 / (d+2))
double w_gap(const PotentialSpec& w, int d, double r);

// the explicit constant in the two-sided mimicry energy bound:
// <g>_{B_1}(0) + w_gap(1), both from the oracle's method
double c_bound(const GasParams& p, const BallAverageOracle& o);

// exact expectation of H^mu over the replacement y_i <- y_j + U with U
// uniform on B_1(0). The averaging radius is pinned to 1 (the mimicry
// measure nu); o contributes only the averaging method.
double mim_energy(const GasParams& p, const Configuration& c, const FrozenExterior& mu,
                  int i, int j, const BallAverageOracle& o);

// both directed mim energies, the favorable direction, and the energy
// certificate slack
MimResult favorability(const GasParams& p, const Configuration& c, const FrozenExterior& mu,
                       int i, int j, const BallAverageOracle& o);

// random realization of the mimicry map: y_i <- y_j + U
Configuration mim_move(const GasParams& p, const Configuration& c, int i, int j, Rng& rng);

// two-fold average E[g(x + U - V)], U, V independent uniform on B_r with
// r = o.radius, at |x| = dist; equals g(dist) for Coulomb when dist >= 2r
double iso_pair_average(const BallAverageOracle& o, const KernelSpec& k, int d, double dist);

// lhs = expected H^mu after independent uniform-B_r displacement of every
// particle; rhs = H^mu(c) + n_particles * w_gap(r). Superharmonicity of g
// and mu >= 0 give lhs <= rhs.
std::pair<double, double> iso_energy_bound_check(const GasParams& p, const Configuration& c,
                                                 const FrozenExterior& mu, double r,
                                                 const BallAverageOracle& o);

}  // namespace gaslab

#endif
