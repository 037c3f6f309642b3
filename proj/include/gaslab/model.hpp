#ifndef GASLAB_MODEL_HPP
#define GASLAB_MODEL_HPP

#include <string>
#include <vector>

#include "gaslab/geometry.hpp"
#include "gaslab/util.hpp"

namespace gaslab {

// Pair interaction kernel g. Coulomb is -log|x| in d=2 and |x|^{2-d} in
// d>=3; Riesz is |x|^{-s}. The d>=3 Coulomb kernel is nonnegative and
// superharmonic, which the transport module relies on.
struct KernelSpec {
    enum class Variant { Coulomb2D, CoulombND, Riesz };
    Variant variant = Variant::CoulombND;
    // r^{-exponent} for CoulombND (d - 2) and Riesz (s); unused for Coulomb2D
    double exponent = 1.0;

    static KernelSpec coulomb(int d);
    static KernelSpec riesz(double s);
    std::string to_text() const;
    // "coulomb" or "riesz(s)"; d resolves which coulomb variant applies
    static KernelSpec parse(const std::string& text, int d);
};

// Confining potential W. Quadratic(a) is W(x) = a |x|^2 with Laplacian 2 a d.
struct PotentialSpec {
    enum class Variant { Zero, Quadratic };
    Variant variant = Variant::Zero;
    double a = 0.0;

    static PotentialSpec zero();
    static PotentialSpec quadratic(double a);
    double value(const Point& x) const;
    double laplacian(int d) const;
    std::string to_text() const;
    static PotentialSpec parse(const std::string& text);
};

struct GasParams {
    int d = 3;
    int n_particles = 1;
    double beta = 1.0;
    KernelSpec kernel;
    PotentialSpec potential;
    double delta = 0.5;  // admissibility margin for beta and the potential Laplacian

    // default confining potential: W(x) = |x|^2 / (2d), Laplacian 1
    static GasParams make(int d, int n_particles, double beta);
    void validate() const;  // throws ParseError naming the violated constraint
};

// Labeled gas state: an ordered tuple of positions. Construction rejects
// coincident points, non-finite coordinates, and mixed dimensions; set()
// is the unchecked hot path (energies treat a transient coincidence as
// +infinity).
class Configuration {
public:
    Configuration() = default;
    explicit Configuration(std::vector<Point> positions);

    int size() const { return static_cast<int>(positions_.size()); }
    int dim() const { return positions_.empty() ? 0 : static_cast<int>(positions_[0].size()); }
    const Point& at(int i) const { return positions_[static_cast<size_t>(i)]; }
    const std::vector<Point>& positions() const { return positions_; }

    // in-place single-particle update; owned by exactly one chain at a time
    void set(int i, Point p) { positions_[static_cast<size_t>(i)] = std::move(p); }

private:
    std::vector<Point> positions_;
};

// Frozen exterior measure: weighted atoms inside a support region. Enters
// the conditional energy through sum_atoms w * sum_i g(atom - y_i).
struct FrozenExterior {
    struct Atom {
        Point x;
        double weight;
    };
    std::vector<Atom> atoms;
    Region support = Region::all();

    static FrozenExterior empty() { return {}; }
    void add(Point x, double weight);
    double total_mass() const;
    void validate() const;  // atoms inside support, weights >= 0
};

// g evaluated at displacement x; throws on |x| = 0 (callers treat a
// coincidence as +infinity instead of calling this)
double kernel_eval(const KernelSpec& k, const Point& x);

// kernel value from squared distance, +inf at 0; the hot path
double kernel_from_r2(const KernelSpec& k, double r2);

// H(c) = 1/2 sum_{i != j} g(y_i - y_j) + sum_i W(y_i); +inf on coincidence
double hamiltonian(const GasParams& p, const Configuration& c);

// H^mu(c) = H(c) + sum_atoms w sum_i g(atom - y_i); +inf if a particle
// sits exactly on an atom
double conditional_hamiltonian(const GasParams& p, const Configuration& c, const FrozenExterior& mu);

// H^mu(c with particle i moved to new_pos) - H^mu(c), touching only the
// terms involving particle i. O(M + #atoms).
double energy_delta_move(const GasParams& p, const Configuration& c, const FrozenExterior& mu,
                         int i, const Point& new_pos);

// interaction of a single position with everything else: sum_{k != skip}
// g(x - y_k) + W(x) + sum_atoms w g(atom - x). Used by movers and the
// transport module.
double interaction_at(const GasParams& p, const Configuration& c, const FrozenExterior& mu,
                      const Point& x, int skip_a, int skip_b = -1);

inline int count_in(const Configuration& c, const Region& r) { return count_in(c.positions(), r); }
inline bool event_holds(const EventSpec& e, const Configuration& c) { return event_holds(e, c.positions()); }

}  // namespace gaslab

#endif
