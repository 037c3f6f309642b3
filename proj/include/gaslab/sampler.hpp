#ifndef GASLAB_SAMPLER_HPP
#define GASLAB_SAMPLER_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "gaslab/model.hpp"
#include "gaslab/rng.hpp"
#include "gaslab/stats.hpp"
#include "gaslab/transport.hpp"

namespace gaslab {

// Scalar observable recorded per thinned sample. Event-like kinds yield
// 0/1 indicators; every kind is additionally gated on optional per-particle
// region memberships and event conjuncts (all must hold, else the sample
// records 0). Names are canonical and serve as stream keys.
struct Observer {
    enum class Kind { Event, AllOf, R2, Energy, NbrAtLeast, FavGated };
    Kind kind = Kind::Event;
    std::vector<EventSpec> events;                       // conjuncts
    std::vector<std::pair<int, Region>> particle_gates;  // particle index in region
    int particle = 0;                                    // R2
    int tag = 0;                                         // NbrAtLeast center particle
    double radius = 1.0;                                 // NbrAtLeast ball radius
    int threshold = 0;  // NbrAtLeast: count in B_radius(y_tag), tag included, >= threshold
    int fav_i = 0, fav_j = 0;
    MimDirection fav_dir = MimDirection::i_to_j;

    static Observer event(EventSpec e);
    static Observer all_of(std::vector<EventSpec> es);
    static Observer r2(int particle);
    static Observer energy();
    static Observer nbr_at_least(int tag, double radius, int threshold, Region tag_region,
                                 std::vector<EventSpec> gates);
    static Observer fav_gated(int i, int j, MimDirection dir,
                              std::vector<std::pair<int, Region>> particle_gates,
                              std::vector<EventSpec> gates);

    std::string name() const;
    double eval(const GasParams& p, const FrozenExterior& mu, const Configuration& c,
                double energy, const BallAverageOracle& o) const;
};

struct ChainConfig {
    enum class TargetKind { FreeGas, ConditionalGas };
    TargetKind target = TargetKind::FreeGas;
    GasParams params;
    FrozenExterior mu;          // ConditionalGas only
    double R = kInf;            // allowed domain B_R U B_S^c; R = inf => free
    double S = kInf;            // S = inf => no exterior component (ball gas)
    double step_scale = 0.0;    // 0 => auto from interparticle spacing
    std::int64_t n_burnin = 0;  // proposals
    std::int64_t n_steps = 0;   // proposals after burn-in
    std::int64_t thinning = 1;
    std::uint64_t seed = 0;
    double mim_move_prob = 0.1;
    bool autotune = true;

    void validate() const;
    bool in_domain(const Point& x) const;
    // initial-placement bounding radius: max(3S, (M/delta)^{1/d}) with
    // sentinel adaptations for infinite S / R
    double init_bound_radius() const;
    double domain_volume_estimate() const;  // for the default step scale
};

struct ChainState {
    Configuration config;
    double energy = 0.0;  // cached H^mu
    std::int64_t step_count = 0;
    std::int64_t gauss_proposed = 0, gauss_accepted = 0;
    std::int64_t mim_proposed = 0, mim_accepted = 0;
    double step_scale = 0.0;          // live proposal scale
    double max_resync_drift = 0.0;    // relative cache drift seen at resyncs
};

struct ChainStats {
    int chain_id = 0;
    std::int64_t n_samples = 0;
    std::int64_t batch_size = 1;
    std::map<std::string, StreamStats> streams;
    std::int64_t gauss_proposed = 0, gauss_accepted = 0;
    std::int64_t mim_proposed = 0, mim_accepted = 0;
    std::int64_t constraint_violations = 0;
    double max_resync_drift = 0.0;
    double final_energy = 0.0;
    double final_step_scale = 0.0;
    bool error = false;
    std::string error_message;

    const StreamStats& stream(const std::string& name) const;  // throws if absent
    bool has_stream(const std::string& name) const;
    void merge(const ChainStats& other);  // pool streams, sum tallies
};

BallAverageOracle default_oracle(const GasParams& p);

// deterministic placement by rejection sampling in the allowed domain
ChainState init_chain(const ChainConfig& cc);
ChainState init_chain(const ChainConfig& cc, Rng& rng);

// one Metropolis proposal (Gaussian displacement or mimicry teleport),
// applied in place; exactness of the target law requires fixed step_scale
void step(ChainState& cs, const ChainConfig& cc, Rng& rng);

// burn-in (with optional step-scale autotuning), then n_steps proposals
// recording every observer at each thinned sample
ChainStats run_chain(const ChainConfig& cc, const std::vector<Observer>& observers,
                     std::ostream* snapshot_sink = nullptr, std::int64_t snapshot_every = 0);

}  // namespace gaslab

#endif
