#include "gaslab/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace gaslab {

Observer Observer::event(EventSpec e) {
    Observer o;
    o.kind = Kind::Event;
    o.events.push_back(std::move(e));
    return o;
}

Observer Observer::all_of(std::vector<EventSpec> es) {
    if (es.empty()) throw std::invalid_argument("all_of needs at least one event");
    Observer o;
    o.kind = Kind::AllOf;
    o.events = std::move(es);
    return o;
}

Observer Observer::r2(int particle) {
    Observer o;
    o.kind = Kind::R2;
    o.particle = particle;
    return o;
}

Observer Observer::energy() {
    Observer o;
    o.kind = Kind::Energy;
    return o;
}

Observer Observer::nbr_at_least(int tag, double radius, int threshold, Region tag_region,
                                std::vector<EventSpec> gates) {
    if (!(radius > 0.0)) throw std::invalid_argument("nbr_at_least radius must be positive");
    Observer o;
    o.kind = Kind::NbrAtLeast;
    o.tag = tag;
    o.radius = radius;
    o.threshold = threshold;
    o.particle_gates.emplace_back(tag, std::move(tag_region));
    o.events = std::move(gates);
    return o;
}

Observer Observer::fav_gated(int i, int j, MimDirection dir,
                             std::vector<std::pair<int, Region>> particle_gates,
                             std::vector<EventSpec> gates) {
    if (i == j) throw std::invalid_argument("fav_gated needs distinct indices");
    Observer o;
    o.kind = Kind::FavGated;
    o.fav_i = i;
    o.fav_j = j;
    o.fav_dir = dir;
    o.particle_gates = std::move(particle_gates);
    o.events = std::move(gates);
    return o;
}

std::string Observer::name() const {
    std::ostringstream s;
    switch (kind) {
        case Kind::Event:
            s << "event:" << events[0].to_text();
            return s.str();
        case Kind::AllOf:
            s << "allof:";
            break;
        case Kind::R2:
            return "r2:" + std::to_string(particle);
        case Kind::Energy:
            return "energy";
        case Kind::NbrAtLeast:
            s << "nbr_ge:tag=" << tag << ";r=" << fmt17(radius) << ";q=" << threshold << ";";
            break;
        case Kind::FavGated:
            s << "fav:" << fav_i << (fav_dir == MimDirection::i_to_j ? "->" : "<-") << fav_j << ";";
            break;
    }
    bool first = true;
    for (const auto& [idx, reg] : particle_gates) {
        if (kind == Kind::NbrAtLeast && idx == tag) {
            s << (first ? "" : "&") << "in@" << reg.to_text();
        } else {
            s << (first ? "" : "&") << idx << "@" << reg.to_text();
        }
        first = false;
    }
    for (const EventSpec& e : events) {
        s << (first ? "" : "&") << e.to_text();
        first = false;
    }
    return s.str();
}

double Observer::eval(const GasParams& p, const FrozenExterior& mu, const Configuration& c,
                      double energy, const BallAverageOracle& o) const {
    for (const auto& [idx, reg] : particle_gates)
        if (!reg.contains(c.at(idx))) return 0.0;
    for (const EventSpec& e : events)
        if (!event_holds(e, c)) return 0.0;
    switch (kind) {
        case Kind::Event:
        case Kind::AllOf:
            return 1.0;
        case Kind::R2:
            return norm2(c.at(particle));
        case Kind::Energy:
            return energy;
        case Kind::NbrAtLeast: {
            if (threshold <= 0) return 1.0;
            const double r2 = radius * radius;
            int n = 0;
            for (int k = 0; k < c.size(); ++k)
                if (dist2(c.at(k), c.at(tag)) < r2) ++n;
            return n >= threshold ? 1.0 : 0.0;
        }
        case Kind::FavGated: {
            const MimResult mr = favorability(p, c, mu, fav_i, fav_j, o);
            return mr.favorable == fav_dir ? 1.0 : 0.0;
        }
    }
    return 0.0;
}

void ChainConfig::validate() const {
    params.validate();
    if (n_steps < 0 || n_burnin < 0) throw ParseError("chain: negative step counts");
    if (thinning < 1) throw ParseError("chain: thinning must be >= 1");
    if (!(mim_move_prob >= 0.0 && mim_move_prob < 1.0))
        throw ParseError("chain: mim_move_prob must lie in [0, 1)");
    if (step_scale < 0.0) throw ParseError("chain: step_scale must be >= 0");
    if (target == TargetKind::FreeGas) {
        if (!mu.atoms.empty()) throw ParseError("chain: free gas cannot carry a frozen exterior");
        return;
    }
    if (!(R > 0.0) || !(R < S)) throw ParseError("chain: conditional gas needs 0 < R < S");
    // mu lives in B_S \ B_R (closed inner boundary, open outer)
    for (const FrozenExterior::Atom& a : mu.atoms) {
        const double n2 = norm2(a.x);
        if (n2 < R * R || (std::isfinite(S) && n2 >= S * S))
            throw ParseError("chain: frozen atom outside the annulus between R and S");
    }
}

bool ChainConfig::in_domain(const Point& x) const {
    if (target == TargetKind::FreeGas) return true;
    const double n2 = norm2(x);
    if (n2 < R * R) return true;
    return std::isfinite(S) ? n2 >= S * S : false;
}

double ChainConfig::init_bound_radius() const {
    const double spacing = std::pow(params.n_particles / params.delta, 1.0 / params.d);
    if (target == TargetKind::FreeGas) return spacing;
    if (!std::isfinite(S)) return R;  // ball gas: the domain itself is the bound
    return std::max(3.0 * S, spacing);
}

double ChainConfig::domain_volume_estimate() const {
    const double bound = init_bound_radius();
    if (target == TargetKind::FreeGas) return ball_volume(params.d, bound);
    double v = ball_volume(params.d, std::min(R, bound));
    if (std::isfinite(S) && bound > S) v += ball_volume(params.d, bound) - ball_volume(params.d, S);
    return v;
}

BallAverageOracle default_oracle(const GasParams& p) {
    if (p.kernel.variant == KernelSpec::Variant::CoulombND) return BallAverageOracle::closed_form(1.0);
    return BallAverageOracle::quadrature(1.0);
}

ChainState init_chain(const ChainConfig& cc) {
    Rng rng(cc.seed);
    return init_chain(cc, rng);
}

ChainState init_chain(const ChainConfig& cc, Rng& rng) {
    cc.validate();
    const int m = cc.params.n_particles;
    const int d = cc.params.d;
    const double bound = cc.init_bound_radius();
    std::vector<Point> pts;
    pts.reserve(static_cast<size_t>(m));
    for (int i = 0; i < m; ++i) {
        bool placed = false;
        for (int attempt = 0; attempt < 1000000; ++attempt) {
            Point x = rng.uniform_in_ball(d, bound);
            if (!cc.in_domain(x)) continue;
            bool clash = false;
            for (const Point& q : pts)
                if (dist2(q, x) <= 0.0) clash = true;
            if (clash) continue;
            pts.push_back(std::move(x));
            placed = true;
            break;
        }
        if (!placed) throw std::runtime_error("init_chain: allowed domain has no volume inside the bound");
    }
    ChainState cs;
    cs.config = Configuration(std::move(pts));
    cs.energy = conditional_hamiltonian(cc.params, cs.config, cc.mu);
    cs.step_scale = cc.step_scale > 0.0
                        ? cc.step_scale
                        : 0.5 * std::pow(cc.domain_volume_estimate() / m, 1.0 / d);
    return cs;
}

namespace {

// number of particles strictly within distance 1 of x, excluding index skip;
// the mimicry proposal density at x is this count over (M-1) vol(B_1)
int unit_ball_neighbors(const Configuration& c, const Point& x, int skip) {
    int n = 0;
    for (int k = 0; k < c.size(); ++k) {
        if (k == skip) continue;
        if (dist2(c.at(k), x) < 1.0) ++n;
    }
    return n;
}

}  // namespace

void step(ChainState& cs, const ChainConfig& cc, Rng& rng) {
    const int m = cs.config.size();
    const int d = cc.params.d;
    ++cs.step_count;
    const bool mim = rng.uniform01() < cc.mim_move_prob && m >= 2;
    if (!mim) {
        ++cs.gauss_proposed;
        const int i = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(m)));
        Point prop = cs.config.at(i);
        for (int k = 0; k < d; ++k) prop[static_cast<size_t>(k)] += cs.step_scale * rng.normal();
        if (!cc.in_domain(prop)) return;
        const double dh = energy_delta_move(cc.params, cs.config, cc.mu, i, prop);
        if (dh == kInf) return;
        if (dh > 0.0 && rng.uniform01() >= std::exp(-cc.params.beta * dh)) return;
        cs.config.set(i, std::move(prop));
        cs.energy += dh;
        ++cs.gauss_accepted;
        return;
    }

    ++cs.mim_proposed;
    const int i = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(m)));
    int j = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(m - 1)));
    if (j >= i) ++j;
    const Point u = rng.uniform_in_ball(d, 1.0);
    Point prop = cs.config.at(j);
    for (int k = 0; k < d; ++k) prop[static_cast<size_t>(k)] += u[static_cast<size_t>(k)];
    if (!cc.in_domain(prop)) return;

    // the move teleports y_i anywhere a particle has a unit neighborhood,
    // so the proposal law for particle i is a mixture over anchors l != i;
    // with a flat nu the Hastings ratio reduces to a neighbor-count ratio
    const int fwd = unit_ball_neighbors(cs.config, prop, i);
    const int rev = unit_ball_neighbors(cs.config, cs.config.at(i), i);
    if (rev == 0) return;  // reverse density zero: irreversible, reject
    const double dh = energy_delta_move(cc.params, cs.config, cc.mu, i, prop);
    if (dh == kInf) return;
    const double log_ratio = -cc.params.beta * dh + std::log(static_cast<double>(rev) / fwd);
    if (log_ratio < 0.0 && rng.uniform01() >= std::exp(log_ratio)) return;
    cs.config.set(i, std::move(prop));
    cs.energy += dh;
    ++cs.mim_accepted;
}

namespace {

void resync_energy(ChainState& cs, const ChainConfig& cc) {
    const double full = conditional_hamiltonian(cc.params, cs.config, cc.mu);
    const double scale = std::max(1.0, std::abs(full));
    const double drift = std::abs(cs.energy - full) / scale;
    cs.max_resync_drift = std::max(cs.max_resync_drift, drift);
    cs.energy = full;
}

constexpr std::int64_t kResyncPeriod = 1 << 17;

}  // namespace

ChainStats run_chain(const ChainConfig& cc, const std::vector<Observer>& observers,
                     std::ostream* snapshot_sink, std::int64_t snapshot_every) {
    cc.validate();
    ChainStats out;
    out.n_samples = 0;
    const std::int64_t planned = cc.thinning > 0 ? cc.n_steps / cc.thinning : 0;
    if (planned == 0) {
        out.error = true;
        out.error_message = "no samples: n_steps < thinning";
        return out;
    }
    out.batch_size = batch_size_for(planned);
    const int m = cc.params.n_particles;
    for (const Observer& ob : observers) {
        int hi = std::max({ob.particle, ob.tag, ob.fav_i, ob.fav_j});
        for (const auto& [idx, reg] : ob.particle_gates) hi = std::max(hi, idx);
        for (const EventSpec& e : ob.events) {
            for (int idx : e.indices) hi = std::max(hi, idx);
            if (e.kind == EventSpec::Kind::PairClose) hi = std::max({hi, e.i, e.j});
        }
        if (hi >= m) throw std::invalid_argument("run_chain: observer references particle " + std::to_string(hi));
        out.streams.emplace(ob.name(), StreamStats(out.batch_size));
    }
    if (out.streams.size() != observers.size())
        throw std::invalid_argument("run_chain: duplicate observer names");

    const BallAverageOracle oracle = default_oracle(cc.params);
    Rng rng(cc.seed);
    ChainState cs = init_chain(cc, rng);

    // burn-in with windowed acceptance-driven scale adjustment
    std::int64_t window_prop = 0, window_acc = 0;
    std::int64_t last_prop = 0, last_acc = 0;
    const double scale_lo = cs.step_scale * 1e-4, scale_hi = cs.step_scale * 1e4;
    for (std::int64_t t = 0; t < cc.n_burnin; ++t) {
        step(cs, cc, rng);
        if (cc.autotune) {
            window_prop += cs.gauss_proposed - last_prop;
            window_acc += cs.gauss_accepted - last_acc;
            last_prop = cs.gauss_proposed;
            last_acc = cs.gauss_accepted;
            if (window_prop >= 1000) {
                const double rate = static_cast<double>(window_acc) / window_prop;
                if (rate < 0.2)
                    cs.step_scale = std::max(cs.step_scale * 0.8, scale_lo);
                else if (rate > 0.5)
                    cs.step_scale = std::min(cs.step_scale * 1.25, scale_hi);
                window_prop = window_acc = 0;
            }
        }
        if (cs.step_count % kResyncPeriod == 0) resync_energy(cs, cc);
    }
    resync_energy(cs, cc);
    // burn-in tallies do not count toward the reported acceptance rates
    cs.gauss_proposed = cs.gauss_accepted = 0;
    cs.mim_proposed = cs.mim_accepted = 0;

    for (std::int64_t t = 1; t <= cc.n_steps; ++t) {
        step(cs, cc, rng);
        if (cs.step_count % kResyncPeriod == 0) resync_energy(cs, cc);
        if (t % cc.thinning != 0) continue;
        ++out.n_samples;
        if (cc.target == ChainConfig::TargetKind::ConditionalGas)
            for (int k = 0; k < cs.config.size(); ++k)
                if (!cc.in_domain(cs.config.at(k))) ++out.constraint_violations;
        for (const Observer& ob : observers)
            out.streams.at(ob.name()).add(ob.eval(cc.params, cc.mu, cs.config, cs.energy, oracle));
        if (snapshot_sink && snapshot_every > 0 && (t / cc.thinning) % snapshot_every == 0) {
            std::ostream& s = *snapshot_sink;
            s << cs.step_count << ' ' << fmt17(cs.energy);
            for (int k = 0; k < cs.config.size(); ++k)
                for (int a = 0; a < cc.params.d; ++a) s << ' ' << fmt17(cs.config.at(k)[static_cast<size_t>(a)]);
            s << '\n';
        }
    }
    resync_energy(cs, cc);
    out.gauss_proposed = cs.gauss_proposed;
    out.gauss_accepted = cs.gauss_accepted;
    out.mim_proposed = cs.mim_proposed;
    out.mim_accepted = cs.mim_accepted;
    out.max_resync_drift = cs.max_resync_drift;
    out.final_energy = cs.energy;
    out.final_step_scale = cs.step_scale;
    return out;
}

const StreamStats& ChainStats::stream(const std::string& name) const {
    auto it = streams.find(name);
    if (it == streams.end()) throw std::invalid_argument("missing observer stream: " + name);
    return it->second;
}

bool ChainStats::has_stream(const std::string& name) const { return streams.count(name) != 0; }

void ChainStats::merge(const ChainStats& other) {
    if (other.streams.size() != streams.size()) throw std::invalid_argument("merging mismatched chain stats");
    for (auto& [name, ss] : streams) ss.merge(other.stream(name));
    n_samples += other.n_samples;
    gauss_proposed += other.gauss_proposed;
    gauss_accepted += other.gauss_accepted;
    mim_proposed += other.mim_proposed;
    mim_accepted += other.mim_accepted;
    constraint_violations += other.constraint_violations;
    max_resync_drift = std::max(max_resync_drift, other.max_resync_drift);
    error = error || other.error;
    if (error_message.empty()) error_message = other.error_message;
}

}  // namespace gaslab
