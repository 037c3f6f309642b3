#ifndef GASLAB_ESTIMATOR_HPP
#define GASLAB_ESTIMATOR_HPP

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "gaslab/sampler.hpp"

namespace gaslab {

struct NumberDistribution {
    Region region = Region::all();
    std::int64_t total_samples = 0;
    std::vector<double> prob;  // index n = 0 .. M
    std::vector<double> se;
    double noise_floor = 0.0;  // 3 / total_samples, the zero-at-resolution cut

    // longest run of consecutive n with mass above the noise floor
    int support_width() const;
    double entropy() const;  // nats, over positive masses
};

struct BadTermEstimate {
    double value = 0.0;
    double se = 0.0;
    double term[3] = {0.0, 0.0, 0.0};
    double term_se[3] = {0.0, 0.0, 0.0};
    std::int64_t total_samples = 0;
};

struct InequalityReport {
    std::string name;
    std::map<std::string, double> params;
    double lhs = 0.0, lhs_se = 0.0;
    double rhs = 0.0, rhs_se = 0.0;
    double implied_c = 0.0;
    bool pass = false;
    bool hard_failure = false;
    bool hypothesis_relaxed = false;
    std::string note;
    std::map<int, double> per_n;  // three-point: implied constant by n

    std::string to_row() const;  // flat tab-separated table row
    static std::string row_header();
};

struct OvercrowdingPoint {
    double rho = 0.0;
    double prob = 0.0;
    double se = 0.0;
    std::int64_t n_conditioned = 0;
};

struct OvercrowdingCurve {
    std::vector<OvercrowdingPoint> points;
    bool reported = false;  // false when the conditioning floor is not met
    double slope = 0.0;     // d log p / d rho^2, weighted fit over positive points
    double slope_se = 0.0;
    std::int64_t n_conditioned = 0;
};

struct NonrigidityReport {
    std::vector<double> S_values;
    std::vector<int> widths;
    std::vector<double> entropies;
    bool nonrigid_signature = false;  // width >= 2 at every S
};

// -- observer construction (canonical names shared with the lookups below) --

// CountEquals(region, n) for n = 0..M
std::vector<Observer> count_observers(const Region& region, int M);
// E_{[n],R}: indices 0..n-1 inside, all others outside
Observer prefix_event_observer(int n, const Region& region, int M);
// E_{I,R} for an explicit index set
Observer indexed_event_observer(std::vector<int> indices, const Region& region, int M);

struct ThreePointSpec {
    double T = 0.0;
    double rho0 = 0.0;
    double R = 0.0;
};
// the three atypical-density events for the given n (thresholds resolved to
// integer counts)
std::vector<Observer> bad_term_observers(const ThreePointSpec& s, int n, int M, int d);

struct OvercrowdSpec {
    double r = 1.0;             // neighbourhood radius around the tagged particle
    Region U = Region::all();   // tag-location conditioning set
    double T = 0.0, rho0 = 0.0; // density conditioning scale
    std::vector<double> rho_grid;
};
std::vector<Observer> overcrowding_observers(const OvercrowdSpec& s, int d);

std::vector<Observer> kpoint_observers(const std::vector<Region>& balls);

struct TransportSpec {
    int n = 1;
    double T = 0.0;
    double rho0 = 0.0;
    double R = 0.0;
};
std::vector<Observer> transport_observers(const TransportSpec& s, int M, int d);

// -- estimation + inequality checks over recorded streams --

NumberDistribution number_distribution(const ChainStats& stats, const Region& region, int M);

BadTermEstimate bad_term(const ChainStats& stats, const ThreePointSpec& s, int n, int M, int d);

// implied C_n = max(0, (p_n - bad_n)/(p_{n+1} + p_{n-1})) for every n above
// the noise floor; reports the largest. Hard failure when some significant
// p_n faces a zero denominator.
InequalityReport three_point_check(const NumberDistribution& dist,
                                   const std::vector<BadTermEstimate>& bad_by_n);

OvercrowdingCurve overcrowding_curve(const ChainStats& stats, const OvercrowdSpec& s, int d);


// joint-occupancy bound for disjoint balls inside B_R, plus the
// radius-halving scaling exponent test (requires the halved observers too)
InequalityReport kpoint_correlation_check(const ChainStats& stats, const std::vector<Region>& balls,
                                          double R, int d);

// lemma pair: out-to-in (A) and in-to-out (A') transport inequalities
std::pair<InequalityReport, InequalityReport> lemma_transport_check(const ChainStats& stats,
                                                                    const TransportSpec& s, int M,
                                                                    int d);

NonrigidityReport nonrigidity_indicator(const std::vector<std::pair<double, NumberDistribution>>& runs);

}  // namespace gaslab

#endif
