#include "gaslab/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace gaslab {

namespace {

Point origin(int d) { return Point(static_cast<size_t>(d), 0.0); }

// count >= x over integer counts
int at_least_threshold(double x) { return static_cast<int>(std::ceil(x - 1e-12)); }
// count > x
int strictly_more_threshold(double x) { return static_cast<int>(std::floor(x + 1e-12)) + 1; }
// count < x, expressed as count <= threshold
int strictly_less_cap(double x) { return at_least_threshold(x) - 1; }

}  // namespace

int NumberDistribution::support_width() const {
    int best = 0, run = 0;
    for (double p : prob) {
        if (p > noise_floor) {
            ++run;
            best = std::max(best, run);
        } else {
            run = 0;
        }
    }
    return best;
}

double NumberDistribution::entropy() const {
    double h = 0.0;
    for (double p : prob)
        if (p > 0.0) h -= p * std::log(p);
    return h;
}

std::string InequalityReport::row_header() {
    return "name\tparams\tlhs\tlhs_se\trhs\trhs_se\timplied_c\tpass\thard_failure\thypothesis_relaxed\tnote";
}

std::string InequalityReport::to_row() const {
    std::ostringstream s;
    s << name << '\t';
    bool first = true;
    for (const auto& [k, v] : params) {
        s << (first ? "" : ",") << k << '=' << fmt17(v);
        first = false;
    }
    if (first) s << '-';
    s << '\t' << fmt17(lhs) << '\t' << fmt17(lhs_se) << '\t' << fmt17(rhs) << '\t' << fmt17(rhs_se)
      << '\t' << fmt17(implied_c) << '\t' << (pass ? 1 : 0) << '\t' << (hard_failure ? 1 : 0) << '\t'
      << (hypothesis_relaxed ? 1 : 0) << '\t' << (note.empty() ? "-" : note);
    return s.str();
}

std::vector<Observer> count_observers(const Region& region, int M) {
    std::vector<Observer> out;
    out.reserve(static_cast<size_t>(M) + 1);
    for (int n = 0; n <= M; ++n) out.push_back(Observer::event(EventSpec::count_equals(region, n)));
    return out;
}

Observer prefix_event_observer(int n, const Region& region, int M) {
    if (n < 0 || n > M) throw std::invalid_argument("prefix event needs 0 <= n <= M");
    std::vector<int> idx(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) idx[static_cast<size_t>(i)] = i;
    return Observer::event(EventSpec::indexed_inside(std::move(idx), region));
}

Observer indexed_event_observer(std::vector<int> indices, const Region& region, int M) {
    for (int i : indices)
        if (i < 0 || i >= M) throw std::invalid_argument("indexed event references a bad particle index");
    return Observer::event(EventSpec::indexed_inside(std::move(indices), region));
}

std::vector<Observer> bad_term_observers(const ThreePointSpec& s, int n, int M, int d) {
    if (!(s.T > 0.0) || !(s.rho0 > 1.0) || !(s.R > 1.0))
        throw std::invalid_argument("bad term needs T > 0, rho0 > 1, R > 1");
    (void)M;
    const double td = std::pow(s.T, d);
    std::vector<Observer> out;
    out.push_back(Observer::event(EventSpec::count_at_least(
        Region::annulus(origin(d), s.T / 2.0, 3.0 * s.T), strictly_more_threshold(s.rho0 * td))));
    out.push_back(Observer::event(EventSpec::count_at_most(
        Region::annulus(origin(d), s.T, 2.0 * s.T), strictly_less_cap(td / s.rho0))));
    out.push_back(Observer::event(EventSpec::count_at_least(
        Region::annulus(origin(d), s.R - 1.0, s.R), at_least_threshold((1.0 - 1.0 / s.rho0) * n))));
    return out;
}

std::vector<Observer> overcrowding_observers(const OvercrowdSpec& s, int d) {
    if (!(s.r > 0.0)) throw std::invalid_argument("overcrowding radius must be positive");
    std::vector<EventSpec> gates;
    if (s.T > 0.0) {
        if (!(s.rho0 > 0.0)) throw std::invalid_argument("overcrowding density gate needs rho0 > 0");
        gates.push_back(EventSpec::count_at_most(
            Region::annulus(origin(d), s.T / 2.0, 3.0 * s.T),
            static_cast<int>(std::floor(s.rho0 * std::pow(s.T, d) + 1e-12))));
    }
    std::vector<Observer> out;
    out.push_back(Observer::nbr_at_least(0, s.r, 0, s.U, gates));  // conditioning indicator
    const double rd = std::pow(s.r, d);
    for (double rho : s.rho_grid)
        out.push_back(Observer::nbr_at_least(0, s.r, at_least_threshold(rho * rd), s.U, gates));
    return out;
}

namespace {

std::vector<Region> halved(const std::vector<Region>& balls) {
    std::vector<Region> out;
    out.reserve(balls.size());
    for (const Region& b : balls) out.push_back(Region::ball(b.center(), b.radius() / 2.0));
    return out;
}

Observer occupancy_all(const std::vector<Region>& balls) {
    std::vector<EventSpec> es;
    es.reserve(balls.size());
    for (const Region& b : balls) es.push_back(EventSpec::count_at_least(b, 1));
    return Observer::all_of(std::move(es));
}

}  // namespace

std::vector<Observer> kpoint_observers(const std::vector<Region>& balls) {
    if (balls.empty()) throw std::invalid_argument("kpoint needs at least one ball");
    return {occupancy_all(balls), occupancy_all(halved(balls))};
}

std::vector<Observer> transport_observers(const TransportSpec& s, int M, int d) {
    if (s.n < 1 || s.n + 1 > M) throw std::invalid_argument("transport check needs 1 <= n < M");
    if (!(s.T > 0.0) || !(s.R > 1.0) || !(s.rho0 > 0.0))
        throw std::invalid_argument("transport check needs T > 0, R > 1, rho0 > 0");
    const Region ballR = Region::ball(origin(d), s.R);
    const Region shellT = Region::annulus(origin(d), s.T, 2.0 * s.T);
    const EventSpec prefix_n = EventSpec::indexed_inside([&] {
        std::vector<int> idx(static_cast<size_t>(s.n));
        for (int i = 0; i < s.n; ++i) idx[static_cast<size_t>(i)] = i;
        return idx;
    }(), ballR);
    const EventSpec d1 = EventSpec::count_at_most(
        Region::annulus(origin(d), s.T / 2.0, 3.0 * s.T),
        static_cast<int>(std::floor(s.rho0 * std::pow(s.T, d) + 1e-12)));

    std::vector<Observer> out;
    // A: transport the outer particle n toward particle 0 sitting well inside
    out.push_back(Observer::fav_gated(s.n, 0, MimDirection::i_to_j,
                                      {{s.n, shellT}, {0, Region::ball(origin(d), s.R - 1.0)}},
                                      {prefix_n}));
    out.push_back(prefix_event_observer(s.n + 1, ballR, M));
    // A': transport particle 0 out toward particle n, under the density gate
    out.push_back(Observer::fav_gated(0, s.n, MimDirection::i_to_j, {{s.n, shellT}}, {prefix_n, d1}));
    out.push_back(indexed_event_observer([&] {
        std::vector<int> idx;
        for (int i = 1; i < s.n; ++i) idx.push_back(i);
        return idx;
    }(), ballR, M));
    return out;
}

NumberDistribution number_distribution(const ChainStats& stats, const Region& region, int M) {
    NumberDistribution nd;
    nd.region = region;
    nd.total_samples = stats.n_samples;
    nd.noise_floor = stats.n_samples > 0 ? 3.0 / stats.n_samples : kInf;
    nd.prob.resize(static_cast<size_t>(M) + 1);
    nd.se.resize(static_cast<size_t>(M) + 1);
    for (int n = 0; n <= M; ++n) {
        const Observer ob = Observer::event(EventSpec::count_equals(region, n));
        const StreamStats& ss = stats.stream(ob.name());
        nd.prob[static_cast<size_t>(n)] = ss.mean();
        nd.se[static_cast<size_t>(n)] = ss.se();
    }
    return nd;
}

BadTermEstimate bad_term(const ChainStats& stats, const ThreePointSpec& s, int n, int M, int d) {
    const std::vector<Observer> obs = bad_term_observers(s, n, M, d);
    BadTermEstimate b;
    b.total_samples = stats.n_samples;
    double var = 0.0;
    for (int k = 0; k < 3; ++k) {
        const StreamStats& ss = stats.stream(obs[static_cast<size_t>(k)].name());
        b.term[k] = ss.mean();
        b.term_se[k] = ss.se();
        b.value += b.term[k];
        var += b.term_se[k] * b.term_se[k];
    }
    b.se = b.value == 0.0 && b.total_samples > 0 ? 3.0 / b.total_samples : std::sqrt(var);
    return b;
}

InequalityReport three_point_check(const NumberDistribution& dist,
                                   const std::vector<BadTermEstimate>& bad_by_n) {
    if (bad_by_n.size() != dist.prob.size())
        throw std::invalid_argument("three_point_check needs one bad-term estimate per count value");
    InequalityReport rep;
    rep.name = "three_point";
    const int M = static_cast<int>(dist.prob.size()) - 1;
    auto p = [&](int n) { return n < 0 || n > M ? 0.0 : dist.prob[static_cast<size_t>(n)]; };
    auto above_floor = [&](double v) { return v > dist.noise_floor; };
    bool any = false;
    for (int n = 0; n <= M; ++n) {
        if (!above_floor(p(n))) continue;
        const double den = (above_floor(p(n + 1)) ? p(n + 1) : 0.0) + (above_floor(p(n - 1)) ? p(n - 1) : 0.0);
        if (den == 0.0) {
            if (p(n) > 3.0 * dist.se[static_cast<size_t>(n)]) {
                rep.hard_failure = true;
                rep.note = "isolated significant mass at n=" + std::to_string(n);
                rep.params["n_star"] = n;
                rep.lhs = p(n);
                rep.lhs_se = dist.se[static_cast<size_t>(n)];
                rep.rhs = 0.0;
            }
            continue;
        }
        const double c = std::max(0.0, (p(n) - bad_by_n[static_cast<size_t>(n)].value) / den);
        rep.per_n[n] = c;
        any = true;
        if (c >= rep.implied_c) {
            rep.implied_c = c;
            rep.params["n_star"] = n;
            rep.lhs = p(n);
            rep.lhs_se = dist.se[static_cast<size_t>(n)];
            rep.rhs = den;
            const double se_lo = n >= 1 ? dist.se[static_cast<size_t>(n - 1)] : 0.0;
            const double se_hi = n + 1 <= M ? dist.se[static_cast<size_t>(n + 1)] : 0.0;
            rep.rhs_se = std::sqrt(se_lo * se_lo + se_hi * se_hi);
        }
    }
    if (!any && !rep.hard_failure) rep.note = "no mass above noise floor";
    rep.pass = !rep.hard_failure && any && std::isfinite(rep.implied_c);
    return rep;
}

OvercrowdingCurve overcrowding_curve(const ChainStats& stats, const OvercrowdSpec& s, int d) {
    const std::vector<Observer> obs = overcrowding_observers(s, d);
    const StreamStats& den = stats.stream(obs[0].name());
    OvercrowdingCurve curve;
    const double den_mean = den.mean();
    curve.n_conditioned = std::llround(den_mean * den.count());
    if (curve.n_conditioned == 0) throw std::runtime_error("overcrowding: conditioning event never observed");
    const double n_eff_cond = curve.n_conditioned / den.tau();
    std::vector<double> xs, ys, vars;
    for (std::size_t k = 0; k + 1 < obs.size(); ++k) {
        const double rho = s.rho_grid[k];
        const StreamStats& num = stats.stream(obs[k + 1].name());
        OvercrowdingPoint pt;
        pt.rho = rho;
        pt.prob = num.mean() / den_mean;
        pt.n_conditioned = curve.n_conditioned;
        pt.se = std::sqrt(std::max(pt.prob * (1.0 - pt.prob), 0.0) / n_eff_cond);
        curve.points.push_back(pt);
        if (pt.prob > 0.0 && pt.prob < 1.0) {
            xs.push_back(rho * rho);
            ys.push_back(std::log(pt.prob));
            vars.push_back((1.0 - pt.prob) / (pt.prob * n_eff_cond));
        }
    }
    curve.reported = curve.n_conditioned >= 200 && xs.size() >= 2;
    if (curve.reported) {
        const LineFit f = fit_line(xs, ys, vars);
        curve.slope = f.slope;
        curve.slope_se = f.slope_se;
    }
    return curve;
}

InequalityReport kpoint_correlation_check(const ChainStats& stats, const std::vector<Region>& balls,
                                          double R, int d) {
    const int n = static_cast<int>(balls.size());
    if (n < 1) throw std::invalid_argument("kpoint needs at least one ball");
    double vol_prod = 1.0;
    double r_min = kInf;
    for (int a = 0; a < n; ++a) {
        const Region& A = balls[static_cast<size_t>(a)];
        if (A.kind() != Region::Kind::Ball) throw std::invalid_argument("kpoint regions must be balls");
        const double edge = R - (std::sqrt(norm2(A.center())) + A.radius());
        if (!(edge > 0.0)) throw std::invalid_argument("kpoint ball touches the domain boundary");
        r_min = std::min(r_min, edge);
        vol_prod *= A.volume(d);
        for (int b = a + 1; b < n; ++b) {
            const Region& B = balls[static_cast<size_t>(b)];
            const double gap = std::sqrt(dist2(A.center(), B.center())) - A.radius() - B.radius();
            if (!(gap > 0.0)) throw std::invalid_argument("kpoint balls overlap or touch");
        }
    }
    const std::vector<Observer> obs = kpoint_observers(balls);
    const StreamStats& full = stats.stream(obs[0].name());
    const StreamStats& half = stats.stream(obs[1].name());

    InequalityReport rep;
    rep.name = "kpoint";
    rep.params["n"] = n;
    rep.params["R"] = R;
    rep.params["r_min"] = r_min;
    rep.lhs = full.mean();
    rep.lhs_se = full.se();
    rep.rhs = std::pow(r_min, -static_cast<double>(d) * n) * vol_prod;
    rep.rhs_se = 0.0;
    rep.implied_c = rep.lhs / rep.rhs;
    rep.params["p_half"] = half.mean();
    rep.params["p_half_se"] = half.se();
    if (full.mean() > 0.0 && half.mean() > 0.0) {
        const double log_ratio = std::log(full.mean() / half.mean());
        const double target = d * n * std::log(2.0);
        const double se = std::sqrt(std::pow(full.se() / full.mean(), 2) + std::pow(half.se() / half.mean(), 2));
        rep.params["log_ratio"] = log_ratio;
        rep.params["log_ratio_se"] = se;
        rep.params["log_ratio_target"] = target;
        rep.pass = std::abs(log_ratio - target) <= 3.0 * se;
        if (!rep.pass) rep.note = "halving exponent off target";
    } else {
        rep.pass = false;
        rep.note = "occupancy probability vanished";
    }
    return rep;
}

namespace {

InequalityReport transport_report(const char* name, double p_src, double se_src, double scale,
                                  double p_tgt, double se_tgt, const TransportSpec& s) {
    InequalityReport rep;
    rep.name = name;
    rep.params["n"] = s.n;
    rep.params["T"] = s.T;
    rep.params["R"] = s.R;
    rep.lhs = p_src;
    rep.lhs_se = se_src;
    rep.rhs = scale * p_tgt;
    rep.rhs_se = scale * se_tgt;
    if (p_tgt > 0.0) {
        rep.implied_c = p_src / (scale * p_tgt);
        rep.pass = true;
    } else if (p_src > 3.0 * se_src) {
        rep.hard_failure = true;
        rep.note = "target event unseen, source significant";
    } else {
        rep.pass = true;  // vacuous: both sides at zero resolution
        rep.note = "vacuous";
    }
    return rep;
}

}  // namespace

std::pair<InequalityReport, InequalityReport> lemma_transport_check(const ChainStats& stats,
                                                                    const TransportSpec& s, int M,
                                                                    int d) {
    const std::vector<Observer> obs = transport_observers(s, M, d);
    const StreamStats& a_src = stats.stream(obs[0].name());
    const StreamStats& a_tgt = stats.stream(obs[1].name());
    const StreamStats& ap_src = stats.stream(obs[2].name());
    const StreamStats& ap_tgt = stats.stream(obs[3].name());
    const double td = std::pow(s.T, d);
    InequalityReport a = transport_report("transport_out_to_in", a_src.mean(), a_src.se(), td,
                                          a_tgt.mean(), a_tgt.se(), s);
    const double scale_ap = td / (static_cast<double>(M - s.n) * (M - s.n + 1));
    InequalityReport ap = transport_report("transport_in_to_out", ap_src.mean(), ap_src.se(),
                                           scale_ap, ap_tgt.mean(), ap_tgt.se(), s);
    return {a, ap};
}

NonrigidityReport nonrigidity_indicator(const std::vector<std::pair<double, NumberDistribution>>& runs) {
    NonrigidityReport rep;
    rep.nonrigid_signature = !runs.empty();
    for (const auto& [S, nd] : runs) {
        rep.S_values.push_back(S);
        rep.widths.push_back(nd.support_width());
        rep.entropies.push_back(nd.entropy());
        if (nd.support_width() < 2) rep.nonrigid_signature = false;
    }
    return rep;
}

}  // namespace gaslab
