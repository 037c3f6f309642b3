#include "doctest.h"

#include <cmath>
#include <vector>

#include "gaslab/geometry.hpp"
#include "gaslab/rng.hpp"

using namespace gaslab;

namespace {
Point p3(double x, double y, double z) { return {x, y, z}; }
}  // namespace

TEST_CASE("balls are open, complements closed") {
    Region b = Region::ball({0.0, 0.0, 0.0}, 1.0);
    CHECK(b.contains(p3(0.5, 0, 0)));
    CHECK(!b.contains(p3(1.0, 0, 0)));  // boundary belongs to the complement
    CHECK(Region::complement(b).contains(p3(1.0, 0, 0)));
    CHECK(!Region::complement(b).contains(p3(0.5, 0, 0)));
}

TEST_CASE("annulus membership") {
    Region a = Region::annulus({0.0, 0.0, 0.0}, 1.0, 2.0);
    CHECK(a.contains(p3(0, 1.5, 0)));
    CHECK(!a.contains(p3(0, 0.5, 0)));
    CHECK(!a.contains(p3(0, 2.0, 0)));
    CHECK(a.contains(p3(0, 1.0, 0)));  // inner boundary included: r_in <= |x| < r_out
}

TEST_CASE("union and the constrained domain B_R u B_S^c") {
    Region dom = Region::unite(Region::ball({0.0, 0.0, 0.0}, 2.0),
                               Region::complement(Region::ball({0.0, 0.0, 0.0}, 4.0)));
    CHECK(dom.contains(p3(1, 0, 0)));
    CHECK(!dom.contains(p3(3, 0, 0)));
    CHECK(dom.contains(p3(5, 0, 0)));
    CHECK(dom.contains(p3(4.0, 0, 0)));  // |x| = S is outside the open ball B_S
    CHECK(!dom.contains(p3(2.0, 0, 0)));
}

TEST_CASE("volumes of balls and annuli") {
    CHECK(Region::ball({0.0, 0.0, 0.0}, 1.0).volume(3) ==
          doctest::Approx(4.0 * kPi / 3.0).epsilon(1e-12));
    CHECK(Region::annulus({0.0, 0.0}, 1.0, 2.0).volume(2) ==
          doctest::Approx(3.0 * kPi).epsilon(1e-12));
    CHECK(Region::ball({0.0, 0.0}, 2.0).volume(2) == doctest::Approx(4.0 * kPi).epsilon(1e-12));
    CHECK_THROWS(Region::all().volume(3));
    CHECK_THROWS(Region::complement(Region::ball({0.0, 0.0, 0.0}, 1.0)).volume(3));
}

TEST_CASE("count_in") {
    std::vector<Point> c = {p3(0, 0, 0), p3(3, 0, 0)};
    CHECK(count_in({}, Region::ball({0.0, 0.0, 0.0}, 1.0)) == 0);
    CHECK(count_in(c, Region::ball({0.0, 0.0, 0.0}, 1.0)) == 1);
    CHECK(count_in(c, Region::complement(Region::ball({0.0, 0.0, 0.0}, 2.0))) == 1);
}

TEST_CASE("count events") {
    std::vector<Point> empty;
    CHECK(event_holds(EventSpec::count_equals(Region::ball({0.0, 0.0, 0.0}, 2.0), 0), empty));
    std::vector<Point> c = {p3(0.5, 0, 0), p3(3, 0, 0), p3(0, 0.5, 0)};
    Region b = Region::ball({0.0, 0.0, 0.0}, 1.0);
    CHECK(event_holds(EventSpec::count_equals(b, 2), c));
    CHECK(event_holds(EventSpec::count_at_least(b, 2), c));
    CHECK(!event_holds(EventSpec::count_at_least(b, 3), c));
    CHECK(event_holds(EventSpec::count_at_most(b, 2), c));
    CHECK(!event_holds(EventSpec::count_at_most(b, 1), c));
}

TEST_CASE("indexed events demand the exact membership partition") {
    std::vector<Point> c = {p3(0.5, 0, 0), p3(3, 0, 0)};
    Region b = Region::ball({0.0, 0.0, 0.0}, 1.0);
    CHECK(event_holds(EventSpec::indexed_inside({0}, b), c));
    CHECK(!event_holds(EventSpec::indexed_inside({1}, b), c));
    CHECK(!event_holds(EventSpec::indexed_inside({0, 1}, b), c));
    // empty index set: every particle outside
    CHECK(!event_holds(EventSpec::indexed_inside({}, b), c));
    CHECK(event_holds(EventSpec::indexed_inside({}, b), {p3(3, 0, 0), p3(4, 0, 0)}));
}

TEST_CASE("indexed events partition the count event") {
    // sum over all index sets of size n of P(indexed) together cover
    // {count = n}: on any fixed configuration exactly one indexed event of
    // the right size holds
    Rng rng(404);
    Region b = Region::ball({0.0, 0.0, 0.0}, 1.5);
    const int M = 5;
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<Point> c;
        for (int i = 0; i < M; ++i) c.push_back(rng.uniform_in_ball(3, 3.0));
        int n = count_in(c, b);
        int holds = 0;
        for (int mask = 0; mask < (1 << M); ++mask) {
            std::vector<int> idx;
            for (int i = 0; i < M; ++i)
                if (mask & (1 << i)) idx.push_back(i);
            if (event_holds(EventSpec::indexed_inside(idx, b), c)) {
                holds++;
                CHECK(static_cast<int>(idx.size()) == n);
            }
        }
        CHECK(holds == 1);
    }
}

TEST_CASE("pair_close events") {
    std::vector<Point> c = {p3(0, 0, 0), p3(1, 0, 0)};
    CHECK(event_holds(EventSpec::pair_close(0, 1, 1.0), c));
    CHECK(!event_holds(EventSpec::pair_close(0, 1, 0.5), c));
}

TEST_CASE("region text round-trip") {
    std::vector<Region> rs = {
        Region::all(),
        Region::ball({0.0, 0.0, 0.0}, 1.5),
        Region::annulus({1.0, -2.0}, 0.5, 3.5),
        Region::complement(Region::ball({0.0, 0.0, 0.0}, 2.0)),
        Region::unite(Region::ball({0.0, 0.0, 0.0}, 2.0),
                      Region::complement(Region::ball({0.0, 0.0, 0.0}, 4.0))),
    };
    for (const Region& r : rs) {
        Region back = Region::parse(r.to_text());
        CHECK(back == r);
    }
}

TEST_CASE("event text round-trip") {
    Region b = Region::ball({0.0, 0.0, 0.0}, 2.0);
    std::vector<EventSpec> es = {
        EventSpec::count_equals(b, 3),
        EventSpec::count_at_least(b, 1),
        EventSpec::count_at_most(b, 4),
        EventSpec::indexed_inside({0, 2, 3}, b),
        EventSpec::indexed_inside({}, b),
        EventSpec::pair_close(1, 3, 0.25),
    };
    std::vector<Point> c = {p3(0.5, 0, 0), p3(3, 0, 0),   p3(0, 1, 0),
                            p3(0, 0, 1.5), p3(5, 5, 5)};
    for (const EventSpec& e : es) {
        EventSpec back = EventSpec::parse(e.to_text());
        CHECK(back.to_text() == e.to_text());
        CHECK(event_holds(back, c) == event_holds(e, c));
    }
}
