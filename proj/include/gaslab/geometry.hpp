#ifndef GASLAB_GEOMETRY_HPP
#define GASLAB_GEOMETRY_HPP

#include <memory>
#include <string>
#include <vector>

#include "gaslab/util.hpp"

namespace gaslab {

// Computable subsets of R^d built from balls and annuli. Balls are open;
// complements are therefore closed. A point exactly on a boundary belongs
// to the complement. Membership uses squared distances only, so the tie
// rule is deterministic.
class Region {
public:
    enum class Kind { All, Ball, Annulus, Complement, Union };

    static Region all();
    static Region ball(Point center, double radius);
    static Region annulus(Point center, double r_in, double r_out);
    static Region complement(Region inner);
    static Region unite(Region a, Region b);

    Kind kind() const { return kind_; }
    const Point& center() const { return center_; }
    double radius() const { return r_out_; }
    double r_in() const { return r_in_; }
    double r_out() const { return r_out_; }
    const Region& first() const { return *sub_a_; }
    const Region& second() const { return *sub_b_; }

    bool contains(const Point& x) const;
    bool bounded() const;

    // Lebesgue volume for ball and annulus; throws for other kinds
    double volume(int dim) const;

    // canonical text form, e.g. ball(0,0,0;1.5) or union(...,...)
    std::string to_text() const;
    static Region parse(const std::string& text);

    bool operator==(const Region& o) const { return to_text() == o.to_text(); }

private:
    Region() = default;
    Kind kind_ = Kind::All;
    Point center_;
    double r_in_ = 0.0, r_out_ = 0.0;
    std::shared_ptr<const Region> sub_a_, sub_b_;
};

// Events evaluable on a configuration: occupation counts of a region,
// index-labeled membership patterns, and pairwise closeness.
struct EventSpec {
    enum class Kind { CountEquals, CountAtLeast, CountAtMost, IndexedInside, PairClose };

    Kind kind = Kind::CountEquals;
    Region region = Region::all();
    int n = 0;                    // count threshold
    std::vector<int> indices;     // IndexedInside: 0-based, sorted, unique
    int i = 0, j = 0;             // PairClose pair, 0-based
    double distance = 0.0;        // PairClose threshold, |y_i - y_j| <= distance

    static EventSpec count_equals(Region r, int n);
    static EventSpec count_at_least(Region r, int n);
    static EventSpec count_at_most(Region r, int n);
    static EventSpec indexed_inside(std::vector<int> idx, Region r);
    static EventSpec pair_close(int i, int j, double distance);

    std::string to_text() const;
    static EventSpec parse(const std::string& text);
};

// number of positions lying in r
int count_in(const std::vector<Point>& positions, const Region& r);

bool event_holds(const EventSpec& e, const std::vector<Point>& positions);

}  // namespace gaslab

#endif
