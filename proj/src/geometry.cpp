#include "gaslab/geometry.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <sstream>

namespace gaslab {

Region Region::all() {
    Region r;
    r.kind_ = Kind::All;
    return r;
}

Region Region::ball(Point center, double radius) {
    if (!(radius > 0.0)) throw ParseError("ball radius must be > 0");
    Region r;
    r.kind_ = Kind::Ball;
    r.center_ = std::move(center);
    r.r_out_ = radius;
    return r;
}

Region Region::annulus(Point center, double r_in, double r_out) {
    if (!(r_in >= 0.0 && r_in < r_out)) throw ParseError("annulus needs 0 <= r_in < r_out");
    Region r;
    r.kind_ = Kind::Annulus;
    r.center_ = std::move(center);
    r.r_in_ = r_in;
    r.r_out_ = r_out;
    return r;
}

Region Region::complement(Region inner) {
    Region r;
    r.kind_ = Kind::Complement;
    r.sub_a_ = std::make_shared<Region>(std::move(inner));
    return r;
}

Region Region::unite(Region a, Region b) {
    Region r;
    r.kind_ = Kind::Union;
    r.sub_a_ = std::make_shared<Region>(std::move(a));
    r.sub_b_ = std::make_shared<Region>(std::move(b));
    return r;
}

bool Region::contains(const Point& x) const {
    switch (kind_) {
        case Kind::All:
            return true;
        case Kind::Ball:
            return dist2(x, center_) < r_out_ * r_out_;
        case Kind::Annulus: {
            double d2 = dist2(x, center_);
            // ball difference B_out \ B_in: inner boundary in, outer out
            return d2 >= r_in_ * r_in_ && d2 < r_out_ * r_out_;
        }
        case Kind::Complement:
            return !sub_a_->contains(x);
        case Kind::Union:
            return sub_a_->contains(x) || sub_b_->contains(x);
    }
    return false;
}

bool Region::bounded() const {
    switch (kind_) {
        case Kind::All:
        case Kind::Complement:
            return false;  // complements of our bounded primitives are unbounded
        case Kind::Ball:
        case Kind::Annulus:
            return true;
        case Kind::Union:
            return sub_a_->bounded() && sub_b_->bounded();
    }
    return false;
}

double Region::volume(int dim) const {
    switch (kind_) {
        case Kind::Ball:
            return ball_volume(dim, r_out_);
        case Kind::Annulus:
            return ball_volume(dim, r_out_) - ball_volume(dim, r_in_);
        default:
            throw ParseError("volume defined for ball and annulus only, got " + to_text());
    }
}

namespace {

std::string points_to_text(const Point& c) {
    std::string s;
    for (size_t k = 0; k < c.size(); ++k) {
        if (k) s += ",";
        s += fmt17(c[k]);
    }
    return s;
}

// split "a,b,c" at top-level commas (commas inside parens stay put)
std::vector<std::string> split_top(const std::string& s, char sep) {
    std::vector<std::string> out;
    int depth = 0;
    std::string cur;
    for (char ch : s) {
        if (ch == '(') ++depth;
        if (ch == ')') --depth;
        if (ch == sep && depth == 0) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

std::string strip(const std::string& s) {
    size_t a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

double parse_num(const std::string& s) {
    const std::string t = strip(s);
    char* end = nullptr;
    double v = std::strtod(t.c_str(), &end);
    if (end != t.c_str() + t.size() || t.empty()) throw ParseError("bad number '" + t + "'");
    return v;
}

Point parse_point(const std::string& s) {
    Point p;
    for (const auto& part : split_top(s, ',')) p.push_back(parse_num(part));
    return p;
}

// "name(args)" -> {name, args}; plain word -> {word, ""}
bool split_call(const std::string& text, std::string& name, std::string& args) {
    const std::string t = strip(text);
    size_t open = t.find('(');
    if (open == std::string::npos) {
        name = t;
        args = "";
        return false;
    }
    if (t.back() != ')') throw ParseError("unbalanced parentheses in '" + t + "'");
    name = strip(t.substr(0, open));
    args = t.substr(open + 1, t.size() - open - 2);
    return true;
}

}  // namespace

std::string Region::to_text() const {
    switch (kind_) {
        case Kind::All:
            return "all";
        case Kind::Ball:
            return "ball(" + points_to_text(center_) + ";" + fmt17(r_out_) + ")";
        case Kind::Annulus:
            return "annulus(" + points_to_text(center_) + ";" + fmt17(r_in_) + "," + fmt17(r_out_) + ")";
        case Kind::Complement:
            return "compl(" + sub_a_->to_text() + ")";
        case Kind::Union:
            return "union(" + sub_a_->to_text() + "," + sub_b_->to_text() + ")";
    }
    return "";
}

Region Region::parse(const std::string& text) {
    std::string name, args;
    bool call = split_call(text, name, args);
    if (!call) {
        if (name == "all") return Region::all();
        throw ParseError("unknown region '" + name + "'");
    }
    if (name == "ball") {
        auto parts = split_top(args, ';');
        if (parts.size() != 2) throw ParseError("ball(center;radius) expected, got '" + text + "'");
        return Region::ball(parse_point(parts[0]), parse_num(parts[1]));
    }
    if (name == "annulus") {
        auto parts = split_top(args, ';');
        if (parts.size() != 2) throw ParseError("annulus(center;r_in,r_out) expected, got '" + text + "'");
        auto radii = split_top(parts[1], ',');
        if (radii.size() != 2) throw ParseError("annulus needs two radii in '" + text + "'");
        return Region::annulus(parse_point(parts[0]), parse_num(radii[0]), parse_num(radii[1]));
    }
    if (name == "compl") return Region::complement(Region::parse(args));
    if (name == "union") {
        auto parts = split_top(args, ',');
        if (parts.size() != 2) throw ParseError("union(a,b) expects two regions in '" + text + "'");
        return Region::unite(Region::parse(parts[0]), Region::parse(parts[1]));
    }
    throw ParseError("unknown region '" + name + "'");
}

EventSpec EventSpec::count_equals(Region r, int n) {
    EventSpec e;
    e.kind = Kind::CountEquals;
    e.region = std::move(r);
    e.n = n;
    return e;
}

EventSpec EventSpec::count_at_least(Region r, int n) {
    EventSpec e;
    e.kind = Kind::CountAtLeast;
    e.region = std::move(r);
    e.n = n;
    return e;
}

EventSpec EventSpec::count_at_most(Region r, int n) {
    EventSpec e;
    e.kind = Kind::CountAtMost;
    e.region = std::move(r);
    e.n = n;
    return e;
}

EventSpec EventSpec::indexed_inside(std::vector<int> idx, Region r) {
    EventSpec e;
    e.kind = Kind::IndexedInside;
    e.region = std::move(r);
    std::sort(idx.begin(), idx.end());
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
    e.indices = std::move(idx);
    return e;
}

EventSpec EventSpec::pair_close(int i, int j, double distance) {
    EventSpec e;
    e.kind = Kind::PairClose;
    e.i = i;
    e.j = j;
    e.distance = distance;
    return e;
}

std::string EventSpec::to_text() const {
    switch (kind) {
        case Kind::CountEquals:
            return "count_eq(" + region.to_text() + ";" + std::to_string(n) + ")";
        case Kind::CountAtLeast:
            return "count_ge(" + region.to_text() + ";" + std::to_string(n) + ")";
        case Kind::CountAtMost:
            return "count_le(" + region.to_text() + ";" + std::to_string(n) + ")";
        case Kind::IndexedInside: {
            std::string s = "indexed(";
            for (size_t k = 0; k < indices.size(); ++k) {
                if (k) s += " ";
                s += std::to_string(indices[k]);
            }
            return s + ";" + region.to_text() + ")";
        }
        case Kind::PairClose:
            return "pair_close(" + std::to_string(i) + " " + std::to_string(j) + ";" + fmt17(distance) + ")";
    }
    return "";
}

EventSpec EventSpec::parse(const std::string& text) {
    std::string name, args;
    if (!split_call(text, name, args)) throw ParseError("unknown event '" + text + "'");
    auto parts = split_top(args, ';');
    auto parse_int = [](const std::string& s) {
        double v = parse_num(s);
        int n = static_cast<int>(v);
        if (v != n) throw ParseError("expected integer, got '" + s + "'");
        return n;
    };
    if (name == "count_eq" || name == "count_ge" || name == "count_le") {
        if (parts.size() != 2) throw ParseError(name + "(region;n) expected in '" + text + "'");
        Region r = Region::parse(parts[0]);
        int n = parse_int(parts[1]);
        if (name == "count_eq") return count_equals(std::move(r), n);
        if (name == "count_ge") return count_at_least(std::move(r), n);
        return count_at_most(std::move(r), n);
    }
    if (name == "indexed") {
        if (parts.size() != 2) throw ParseError("indexed(i j ...;region) expected in '" + text + "'");
        std::vector<int> idx;
        std::istringstream is(parts[0]);
        int v;
        while (is >> v) idx.push_back(v);
        return indexed_inside(std::move(idx), Region::parse(parts[1]));
    }
    if (name == "pair_close") {
        if (parts.size() != 2) throw ParseError("pair_close(i j;dist) expected in '" + text + "'");
        std::istringstream is(parts[0]);
        int a, b;
        if (!(is >> a >> b)) throw ParseError("pair_close needs two indices in '" + text + "'");
        return pair_close(a, b, parse_num(parts[1]));
    }
    throw ParseError("unknown event '" + name + "'");
}

int count_in(const std::vector<Point>& positions, const Region& r) {
    int n = 0;
    for (const auto& p : positions)
        if (r.contains(p)) ++n;
    return n;
}

bool event_holds(const EventSpec& e, const std::vector<Point>& positions) {
    switch (e.kind) {
        case EventSpec::Kind::CountEquals:
            return count_in(positions, e.region) == e.n;
        case EventSpec::Kind::CountAtLeast:
            return count_in(positions, e.region) >= e.n;
        case EventSpec::Kind::CountAtMost:
            return count_in(positions, e.region) <= e.n;
        case EventSpec::Kind::IndexedInside: {
            // exact partition: listed indices inside, all others outside
            size_t next = 0;
            for (int k = 0; k < static_cast<int>(positions.size()); ++k) {
                bool listed = next < e.indices.size() && e.indices[next] == k;
                if (listed) ++next;
                if (e.region.contains(positions[static_cast<size_t>(k)]) != listed) return false;
            }
            return next == e.indices.size();
        }
        case EventSpec::Kind::PairClose: {
            const auto& a = positions.at(static_cast<size_t>(e.i));
            const auto& b = positions.at(static_cast<size_t>(e.j));
            return dist2(a, b) <= e.distance * e.distance;
        }
    }
    return false;
}

}  // namespace gaslab
