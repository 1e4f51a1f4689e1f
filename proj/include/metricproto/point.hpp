#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace metricproto {

/// A point from one of the supported universes: a dense real vector, a
/// symbol sequence, or an element of a finite catalog. Spaces built with
/// `augment()` attach an extra tie-breaking coordinate in [0,1].
struct Point {
    using Payload = std::variant<std::vector<double>, std::string, std::int32_t>;

    Payload payload{std::vector<double>{}};
    std::optional<double> tie_coord{};

    static Point vec(std::vector<double> v) {
        Point p;
        p.payload = std::move(v);
        return p;
    }
    static Point vec1(double x) { return vec({x}); }
    static Point sym(std::string s) {
        Point p;
        p.payload = std::move(s);
        return p;
    }
    static Point cat(std::int32_t id) {
        Point p;
        p.payload = id;
        return p;
    }

    const std::vector<double>* as_vec() const { return std::get_if<std::vector<double>>(&payload); }
    const std::string* as_sym() const { return std::get_if<std::string>(&payload); }
    const std::int32_t* as_cat() const { return std::get_if<std::int32_t>(&payload); }
};

/// Payload equality; the tie coordinate is ignored.
inline bool same_payload(const Point& a, const Point& b) {
    return a.payload == b.payload;
}

} // namespace metricproto
