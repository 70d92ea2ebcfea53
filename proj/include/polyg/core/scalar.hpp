#pragma once

#include <cstdint>
#include <string>
#include <variant>

namespace polyg {

// Attribute and literal values are restricted to strings, integers and
// floats. The variant order defines the cross-type sort rank used wherever
// a deterministic total order over scalars is required.
using Scalar = std::variant<std::int64_t, double, std::string>;

// Renders a scalar to its canonical text form. Doubles use the shortest
// round-trip representation.
std::string scalar_to_string(const Scalar& s);

// Total order: rank by alternative (int < double < string), then by value.
// Used for deterministic row ordering, never for query comparison
// semantics (see compare_for_query).
int scalar_order(const Scalar& a, const Scalar& b);

// Query comparison semantics: numeric types compare by value (int vs
// double is allowed), strings compare lexicographically. Returns -2 when
// the operands are not comparable (string vs number).
int compare_for_query(const Scalar& a, const Scalar& b);

}  // namespace polyg
