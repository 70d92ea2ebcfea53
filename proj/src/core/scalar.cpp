#include "polyg/core/scalar.hpp"

#include <charconv>

namespace polyg {

std::string scalar_to_string(const Scalar& s) {
    switch (s.index()) {
        case 0:
            return std::to_string(std::get<std::int64_t>(s));
        case 1: {
            char buf[64];
            auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), std::get<double>(s));
            (void)ec;
            return std::string(buf, p);
        }
        default:
            return std::get<std::string>(s);
    }
}

int scalar_order(const Scalar& a, const Scalar& b) {
    if (a.index() != b.index()) return a.index() < b.index() ? -1 : 1;
    switch (a.index()) {
        case 0: {
            auto x = std::get<std::int64_t>(a), y = std::get<std::int64_t>(b);
            return x < y ? -1 : x > y ? 1 : 0;
        }
        case 1: {
            auto x = std::get<double>(a), y = std::get<double>(b);
            return x < y ? -1 : x > y ? 1 : 0;
        }
        default: {
            const auto& x = std::get<std::string>(a);
            const auto& y = std::get<std::string>(b);
            return x < y ? -1 : x > y ? 1 : 0;
        }
    }
}

int compare_for_query(const Scalar& a, const Scalar& b) {
    bool a_num = a.index() < 2, b_num = b.index() < 2;
    if (a_num != b_num) return -2;
    if (!a_num) {
        const auto& x = std::get<std::string>(a);
        const auto& y = std::get<std::string>(b);
        return x < y ? -1 : x > y ? 1 : 0;
    }
    double x = a.index() == 0 ? static_cast<double>(std::get<std::int64_t>(a))
                              : std::get<double>(a);
    double y = b.index() == 0 ? static_cast<double>(std::get<std::int64_t>(b))
                              : std::get<double>(b);
    return x < y ? -1 : x > y ? 1 : 0;
}

}  // namespace polyg
