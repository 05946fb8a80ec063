#include "eraser/bench/format.hpp"

#include <charconv>
#include <system_error>

namespace eraser::bench {

namespace {

std::string number(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return ec == std::errc{} ? std::string(buf, ptr) : std::string("nan");
}

std::string quantity(const Quantity& q) { return number(q.value) + q.unit; }

}  // namespace

std::string format(const Value& v) {
    return std::visit(
        [](const auto& x) -> std::string {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, Quantity>) {
                return quantity(x);
            } else if constexpr (std::is_same_v<T, Range>) {
                return quantity(x.lo) + ".." + quantity(x.hi);
            } else if constexpr (std::is_same_v<T, std::uint64_t>) {
                return std::to_string(x);
            } else {
                return x;
            }
        },
        v);
}

std::string format(const Decl& d) {
    std::string out = d.keyword;
    for (const auto& w : d.words) out += " " + w;
    for (const auto& a : d.args) out += " " + a.key + "=" + format(a.value);
    return out;
}

std::string format(const BenchSpec& spec) {
    std::string out = format(spec.source) + "\n";
    if (spec.grid) out += format(*spec.grid) + "\n";
    for (const auto& d : spec.elements) out += format(d) + "\n";
    for (const auto& d : spec.detectors) out += format(d) + "\n";
    for (const auto& d : spec.runs) out += format(d) + "\n";
    return out;
}

}  // namespace eraser::bench
