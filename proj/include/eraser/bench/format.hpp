#pragma once

#include <string>

#include "eraser/bench/ast.hpp"

namespace eraser::bench {

/// Canonical text for a scene; parse(format(s)) == s.
std::string format(const BenchSpec& spec);
std::string format(const Decl& d);
std::string format(const Value& v);

}  // namespace eraser::bench
