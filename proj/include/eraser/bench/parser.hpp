#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

#include "eraser/bench/ast.hpp"

namespace eraser::bench {

/// Lexical, syntactic, unit and semantic errors, with a 1-based position.
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, std::size_t column, std::string message, std::string token);

    std::size_t line() const { return line_; }
    std::size_t column() const { return column_; }
    const std::string& message() const { return message_; }
    const std::string& token() const { return token_; }

private:
    std::size_t line_;
    std::size_t column_;
    std::string message_;
    std::string token_;
};

/// Line-oriented grammar; `#` starts a comment. Statements:
///
///   source walborn|menzel|custom [waist=<len>] [wavelength=<len>] [mode=hg0|hg1]
///   element double_slit width=<len> separation=<len> [open=both|upper|lower] [center=<len>]
///   element single_slit width=<len> [center=<len>]
///   element qwp slit=upper|lower angle=<angle>
///   element polarizer arm=signal|idler angle=<angle>
///   element propagate arm=signal|idler distance=<len>
///   detector signal scan=<len>..<len> steps=<int> at=<len> [propagator=fresnel|fraunhofer]
///   detector idler bucket | point x=<len> | polarized angle=<angle>
///                 | point+polarized x=<len> angle=<angle> | lobe side=upper|lower
///   run orthodox|pilotwave coincidence|singles|correlation [seed=<int>]
///       [n=<int>] [bins=<int>] [paths=<int>]          (last three: pilotwave only)
///   grid [source_n=<int>] [stack_n=<int>] [planes=<int>]
///
/// Lengths take nm, um, mm or m; angles deg or rad. Units are mandatory.
BenchSpec parse(std::string_view text);

}  // namespace eraser::bench
