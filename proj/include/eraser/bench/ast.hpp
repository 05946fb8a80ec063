#pragma once

// Parsed form of a .bench scene. Records only what the text says; defaults
// are filled in by the compiler.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace eraser::bench {

enum class Dimension { length, angle };

/// A dimensioned literal as written: 250um keeps value 250 and unit "um".
struct Quantity {
    double value = 0.0;
    std::string unit;

    Dimension dimension() const;
    /// meters or radians
    double si() const;

    friend bool operator==(const Quantity&, const Quantity&) = default;
};

struct Range {
    Quantity lo;
    Quantity hi;

    friend bool operator==(const Range&, const Range&) = default;
};

using Value = std::variant<Quantity, Range, std::uint64_t, std::string>;

struct Arg {
    std::string key;
    Value value;
    std::size_t line = 0;
    std::size_t column = 0;

    friend bool operator==(const Arg& a, const Arg& b) { return a.key == b.key && a.value == b.value; }
};

/// One statement: `<keyword> <word>... key=value...`.
struct Decl {
    std::string keyword;             // source, element, detector, run, grid
    std::vector<std::string> words;  // positional words after the keyword
    std::vector<Arg> args;
    std::size_t line = 0;

    const Arg* find(const std::string& key) const;
    const std::string& word(std::size_t i) const;

    friend bool operator==(const Decl& a, const Decl& b) {
        return a.keyword == b.keyword && a.words == b.words && a.args == b.args;
    }
};

struct BenchSpec {
    Decl source;
    std::vector<Decl> elements;
    std::vector<Decl> detectors;
    std::vector<Decl> runs;
    std::optional<Decl> grid;

    friend bool operator==(const BenchSpec&, const BenchSpec&) = default;
};

}  // namespace eraser::bench
