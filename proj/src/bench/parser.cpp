#include "eraser/bench/parser.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <numbers>
#include <set>

namespace eraser::bench {

Dimension Quantity::dimension() const {
    return unit == "deg" || unit == "rad" ? Dimension::angle : Dimension::length;
}

double Quantity::si() const {
    if (unit == "nm") return value * 1e-9;
    if (unit == "um") return value * 1e-6;
    if (unit == "mm") return value * 1e-3;
    if (unit == "m") return value;
    if (unit == "deg") return value * std::numbers::pi / 180.0;
    if (unit == "rad") return value;
    throw std::invalid_argument("unknown unit '" + unit + "'");
}

const Arg* Decl::find(const std::string& key) const {
    for (const auto& a : args) {
        if (a.key == key) return &a;
    }
    return nullptr;
}

const std::string& Decl::word(std::size_t i) const {
    static const std::string empty;
    return i < words.size() ? words[i] : empty;
}

ParseError::ParseError(std::size_t line, std::size_t column, std::string message, std::string token)
    : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + message +
                         (token.empty() ? "" : " ('" + token + "')")),
      line_(line),
      column_(column),
      message_(std::move(message)),
      token_(std::move(token)) {}

namespace {

enum class Kind { length, signed_length, nonneg_length, angle, range, integer, word };

struct KeySpec {
    Kind kind;
    bool required = false;
    std::vector<std::string> words{};  // Kind::word choices
    std::uint64_t min = 0;             // Kind::integer
};

using Schema = std::map<std::string, KeySpec>;

struct Token {
    std::string text;
    std::size_t column;
};

const std::set<std::string> kLengthUnits{"nm", "um", "mm", "m"};
const std::set<std::string> kAngleUnits{"deg", "rad"};

std::vector<Token> tokenize(std::string_view line) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        if (i >= line.size() || line[i] == '#') break;
        const std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r' &&
               line[i] != '#') {
            ++i;
        }
        out.push_back({std::string(line.substr(start, i - start)), start + 1});
    }
    return out;
}

bool is_identifier(const std::string& s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' || c == '+';
    });
}

// Splits "250um" into the number and its unit suffix.
Quantity read_quantity(const std::string& text, std::size_t line, std::size_t column,
                       const std::set<std::string>& units) {
    const char* begin = text.data();
    const char* end = text.data() + text.size();
    if (begin != end && *begin == '+') ++begin;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc{} || ptr == begin) {
        throw ParseError(line, column, "expected a number", text);
    }
    if (!std::isfinite(v)) throw ParseError(line, column, "value must be finite", text);
    std::string unit(ptr, end);
    if (unit.empty()) {
        throw ParseError(line, column, "missing unit", text);
    }
    if (!units.contains(unit)) {
        const std::string expect = units.contains("deg") ? "deg or rad" : "nm, um, mm or m";
        throw ParseError(line, column + static_cast<std::size_t>(ptr - text.data()),
                         "unit must be " + expect, unit);
    }
    return {v, unit};
}

Value read_value(const KeySpec& spec, const std::string& text, std::size_t line,
                 std::size_t column) {
    switch (spec.kind) {
        case Kind::length:
        case Kind::signed_length:
        case Kind::nonneg_length: {
            Quantity q = read_quantity(text, line, column, kLengthUnits);
            if (spec.kind == Kind::length && !(q.value > 0.0)) {
                throw ParseError(line, column, "length must be > 0", text);
            }
            if (spec.kind == Kind::nonneg_length && q.value < 0.0) {
                throw ParseError(line, column, "length must be >= 0", text);
            }
            return q;
        }
        case Kind::angle:
            return read_quantity(text, line, column, kAngleUnits);
        case Kind::range: {
            const auto dots = text.find("..");
            if (dots == std::string::npos) {
                throw ParseError(line, column, "expected a range lo..hi", text);
            }
            Range r{read_quantity(text.substr(0, dots), line, column, kLengthUnits),
                    read_quantity(text.substr(dots + 2), line, column + dots + 2, kLengthUnits)};
            if (!(r.lo.si() < r.hi.si())) throw ParseError(line, column, "range needs lo < hi", text);
            return r;
        }
        case Kind::integer: {
            std::uint64_t v = 0;
            auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
            if (ec != std::errc{} || ptr != text.data() + text.size()) {
                throw ParseError(line, column, "expected a non-negative integer", text);
            }
            if (v < spec.min) {
                throw ParseError(line, column, "value must be at least " + std::to_string(spec.min),
                                 text);
            }
            return v;
        }
        case Kind::word:
            if (std::find(spec.words.begin(), spec.words.end(), text) == spec.words.end()) {
                std::string choices;
                for (const auto& w : spec.words) choices += (choices.empty() ? "" : "|") + w;
                throw ParseError(line, column, "expected one of " + choices, text);
            }
            return text;
    }
    return text;
}

const KeySpec kLength{Kind::length, true};
const KeySpec kAngleReq{Kind::angle, true};
const KeySpec kCenter{Kind::signed_length};

// Schema for a statement given its positional words; empty optional means
// the word combination is invalid (reported by the caller).
std::optional<Schema> schema_for(const std::string& keyword, const std::vector<std::string>& w) {
    if (keyword == "source") {
        if (w.size() != 1) return std::nullopt;
        Schema s{{"waist", {Kind::length}}, {"wavelength", {Kind::length}}};
        if (w[0] == "custom") {
            s["mode"] = {Kind::word, true, {"hg0", "hg1"}};
            return s;
        }
        if (w[0] == "walborn" || w[0] == "menzel") return s;
        return std::nullopt;
    }
    if (keyword == "element") {
        if (w.size() != 1) return std::nullopt;
        if (w[0] == "double_slit") {
            return Schema{{"width", kLength},
                          {"separation", kLength},
                          {"open", {Kind::word, false, {"both", "upper", "lower"}}},
                          {"center", kCenter}};
        }
        if (w[0] == "single_slit") return Schema{{"width", kLength}, {"center", kCenter}};
        if (w[0] == "qwp") {
            return Schema{{"slit", {Kind::word, true, {"upper", "lower"}}}, {"angle", kAngleReq}};
        }
        if (w[0] == "polarizer") {
            return Schema{{"arm", {Kind::word, true, {"signal", "idler"}}}, {"angle", kAngleReq}};
        }
        if (w[0] == "propagate") {
            return Schema{{"arm", {Kind::word, true, {"signal", "idler"}}}, {"distance", kLength}};
        }
        return std::nullopt;
    }
    if (keyword == "detector") {
        if (w.size() == 1 && w[0] == "signal") {
            return Schema{{"scan", {Kind::range, true}},
                          {"steps", {Kind::integer, true, {}, 2}},
                          {"at", {Kind::nonneg_length, true}},
                          {"propagator", {Kind::word, false, {"fresnel", "fraunhofer"}}}};
        }
        if (w.size() == 2 && w[0] == "idler") {
            const KeySpec x{Kind::signed_length, true};
            if (w[1] == "bucket") return Schema{};
            if (w[1] == "point") return Schema{{"x", x}};
            if (w[1] == "polarized") return Schema{{"angle", kAngleReq}};
            if (w[1] == "point+polarized") return Schema{{"x", x}, {"angle", kAngleReq}};
            if (w[1] == "lobe") return Schema{{"side", {Kind::word, true, {"upper", "lower"}}}};
        }
        return std::nullopt;
    }
    if (keyword == "run") {
        if (w.size() != 2) return std::nullopt;
        if (w[0] != "orthodox" && w[0] != "pilotwave") return std::nullopt;
        if (w[1] != "coincidence" && w[1] != "singles" && w[1] != "correlation") return std::nullopt;
        Schema s{{"seed", {Kind::integer}}};
        if (w[0] == "pilotwave") {
            s["n"] = {Kind::integer, false, {}, 1};
            s["bins"] = {Kind::integer, false, {}, 1};
            s["paths"] = {Kind::integer};
        }
        return s;
    }
    if (keyword == "grid") {
        if (!w.empty()) return std::nullopt;
        return Schema{{"source_n", {Kind::integer, false, {}, 16}},
                      {"stack_n", {Kind::integer, false, {}, 16}},
                      {"planes", {Kind::integer, false, {}, 16}}};
    }
    return std::nullopt;
}

std::string usage_for(const std::string& keyword) {
    if (keyword == "source") return "expected 'source walborn|menzel|custom'";
    if (keyword == "element") {
        return "expected 'element double_slit|single_slit|qwp|polarizer|propagate'";
    }
    if (keyword == "detector") {
        return "expected 'detector signal' or 'detector idler "
               "bucket|point|polarized|point+polarized|lobe'";
    }
    if (keyword == "run") {
        return "expected 'run orthodox|pilotwave coincidence|singles|correlation'";
    }
    return "'grid' takes only key=value settings";
}

Decl parse_statement(const std::vector<Token>& toks, std::size_t line) {
    Decl d;
    d.line = line;
    d.keyword = toks[0].text;
    static const std::set<std::string> keywords{"source", "element", "detector", "run", "grid"};
    if (!keywords.contains(d.keyword)) {
        throw ParseError(line, toks[0].column, "unknown statement", d.keyword);
    }
    std::size_t i = 1;
    for (; i < toks.size() && toks[i].text.find('=') == std::string::npos; ++i) {
        if (!is_identifier(toks[i].text)) {
            throw ParseError(line, toks[i].column, "unexpected token", toks[i].text);
        }
        d.words.push_back(toks[i].text);
    }
    const auto schema = schema_for(d.keyword, d.words);
    if (!schema) {
        const std::size_t col = toks[i - 1].column;
        const std::string tok = d.words.empty() ? d.keyword : d.words.back();
        throw ParseError(line, col, usage_for(d.keyword), tok);
    }
    for (; i < toks.size(); ++i) {
        const auto& t = toks[i];
        const auto eq = t.text.find('=');
        if (eq == std::string::npos) {
            throw ParseError(line, t.column, "positional word after key=value", t.text);
        }
        const std::string key = t.text.substr(0, eq);
        const std::string text = t.text.substr(eq + 1);
        const auto it = schema->find(key);
        if (it == schema->end()) throw ParseError(line, t.column, "unknown key", key);
        if (d.find(key)) throw ParseError(line, t.column, "duplicate key", key);
        if (text.empty()) throw ParseError(line, t.column + eq + 1, "missing value", key);
        d.args.push_back({key, read_value(it->second, text, line, t.column + eq + 1), line,
                          t.column});
    }
    for (const auto& [key, spec] : *schema) {
        if (spec.required && !d.find(key)) {
            throw ParseError(line, toks[0].column, "missing required key '" + key + "'", d.keyword);
        }
    }
    return d;
}

double si_of(const Decl& d, const std::string& key, double fallback) {
    const Arg* a = d.find(key);
    return a ? std::get<Quantity>(a->value).si() : fallback;
}

std::string word_of(const Decl& d, const std::string& key, std::string fallback) {
    const Arg* a = d.find(key);
    return a ? std::get<std::string>(a->value) : fallback;
}

void check_semantics(const BenchSpec& s, std::size_t last_line) {
    if (s.runs.empty()) throw ParseError(last_line, 1, "missing run", "");
    const Decl* signal = nullptr;
    for (const auto& d : s.detectors) {
        if (d.word(0) == "signal") signal = &d;
    }
    if (!signal) throw ParseError(last_line, 1, "missing signal detector", "");

    // Walk the signal arm's planes in order.
    double plane = 0.0;
    const Decl* slit = nullptr;
    double slit_plane = 0.0;
    for (const auto& e : s.elements) {
        const std::string& kind = e.word(0);
        const bool signal_arm = word_of(e, "arm", "signal") == "signal";
        if (kind == "propagate" && signal_arm) {
            plane += si_of(e, "distance", 0.0);
        } else if (kind == "double_slit" || kind == "single_slit") {
            if (slit) throw ParseError(e.line, 1, "only one slit element per scene", kind);
            slit = &e;
            slit_plane = plane;
        } else if (kind == "qwp") {
            if (!slit || slit->word(0) != "double_slit" || slit_plane != plane) {
                throw ParseError(e.line, 1, "qwp needs a double_slit earlier at the same plane", kind);
            }
            const std::string which = word_of(e, "slit", "upper");
            const std::string open = word_of(*slit, "open", "both");
            if (open != "both" && open != which) {
                throw ParseError(e.line, 1, "qwp sits on a closed slit", which);
            }
        }
    }
    if (signal->find("at") && std::get<Quantity>(signal->find("at")->value).si() < plane) {
        throw ParseError(signal->line, 1, "detector plane precedes elements", "at");
    }
    for (const auto& r : s.runs) {
        if (r.word(1) == "correlation" && !slit) {
            throw ParseError(r.line, 1, "correlation runs need a slit element", r.word(1));
        }
    }
}

}  // namespace

BenchSpec parse(std::string_view text) {
    BenchSpec spec;
    bool have_source = false;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t nl = text.find('\n', start);
        const std::string_view line =
            text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
        ++line_no;
        const auto toks = tokenize(line);
        if (!toks.empty()) {
            Decl d = parse_statement(toks, line_no);
            if (d.keyword == "source") {
                if (have_source) throw ParseError(line_no, toks[0].column, "duplicate source", "source");
                spec.source = std::move(d);
                have_source = true;
            } else if (d.keyword == "element") {
                spec.elements.push_back(std::move(d));
            } else if (d.keyword == "detector") {
                for (const auto& prev : spec.detectors) {
                    if (prev.word(0) == d.word(0)) {
                        throw ParseError(line_no, toks[0].column, "duplicate " + d.word(0) + " detector",
                                         d.word(0));
                    }
                }
                spec.detectors.push_back(std::move(d));
            } else if (d.keyword == "run") {
                spec.runs.push_back(std::move(d));
            } else {
                if (spec.grid) throw ParseError(line_no, toks[0].column, "duplicate grid", "grid");
                spec.grid = std::move(d);
            }
        }
        if (nl == std::string_view::npos) break;
        start = nl + 1;
    }
    if (!have_source) throw ParseError(1, 1, "missing source", "");
    check_semantics(spec, line_no);
    return spec;
}

}  // namespace eraser::bench
