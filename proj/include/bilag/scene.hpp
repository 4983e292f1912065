#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bilag/bilag.hpp"
#include "bilag/fields.hpp"
#include "bilag/torus.hpp"

namespace bilag {

// Forward/inverse pair declared together in a scene; the inverse is supplied
// by the author and verified by consumers, never computed.
struct MapPair {
    Map forward, inverse;
};

// Parsed scene file: the textual input of the command-line tool. One file
// declares charts, named expressions, vector fields, foliations, two-forms,
// structures, maps, torus fields, circle diffeomorphisms, circle maps, and
// tolerance overrides. The grammar is strict, line-oriented, and
// indentation-free; docs/scene-format.md gives the exact rules.
//
// Declaration order is preserved: commands that need "the first circle map"
// or "both circle maps" follow file order.
struct Scene {
    std::string origin; // path or label the scene was loaded from
    std::uint64_t seed = 42;
    VerifyOptions tolerances; // seed field mirrors the scene seed

    std::vector<std::pair<std::string, ChartPtr>> charts;
    std::vector<std::pair<std::string, std::string>> exprs; // substituted source
    std::vector<std::pair<std::string, VectorField>> fields;
    std::vector<std::pair<std::string, Foliation>> foliations;
    std::vector<std::pair<std::string, TwoForm>> twoforms;
    std::vector<std::pair<std::string, BiLagrangianStructure>> structures;
    std::vector<std::pair<std::string, MapPair>> maps;
    std::vector<std::pair<std::string, TorusVectorField>> torusfields;
    std::vector<std::pair<std::string, CircleDiffeo>> circlediffeos;
    std::vector<std::pair<std::string, CircleMapWithFlat>> circlemaps;

    const ChartPtr* find_chart(std::string_view name) const;
    const VectorField* find_field(std::string_view name) const;
    const Foliation* find_foliation(std::string_view name) const;
    const TwoForm* find_twoform(std::string_view name) const;
};

// Parses scene text. Grammar violations raise ParseError with the offending
// line; references to undeclared names raise BindError; objects that fail
// their construction checks (non-periodic torus fields, non-monotone circle
// diffeomorphisms, bad flat-piece parameters) raise DomainError.
Scene parse_scene(std::string_view text, std::string origin = "<memory>");

// Reads the file and parses it; missing or unreadable files raise Error.
Scene load_scene(const std::string& path);

} // namespace bilag
