#include "bilag/scene.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <tuple>

#include "bilag/errors.hpp"
#include "bilag/expr.hpp"

namespace bilag {

namespace {

std::string trim(std::string_view s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_list(std::string_view s, char sep) {
    std::vector<std::string> out;
    size_t start = 0;
    for (size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == sep) {
            out.push_back(trim(s.substr(start, i - start)));
            start = i + 1;
        }
    }
    return out;
}

std::vector<std::string> split_words(std::string_view s) {
    std::vector<std::string> out;
    std::istringstream in{std::string(s)};
    std::string w;
    while (in >> w) out.push_back(w);
    return out;
}

bool is_identifier(std::string_view s) {
    if (s.empty()) return false;
    if (!(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
    for (char c : s)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
    return true;
}

double parse_double(const std::string& s, int line) {
    char* end = nullptr;
    const std::string t = trim(s);
    if (t.empty()) throw ParseError("expected a number, got an empty value", line, 0);
    double v = std::strtod(t.c_str(), &end);
    if (end != t.c_str() + t.size())
        throw ParseError("malformed number '" + t + "'", line, 0);
    return v;
}

std::uint64_t parse_seed(const std::string& s, int line) {
    const std::string t = trim(s);
    if (t.empty() || t.find_first_not_of("0123456789") != std::string::npos)
        throw ParseError("seed must be a nonnegative integer, got '" + t + "'", line, 0);
    return std::strtoull(t.c_str(), nullptr, 10);
}

// Names that the expression language claims for itself; scene objects may
// not shadow them, and named expressions additionally may not shadow chart
// coordinates or the torus/circle variables x, y.
const std::set<std::string>& builtin_names() {
    static const std::set<std::string> k{"sin", "cos", "tan", "exp", "log",
                                         "sqrt", "abs", "pi"};
    return k;
}

// One raw key/value line inside a section.
struct Entry {
    int line = 0;
    std::string key;   // full text left of '=', e.g. "coords" or "entry q p"
    std::string value; // text right of '=', untrimmed inside expressions
    bool used = false;
};

struct Section {
    int line = 0;      // header line
    std::string kind;  // chart, expr, vectorfield, ...
    std::vector<std::string> head; // header words after the kind
    std::vector<Entry> entries;
};

class SceneBuilder {
public:
    explicit SceneBuilder(std::string origin) { scene_.origin = std::move(origin); }

    Scene take() && { return std::move(scene_); }

    void set_seed(std::uint64_t s) {
        scene_.seed = s;
        scene_.tolerances.seed = s;
    }

    void declare(const std::string& name, int line) {
        if (!is_identifier(name))
            throw ParseError("'" + name + "' is not a valid name", line, 0);
        if (builtin_names().count(name))
            throw ParseError("name '" + name + "' shadows a builtin of the expression language",
                             line, 0);
        auto [it, fresh] = declared_.emplace(name, line);
        if (!fresh)
            throw ParseError("name '" + name + "' already declared on line " +
                                 std::to_string(it->second),
                             line, 0);
    }

    // Replaces identifiers that name earlier [expr] sections with their
    // (already substituted) definitions, parenthesized. Definitions can
    // only reference earlier definitions, so expansion terminates.
    std::string substitute(const std::string& src) const {
        std::string out;
        out.reserve(src.size());
        size_t i = 0;
        while (i < src.size()) {
            char c = src[i];
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                size_t j = i;
                while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) ||
                                          src[j] == '_'))
                    ++j;
                std::string word = src.substr(i, j - i);
                const std::string* def = nullptr;
                for (const auto& [n, s] : scene_.exprs)
                    if (n == word) { def = &s; break; }
                if (def) {
                    out += '(';
                    out += *def;
                    out += ')';
                } else {
                    out += word;
                }
                i = j;
            } else {
                out += c;
                ++i;
            }
        }
        return out;
    }

    ExprPtr parse_sub(const std::string& src, int line) const {
        const std::string expanded = substitute(src);
        try {
            return parse(expanded);
        } catch (const Error& e) {
            throw ParseError("in expression '" + trim(src) + "': " + e.what(), line, 0);
        }
    }

    ChartPtr require_chart(const std::string& name, int line) const {
        if (const ChartPtr* c = scene_.find_chart(name)) return *c;
        throw BindError("chart '" + name + "' is not declared (line " + std::to_string(line) +
                        ")");
    }

    void finalize(Section& s);

private:
    void finish_chart(Section& s);
    void finish_expr(Section& s);
    void finish_vectorfield(Section& s);
    void finish_foliation(Section& s);
    void finish_twoform(Section& s);
    void finish_structure(Section& s);
    void finish_map(Section& s);
    void finish_torusfield(Section& s);
    void finish_circlediffeo(Section& s);
    void finish_circlemap(Section& s);
    void finish_tolerances(Section& s);

    Scene scene_;
    std::map<std::string, int> declared_; // name -> declaration line
    bool saw_tolerances_ = false;
};

// Returns the single entry with the given key, or null; throws on duplicates.
Entry* find_unique(Section& s, const std::string& key) {
    Entry* found = nullptr;
    for (auto& e : s.entries) {
        if (e.key == key) {
            if (found)
                throw ParseError("duplicate key '" + key + "' in [" + s.kind + "] section",
                                 e.line, 0);
            found = &e;
        }
    }
    if (found) found->used = true;
    return found;
}

const Entry& require_key(Section& s, const std::string& key) {
    if (Entry* e = find_unique(s, key)) return *e;
    throw ParseError("[" + s.kind + "] section is missing the required key '" + key + "'",
                     s.line, 0);
}

void reject_unused(const Section& s) {
    for (const auto& e : s.entries)
        if (!e.used)
            throw ParseError("unknown key '" + e.key + "' in [" + s.kind + "] section", e.line,
                             0);
}

void expect_head(const Section& s, size_t n, const std::string& shape) {
    if (s.head.size() != n)
        throw ParseError("[" + s.kind + "] header must look like [" + shape + "]", s.line, 0);
}

void expect_head_word(const Section& s, size_t idx, const std::string& word) {
    if (s.head.size() <= idx || s.head[idx] != word)
        throw ParseError("[" + s.kind + "] header is malformed: expected '" + word + "'",
                         s.line, 0);
}

void SceneBuilder::finish_chart(Section& s) {
    expect_head(s, 1, "chart NAME");
    declare(s.head[0], s.line);
    const Entry& ce = require_key(s, "coords");
    std::vector<std::string> coords = split_list(ce.value, ',');
    for (const auto& c : coords) {
        if (!is_identifier(c))
            throw ParseError("'" + c + "' is not a valid coordinate name", ce.line, 0);
        if (builtin_names().count(c))
            throw ParseError("coordinate '" + c + "' shadows a builtin of the expression language",
                             ce.line, 0);
    }
    std::vector<std::array<double, 2>> box(coords.size(), {-1.0, 1.0});
    std::set<std::string> boxed;
    for (auto& e : s.entries) {
        std::vector<std::string> kw = split_words(e.key);
        if (kw.size() == 2 && kw[0] == "box") {
            e.used = true;
            auto it = std::find(coords.begin(), coords.end(), kw[1]);
            if (it == coords.end())
                throw ParseError("box names unknown coordinate '" + kw[1] + "'", e.line, 0);
            if (!boxed.insert(kw[1]).second)
                throw ParseError("duplicate box for coordinate '" + kw[1] + "'", e.line, 0);
            std::vector<std::string> lohi = split_list(e.value, ',');
            if (lohi.size() != 2)
                throw ParseError("box needs two numbers: lo, hi", e.line, 0);
            double lo = parse_double(lohi[0], e.line), hi = parse_double(lohi[1], e.line);
            if (!(lo < hi))
                throw ParseError("box bounds must satisfy lo < hi", e.line, 0);
            box[static_cast<size_t>(it - coords.begin())] = {lo, hi};
        }
    }
    reject_unused(s);
    try {
        scene_.charts.emplace_back(s.head[0], make_chart(s.head[0], coords, box));
    } catch (const Error& e) {
        throw ParseError(std::string("invalid chart: ") + e.what(), s.line, 0);
    }
}

void SceneBuilder::finish_expr(Section& s) {
    expect_head(s, 1, "expr NAME");
    const std::string& name = s.head[0];
    declare(name, s.line);
    if (name == "x" || name == "y")
        throw ParseError("named expression '" + name +
                             "' would shadow the torus/circle variables",
                         s.line, 0);
    for (const auto& [cn, chart] : scene_.charts)
        for (const auto& c : chart->coords)
            if (c == name)
                throw ParseError("named expression '" + name + "' shadows a coordinate of chart '" +
                                     cn + "'",
                                 s.line, 0);
    const Entry& ve = require_key(s, "value");
    reject_unused(s);
    const std::string expanded = substitute(trim(ve.value));
    try {
        parse(expanded); // syntax check now; binding happens at use sites
    } catch (const Error& e) {
        throw ParseError("in expression '" + trim(ve.value) + "': " + e.what(), ve.line, 0);
    }
    scene_.exprs.emplace_back(name, expanded);
}

void SceneBuilder::finish_vectorfield(Section& s) {
    expect_head(s, 3, "vectorfield NAME on CHART");
    expect_head_word(s, 1, "on");
    declare(s.head[0], s.line);
    ChartPtr chart = require_chart(s.head[2], s.line);
    const Entry& ce = require_key(s, "components");
    reject_unused(s);
    std::vector<std::string> parts = split_list(ce.value, ',');
    if (static_cast<int>(parts.size()) != chart->dim())
        throw ParseError("vector field needs " + std::to_string(chart->dim()) +
                             " components for chart '" + chart->name + "', got " +
                             std::to_string(parts.size()),
                         ce.line, 0);
    std::vector<ExprPtr> comps;
    for (const auto& p : parts) comps.push_back(parse_sub(p, ce.line));
    scene_.fields.emplace_back(s.head[0], VectorField::from_exprs(chart, std::move(comps)));
}

void SceneBuilder::finish_foliation(Section& s) {
    expect_head(s, 3, "foliation NAME on CHART");
    expect_head_word(s, 1, "on");
    declare(s.head[0], s.line);
    ChartPtr chart = require_chart(s.head[2], s.line);
    const Entry& fe = require_key(s, "frame");
    reject_unused(s);
    std::vector<VectorField> frame;
    for (const auto& n : split_list(fe.value, ',')) {
        const VectorField* vf = scene_.find_field(n);
        if (!vf)
            throw BindError("frame references undeclared vector field '" + n + "' (line " +
                            std::to_string(fe.line) + ")");
        if (vf->chart().get() != chart.get())
            throw BindError("vector field '" + n + "' lives on chart '" + vf->chart()->name +
                            "', not '" + chart->name + "' (line " + std::to_string(fe.line) +
                            ")");
        frame.push_back(*vf);
    }
    scene_.foliations.emplace_back(s.head[0],
                                   make_foliation(chart, s.head[0], std::move(frame)));
}

void SceneBuilder::finish_twoform(Section& s) {
    expect_head(s, 3, "twoform NAME on CHART");
    expect_head_word(s, 1, "on");
    declare(s.head[0], s.line);
    ChartPtr chart = require_chart(s.head[2], s.line);
    std::vector<std::tuple<int, int, ExprPtr>> upper;
    std::set<std::pair<int, int>> seen;
    for (auto& e : s.entries) {
        std::vector<std::string> kw = split_words(e.key);
        if (kw.size() == 3 && kw[0] == "entry") {
            e.used = true;
            int i = chart->coord_index(kw[1]);
            int j = chart->coord_index(kw[2]);
            if (i < 0 || j < 0)
                throw ParseError("entry names a coordinate missing from chart '" + chart->name +
                                     "'",
                                 e.line, 0);
            if (i >= j)
                throw ParseError("two-form entries must name coordinates in chart order "
                                 "(strictly increasing)",
                                 e.line, 0);
            if (!seen.emplace(i, j).second)
                throw ParseError("duplicate two-form entry " + kw[1] + " " + kw[2], e.line, 0);
            upper.emplace_back(i, j, parse_sub(e.value, e.line));
        }
    }
    reject_unused(s);
    if (upper.empty())
        throw ParseError("[twoform] section needs at least one 'entry ci cj = expr' line",
                         s.line, 0);
    scene_.twoforms.emplace_back(s.head[0], TwoForm::from_entries(chart, std::move(upper)));
}

void SceneBuilder::finish_structure(Section& s) {
    expect_head(s, 3, "structure NAME on CHART");
    expect_head_word(s, 1, "on");
    declare(s.head[0], s.line);
    ChartPtr chart = require_chart(s.head[2], s.line);
    const Entry& oe = require_key(s, "omega");
    const Entry& f1e = require_key(s, "f1");
    const Entry& f2e = require_key(s, "f2");
    reject_unused(s);
    const TwoForm* w = scene_.find_twoform(trim(oe.value));
    if (!w)
        throw BindError("structure references undeclared two-form '" + trim(oe.value) +
                        "' (line " + std::to_string(oe.line) + ")");
    auto pick = [&](const Entry& e) -> const Foliation* {
        const Foliation* f = scene_.find_foliation(trim(e.value));
        if (!f)
            throw BindError("structure references undeclared foliation '" + trim(e.value) +
                            "' (line " + std::to_string(e.line) + ")");
        return f;
    };
    const Foliation* f1 = pick(f1e);
    const Foliation* f2 = pick(f2e);
    for (const ChartPtr& c : {w->chart(), f1->chart, f2->chart})
        if (c.get() != chart.get())
            throw BindError("structure '" + s.head[0] +
                            "' mixes objects from different charts (line " +
                            std::to_string(s.line) + ")");
    scene_.structures.emplace_back(
        s.head[0], BiLagrangianStructure{chart, s.head[0], *w, *f1, *f2});
}

void SceneBuilder::finish_map(Section& s) {
    expect_head(s, 5, "map NAME from CHART to CHART");
    expect_head_word(s, 1, "from");
    expect_head_word(s, 3, "to");
    declare(s.head[0], s.line);
    ChartPtr src = require_chart(s.head[2], s.line);
    ChartPtr dst = require_chart(s.head[4], s.line);
    const Entry& fe = require_key(s, "forward");
    const Entry& ie = require_key(s, "inverse");
    reject_unused(s);
    auto build = [&](const Entry& e, const ChartPtr& from, const ChartPtr& to) {
        std::vector<std::string> parts = split_list(e.value, ',');
        if (static_cast<int>(parts.size()) != to->dim())
            throw ParseError("map components: need " + std::to_string(to->dim()) +
                                 " expressions for chart '" + to->name + "', got " +
                                 std::to_string(parts.size()),
                             e.line, 0);
        std::vector<ExprPtr> comps;
        for (const auto& p : parts) comps.push_back(parse_sub(p, e.line));
        return Map(from, to, std::move(comps));
    };
    scene_.maps.emplace_back(s.head[0],
                             MapPair{build(fe, src, dst), build(ie, dst, src)});
}

void SceneBuilder::finish_torusfield(Section& s) {
    expect_head(s, 1, "torusfield NAME");
    declare(s.head[0], s.line);
    const Entry& xe = require_key(s, "x");
    const Entry& ye = require_key(s, "y");
    reject_unused(s);
    scene_.torusfields.emplace_back(
        s.head[0],
        TorusVectorField::from_exprs(parse_sub(xe.value, xe.line), parse_sub(ye.value, ye.line)));
}

void SceneBuilder::finish_circlediffeo(Section& s) {
    expect_head(s, 1, "circlediffeo NAME");
    declare(s.head[0], s.line);
    const Entry& ee = require_key(s, "expr");
    reject_unused(s);
    scene_.circlediffeos.emplace_back(s.head[0], CircleDiffeo(parse_sub(ee.value, ee.line)));
}

void SceneBuilder::finish_circlemap(Section& s) {
    expect_head(s, 1, "circlemap NAME");
    declare(s.head[0], s.line);
    const Entry& ke = require_key(s, "kind");
    const std::string kind = trim(ke.value);
    if (kind == "synthetic") {
        const Entry& fe = require_key(s, "flat");
        const Entry& ve = require_key(s, "value");
        const Entry& ze = require_key(s, "zeta");
        const Entry& ee = require_key(s, "exponents");
        reject_unused(s);
        std::vector<std::string> ab = split_list(fe.value, ',');
        if (ab.size() != 2) throw ParseError("flat needs two numbers: a, b", fe.line, 0);
        std::vector<std::string> lr = split_list(ee.value, ',');
        if (lr.size() != 2)
            throw ParseError("exponents needs two numbers: left, right", ee.line, 0);
        scene_.circlemaps.emplace_back(
            s.head[0],
            synthetic_flat_map(parse_double(ab[0], fe.line), parse_double(ab[1], fe.line),
                               parse_double(ve.value, ve.line), parse_double(ze.value, ze.line),
                               parse_double(lr[0], ee.line), parse_double(lr[1], ee.line)));
    } else if (kind == "rotation") {
        const Entry& ae = require_key(s, "alpha");
        reject_unused(s);
        scene_.circlemaps.emplace_back(s.head[0],
                                       rigid_rotation(parse_double(ae.value, ae.line)));
    } else {
        throw ParseError("circlemap kind must be 'synthetic' or 'rotation', got '" + kind + "'",
                         ke.line, 0);
    }
}

void SceneBuilder::finish_tolerances(Section& s) {
    expect_head(s, 0, "tolerances");
    if (saw_tolerances_)
        throw ParseError("only one [tolerances] section is allowed", s.line, 0);
    saw_tolerances_ = true;
    VerifyOptions& t = scene_.tolerances;
    const std::map<std::string, double*> slots = {
        {"closed", &t.tol_closed},           {"det", &t.tol_det},
        {"lagrangian", &t.tol_lagrangian},   {"transversal", &t.tol_transversal},
        {"involutive", &t.tol_involutive},   {"hess", &t.tol_hess},
        {"affine", &t.tol_affine},           {"parakahler", &t.tol_parakahler},
        {"inverse", &t.tol_inverse},
    };
    for (auto& e : s.entries) {
        auto it = slots.find(e.key);
        if (it == slots.end())
            throw ParseError("unknown tolerance '" + e.key + "'", e.line, 0);
        e.used = true;
        double v = parse_double(e.value, e.line);
        if (!(v > 0)) throw ParseError("tolerances must be positive", e.line, 0);
        *it->second = v;
    }
    reject_unused(s);
}

void SceneBuilder::finalize(Section& s) {
    if (s.kind == "chart") finish_chart(s);
    else if (s.kind == "expr") finish_expr(s);
    else if (s.kind == "vectorfield") finish_vectorfield(s);
    else if (s.kind == "foliation") finish_foliation(s);
    else if (s.kind == "twoform") finish_twoform(s);
    else if (s.kind == "structure") finish_structure(s);
    else if (s.kind == "map") finish_map(s);
    else if (s.kind == "torusfield") finish_torusfield(s);
    else if (s.kind == "circlediffeo") finish_circlediffeo(s);
    else if (s.kind == "circlemap") finish_circlemap(s);
    else if (s.kind == "tolerances") finish_tolerances(s);
    else
        throw ParseError("unknown section kind '" + s.kind + "'", s.line, 0);
}

} // namespace

const ChartPtr* Scene::find_chart(std::string_view name) const {
    for (const auto& [n, c] : charts)
        if (n == name) return &c;
    return nullptr;
}

const VectorField* Scene::find_field(std::string_view name) const {
    for (const auto& [n, f] : fields)
        if (n == name) return &f;
    return nullptr;
}

const Foliation* Scene::find_foliation(std::string_view name) const {
    for (const auto& [n, f] : foliations)
        if (n == name) return &f;
    return nullptr;
}

const TwoForm* Scene::find_twoform(std::string_view name) const {
    for (const auto& [n, w] : twoforms)
        if (n == name) return &w;
    return nullptr;
}

Scene parse_scene(std::string_view text, std::string origin) {
    SceneBuilder builder(std::move(origin));
    std::optional<Section> current;
    bool any_section = false;

    auto flush = [&]() {
        if (current) {
            builder.finalize(*current);
            current.reset();
        }
    };

    int line_no = 0;
    size_t pos = 0;
    while (pos <= text.size()) {
        size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        std::string line = trim(text.substr(pos, eol - pos));
        pos = eol + 1;
        ++line_no;
        if (line.empty() || line[0] == '#') {
            if (pos > text.size()) break;
            continue;
        }

        if (line.front() == '[') {
            if (line.back() != ']')
                throw ParseError("section header must end with ']'", line_no, 0);
            flush();
            std::vector<std::string> words = split_words(line.substr(1, line.size() - 2));
            if (words.empty())
                throw ParseError("empty section header", line_no, 0);
            Section s;
            s.line = line_no;
            s.kind = words[0];
            s.head.assign(words.begin() + 1, words.end());
            current = std::move(s);
            any_section = true;
        } else {
            size_t eq = line.find('=');
            if (eq == std::string::npos)
                throw ParseError("expected 'key = value' or a [section] header", line_no, 0);
            Entry e;
            e.line = line_no;
            e.key = trim(line.substr(0, eq));
            e.value = trim(line.substr(eq + 1));
            if (e.key.empty())
                throw ParseError("missing key before '='", line_no, 0);
            if (!current) {
                if (e.key == "seed") {
                    if (any_section)
                        throw ParseError("seed must come before the first section", line_no, 0);
                    builder.set_seed(parse_seed(e.value, line_no));
                } else {
                    throw ParseError("key '" + e.key + "' outside any section (only 'seed' may "
                                     "appear at the top level)",
                                     line_no, 0);
                }
            } else {
                current->entries.push_back(std::move(e));
            }
        }
        if (pos > text.size()) break;
    }
    flush();
    return std::move(builder).take();
}

Scene load_scene(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open scene file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scene(buf.str(), path);
}

} // namespace bilag
