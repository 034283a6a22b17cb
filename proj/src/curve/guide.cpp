#include "hd/curve/guide.hpp"

#include "hd/error.hpp"

#include <array>

namespace hd::curve {

namespace {

constexpr std::array<Symbol, 11> kRuleA = {
    Symbol::turn_left, Symbol::var_b,   Symbol::forward,    Symbol::turn_right,
    Symbol::var_a,     Symbol::forward, Symbol::var_a,      Symbol::turn_right,
    Symbol::forward,   Symbol::var_b,   Symbol::turn_left,
};

constexpr std::array<Symbol, 11> kRuleB = {
    Symbol::turn_right, Symbol::var_a,   Symbol::forward,   Symbol::turn_left,
    Symbol::var_b,      Symbol::forward, Symbol::var_b,     Symbol::turn_left,
    Symbol::forward,    Symbol::var_a,   Symbol::turn_right,
};

constexpr std::string_view kLeftGlyph = "\xE2\x8A\x95";    // ⊕
constexpr std::string_view kRightGlyph = "\xE2\x8A\x96";   // ⊖
constexpr std::string_view kForwardGlyph = "\xE2\x96\xB7"; // ▷

void expand(Symbol var, int level, std::vector<Token>& out) {
    if (level == 0) {
        return;
    }
    for (Symbol s : production(var)) {
        switch (s) {
        case Symbol::var_a:
        case Symbol::var_b:
            expand(s, level - 1, out);
            break;
        case Symbol::forward:
            out.push_back(Token::forward());
            break;
        case Symbol::turn_left:
            out.push_back(Token::left());
            break;
        case Symbol::turn_right:
            out.push_back(Token::right());
            break;
        }
    }
}

bool opposing(const Token& a, const Token& b) {
    return (a.kind == Token::Kind::turn_left && b.kind == Token::Kind::turn_right) ||
           (a.kind == Token::Kind::turn_right && b.kind == Token::Kind::turn_left);
}

} // namespace

Heading turn_left(Heading h) { return static_cast<Heading>((static_cast<int>(h) + 1) % 4); }

Heading turn_right(Heading h) { return static_cast<Heading>((static_cast<int>(h) + 3) % 4); }

std::array<int, 2> step_of(Heading h) {
    switch (h) {
    case Heading::right:
        return {0, 1};
    case Heading::up:
        return {1, 0};
    case Heading::left:
        return {0, -1};
    case Heading::down:
        return {-1, 0};
    }
    return {0, 0};
}

std::span<const Symbol> production(Symbol variable) {
    require(variable == Symbol::var_a || variable == Symbol::var_b, ErrorKind::invalid_argument,
            "production rules exist only for variables A and B");
    return variable == Symbol::var_a ? std::span<const Symbol>(kRuleA) : std::span<const Symbol>(kRuleB);
}

std::uint64_t WalkGuide::unit_moves() const {
    std::uint64_t n = 0;
    for (const auto& t : tokens) {
        if (t.kind == Token::Kind::forward) {
            n += t.stride;
        }
    }
    return n;
}

std::size_t WalkGuide::forward_tokens() const {
    std::size_t n = 0;
    for (const auto& t : tokens) {
        n += t.kind == Token::Kind::forward ? 1 : 0;
    }
    return n;
}

void cancel_turns(std::vector<Token>& tokens) {
    // A stack pass reaches the same fixpoint as repeated left-to-right sweeps.
    std::vector<Token> kept;
    kept.reserve(tokens.size());
    for (const auto& t : tokens) {
        if (!kept.empty() && opposing(kept.back(), t)) {
            kept.pop_back();
        } else {
            kept.push_back(t);
        }
    }
    tokens = std::move(kept);
}

WalkGuide expand_guides(const CurveSpec& spec) {
    spec.validate();
    require(spec.n == 2, ErrorKind::unsupported_dimension,
            "L-system guides are defined for n = 2; use the transform construction for n = 3");
    WalkGuide guide;
    guide.tokens.reserve(static_cast<std::size_t>(spec.length()) * 3);
    expand(Symbol::var_a, spec.p, guide.tokens);
    cancel_turns(guide.tokens);
    return guide;
}

std::string render_guide(const WalkGuide& guide) {
    std::string s;
    for (const auto& t : guide.tokens) {
        switch (t.kind) {
        case Token::Kind::turn_left:
            s += kLeftGlyph;
            break;
        case Token::Kind::turn_right:
            s += kRightGlyph;
            break;
        case Token::Kind::forward:
            for (std::uint32_t k = 0; k < t.stride; ++k) {
                s += kForwardGlyph;
            }
            break;
        }
    }
    return s;
}

std::string render_guide_ascii(const WalkGuide& guide) {
    std::string s;
    for (const auto& t : guide.tokens) {
        switch (t.kind) {
        case Token::Kind::turn_left:
            s += '+';
            break;
        case Token::Kind::turn_right:
            s += '-';
            break;
        case Token::Kind::forward:
            s.append(t.stride, 'F');
            break;
        }
    }
    return s;
}

WalkGuide parse_guide(std::string_view text) {
    WalkGuide g;
    std::size_t i = 0;
    while (i < text.size()) {
        const auto rest = text.substr(i);
        if (rest.starts_with(kLeftGlyph)) {
            g.tokens.push_back(Token::left());
            i += kLeftGlyph.size();
        } else if (rest.starts_with(kRightGlyph)) {
            g.tokens.push_back(Token::right());
            i += kRightGlyph.size();
        } else if (rest.starts_with(kForwardGlyph)) {
            g.tokens.push_back(Token::forward());
            i += kForwardGlyph.size();
        } else if (text[i] == '+') {
            g.tokens.push_back(Token::left());
            ++i;
        } else if (text[i] == '-') {
            g.tokens.push_back(Token::right());
            ++i;
        } else if (text[i] == 'F') {
            g.tokens.push_back(Token::forward());
            ++i;
        } else if (text[i] == ' ') {
            ++i;
        } else {
            fail(ErrorKind::format, "unrecognised guide symbol at byte " + std::to_string(i));
        }
    }
    return g;
}

std::vector<LatticePoint> walk_guide(const WalkGuide& guide, std::uint32_t side) {
    std::vector<LatticePoint> cells;
    cells.reserve(static_cast<std::size_t>(guide.unit_moves()) + 1);
    std::int64_t i = 0;
    std::int64_t j = 0;
    Heading h = guide.initial_heading;
    cells.push_back(LatticePoint{});
    for (const auto& t : guide.tokens) {
        if (t.kind == Token::Kind::turn_left) {
            h = turn_left(h);
        } else if (t.kind == Token::Kind::turn_right) {
            h = turn_right(h);
        } else {
            const auto d = step_of(h);
            for (std::uint32_t k = 0; k < t.stride; ++k) {
                i += d[0];
                j += d[1];
                require(i >= 0 && j >= 0 && i < side && j < side, ErrorKind::out_of_bounds,
                        "walk left the lattice");
                LatticePoint pt;
                pt[0] = static_cast<std::uint32_t>(i);
                pt[1] = static_cast<std::uint32_t>(j);
                cells.push_back(pt);
            }
        }
    }
    return cells;
}

} // namespace hd::curve
