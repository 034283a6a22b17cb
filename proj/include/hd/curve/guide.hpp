#pragma once

#include "hd/curve/types.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hd::curve {

/// One walking instruction. A Forward with stride m executes m unit moves.
struct Token {
    enum class Kind : std::uint8_t { forward, turn_left, turn_right };

    Kind kind = Kind::forward;
    std::uint32_t stride = 1;

    static Token forward(std::uint32_t stride = 1) { return {Kind::forward, stride}; }
    static Token left() { return {Kind::turn_left, 0}; }
    static Token right() { return {Kind::turn_right, 0}; }

    friend bool operator==(const Token&, const Token&) = default;
};

/// 2D headings in counter-clockwise order. "up" increments i, "right"
/// increments j.
enum class Heading : std::uint8_t { right = 0, up = 1, left = 2, down = 3 };

Heading turn_left(Heading h);
Heading turn_right(Heading h);
/// (di, dj) unit step for a heading.
std::array<int, 2> step_of(Heading h);

struct WalkGuide {
    std::vector<Token> tokens;
    Heading initial_heading = Heading::right;

    /// Sum of Forward strides, i.e. the number of unit moves.
    std::uint64_t unit_moves() const;
    std::size_t forward_tokens() const;

    friend bool operator==(const WalkGuide&, const WalkGuide&) = default;
};

/// Alphabet of the Hilbert L-system: variables A and B plus the constants.
enum class Symbol : std::uint8_t { var_a, var_b, forward, turn_left, turn_right };

/// Right-hand side of the production rule for a variable:
///   A -> + B F - A F A - F B +
///   B -> - A F + B F B + F A -
std::span<const Symbol> production(Symbol variable);

/// Removes adjacent TurnLeft/TurnRight pairs until none remain.
void cancel_turns(std::vector<Token>& tokens);

/// Expands axiom A with the two Hilbert production rules p times (n = 2 only),
/// drops the variables and cancels opposing turns.
WalkGuide expand_guides(const CurveSpec& spec);

/// Renders with the glyphs ⊕ (left), ⊖ (right) and ▷ (one per unit move).
std::string render_guide(const WalkGuide& guide);
/// ASCII rendering: '+' left, '-' right, 'F' per unit move.
std::string render_guide_ascii(const WalkGuide& guide);
/// Parses either rendering back into tokens; each glyph becomes a stride-1 move.
WalkGuide parse_guide(std::string_view text);

/// Executes the guide from (0,0) and returns every visited cell, one per unit
/// move plus the start. Throws out_of_bounds if the walk leaves [0, side)^2.
std::vector<LatticePoint> walk_guide(const WalkGuide& guide, std::uint32_t side);

} // namespace hd::curve
