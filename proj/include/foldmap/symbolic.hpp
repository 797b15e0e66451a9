#pragma once

// Symbolic core for m-modal interval maps: the ordered alphabet
// I_0 < C_1 < I_1 < ... < C_m < I_m, the twisted (sign-weighted) order on
// symbol words, kneading data and its compatibility conditions.

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "foldmap/errors.hpp"

namespace foldmap {

// ---------------------------------------------------------------------------
// Shape: the alternating sign vector (sigma_0, ..., sigma_m).
// ---------------------------------------------------------------------------
class Shape {
public:
    explicit Shape(std::vector<int> signs);
    Shape(int modality, int first_sign);          // builds the alternating vector
    static Shape from_string(std::string_view s); // "+-+" etc.

    int modality() const { return static_cast<int>(signs_.size()) - 1; } // m
    int sign(int lap) const;                                             // sigma_lap
    std::string str() const;

    bool operator==(const Shape& other) const { return signs_ == other.signs_; }

private:
    std::vector<int> signs_;
};

// ---------------------------------------------------------------------------
// Symbol: I_j (interval) or C_j (fold).  Encoded so that the numeric code
// order is exactly the alphabet order: I_j -> 2j, C_j -> 2j-1.
// ---------------------------------------------------------------------------
class Symbol {
public:
    static Symbol interval(int j);
    static Symbol fold(int j);

    bool is_fold() const { return code_ % 2 == 1; }
    int index() const { return is_fold() ? (code_ + 1) / 2 : code_ / 2; }
    int code() const { return code_; }

    auto operator<=>(const Symbol& other) const = default;

    std::string token() const;                 // "I0", "C1", ...
    static Symbol parse(std::string_view tok);

private:
    explicit Symbol(int code) : code_(code) {}
    int code_;
};

// ---------------------------------------------------------------------------
// SymbolWord: a finite word over the alphabet.
// ---------------------------------------------------------------------------
struct SymbolWord {
    std::vector<Symbol> symbols;

    SymbolWord() = default;
    explicit SymbolWord(std::vector<Symbol> syms) : symbols(std::move(syms)) {}

    std::size_t depth() const { return symbols.size(); }
    bool acritical() const;
    int max_index() const;  // largest symbol index, -1 when empty

    bool operator==(const SymbolWord& other) const { return symbols == other.symbols; }

    std::string str() const;                      // "I1.I0.C1"
    static SymbolWord parse(std::string_view s);
};

// Eventual periodicity marker: symbols at t >= preperiod repeat with the
// given period.
struct Periodicity {
    std::size_t preperiod = 0;
    std::size_t period = 1;
    bool operator==(const Periodicity&) const = default;
};

// ---------------------------------------------------------------------------
// KneadingSequence: a stored truncation, optionally extendable to any depth
// through a Periodicity flag.
// ---------------------------------------------------------------------------
class KneadingSequence {
public:
    KneadingSequence() = default;
    explicit KneadingSequence(SymbolWord word, std::optional<Periodicity> flags = std::nullopt);

    const SymbolWord& word() const { return word_; }
    const std::optional<Periodicity>& flags() const { return flags_; }

    std::size_t stored_depth() const { return word_.depth(); }
    bool decidable_to(std::size_t depth) const { return flags_.has_value() || stored_depth() >= depth; }

    Symbol at(std::size_t t) const;              // throws UndecidableError out of reach
    SymbolWord truncation(std::size_t depth) const;

    std::string str() const;                     // "pre|(per)" or plain word
    static KneadingSequence parse(std::string_view s);

    bool operator==(const KneadingSequence& other) const {
        return word_ == other.word_ && flags_ == other.flags_;
    }

private:
    SymbolWord word_;
    std::optional<Periodicity> flags_;
};

// ---------------------------------------------------------------------------
// KneadingData: shape + K_1..K_m.  The boundary sequences K_0 and K_{m+1}
// are derived from the shape (boundary anchored maps only).
// ---------------------------------------------------------------------------
class KneadingData {
public:
    KneadingData(Shape shape, std::vector<KneadingSequence> sequences);

    const Shape& shape() const { return shape_; }
    int modality() const { return shape_.modality(); }

    // 1-based like the notation K_1..K_m.
    const KneadingSequence& sequence(int i) const;

    // 0..m+1: index 0 and m+1 give the derived boundary sequences.
    const KneadingSequence& bound_sequence(int i) const;

    bool decidable_to(std::size_t depth) const;

private:
    Shape shape_;
    std::vector<KneadingSequence> seqs_;      // K_1..K_m
    KneadingSequence lower_bound_, upper_bound_;  // K_0, K_{m+1}
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------
enum class Cmp { LT, EQ, GT, Undefined };
enum class Extremal { Min, Max };

// Sign function: epsilon(I_j) = sigma_j, epsilon(C_j) = 0.
int epsilon(Symbol s, const Shape& shape);

// Product of epsilon over the whole word (periodic-orbit type classifier).
int word_sign(const SymbolWord& w, const Shape& shape);

// Twisted order on equal-depth words: compare at the first difference,
// reversed when the preceding sign product is -1; Undefined when a fold
// symbol occurs strictly before the first difference.
Cmp twisted_compare(const SymbolWord& a, const SymbolWord& b, const Shape& shape);

// Truncation of the globally smallest/largest itinerary for the shape.
SymbolWord extremal_sequence(const Shape& shape, Extremal which, std::size_t depth);

// Same content in periodic form (used as the derived boundary sequences).
KneadingSequence extremal_word(const Shape& shape, Extremal which);

// Finite-word admissibility against kneading data: Compatibility Condition 1
// on fold symbols, and the boundary-anchored two-sided Condition 2 on
// interval symbols.  Comparisons use available truncations; a tie at the
// truncation boundary satisfies the closed inequality.
bool is_admissible_word(const SymbolWord& w, const KneadingData& K);

struct AdmissibilityReport {
    bool ok = true;
    int condition = 0;        // 1, 2 or 3 when !ok
    int sequence = 0;         // which K_i (1-based); 0 when not applicable
    std::size_t position = 0; // offending index within that sequence
    std::string detail;
};

// Conditions 1, 2 (two-sided form) and 3 on the kneading data itself.
AdmissibilityReport check_kneading_admissible(const KneadingData& K);

// K(f) >> K(g): K_i(f) >= K_i(g) where sigma_i = -1 and <= where +1,
// in twisted order, for all i.
bool kneading_gg(const KneadingData& f, const KneadingData& g);

}  // namespace foldmap
