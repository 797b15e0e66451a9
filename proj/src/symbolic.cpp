#include "foldmap/symbolic.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>
#include <sstream>

namespace foldmap {

// ---------------------------------------------------------------------------
// Shape
// ---------------------------------------------------------------------------
Shape::Shape(std::vector<int> signs) : signs_(std::move(signs)) {
    if (signs_.size() < 2)
        throw ConstraintError("shape needs at least two signs (m >= 1)");
    for (std::size_t j = 0; j < signs_.size(); ++j) {
        if (signs_[j] != 1 && signs_[j] != -1)
            throw ConstraintError("shape signs must be +1 or -1");
        if (j > 0 && signs_[j] == signs_[j - 1])
            throw ConstraintError("shape signs must strictly alternate");
    }
}

Shape::Shape(int modality, int first_sign) : signs_() {
    if (modality < 1) throw ConstraintError("modality must be >= 1");
    if (first_sign != 1 && first_sign != -1) throw ConstraintError("first sign must be +-1");
    std::vector<int> s(static_cast<std::size_t>(modality) + 1);
    for (int j = 0; j <= modality; ++j) s[j] = (j % 2 == 0) ? first_sign : -first_sign;
    *this = Shape(std::move(s));
}

Shape Shape::from_string(std::string_view s) {
    std::vector<int> signs;
    signs.reserve(s.size());
    for (char c : s) {
        if (c == '+') signs.push_back(1);
        else if (c == '-') signs.push_back(-1);
        else throw ConstraintError("shape string must consist of '+' and '-'");
    }
    return Shape(std::move(signs));
}

int Shape::sign(int lap) const {
    if (lap < 0 || lap >= static_cast<int>(signs_.size()))
        throw ConstraintError("lap index out of range for shape");
    return signs_[static_cast<std::size_t>(lap)];
}

std::string Shape::str() const {
    std::string out;
    for (int s : signs_) out.push_back(s > 0 ? '+' : '-');
    return out;
}

// ---------------------------------------------------------------------------
// Symbol
// ---------------------------------------------------------------------------
Symbol Symbol::interval(int j) {
    if (j < 0) throw ConstraintError("interval symbol index must be >= 0");
    return Symbol(2 * j);
}

Symbol Symbol::fold(int j) {
    if (j < 1) throw ConstraintError("fold symbol index must be >= 1");
    return Symbol(2 * j - 1);
}

std::string Symbol::token() const {
    return (is_fold() ? "C" : "I") + std::to_string(index());
}

Symbol Symbol::parse(std::string_view tok) {
    if (tok.size() < 2 || (tok[0] != 'I' && tok[0] != 'C'))
        throw ConstraintError("bad symbol token: " + std::string(tok));
    int j = 0;
    auto [p, ec] = std::from_chars(tok.data() + 1, tok.data() + tok.size(), j);
    if (ec != std::errc() || p != tok.data() + tok.size())
        throw ConstraintError("bad symbol token: " + std::string(tok));
    return tok[0] == 'I' ? interval(j) : fold(j);
}

// ---------------------------------------------------------------------------
// SymbolWord
// ---------------------------------------------------------------------------
bool SymbolWord::acritical() const {
    return std::none_of(symbols.begin(), symbols.end(), [](Symbol s) { return s.is_fold(); });
}

int SymbolWord::max_index() const {
    int mx = -1;
    for (Symbol s : symbols) mx = std::max(mx, s.index());
    return mx;
}

std::string SymbolWord::str() const {
    std::string out;
    for (std::size_t i = 0; i < symbols.size(); ++i) {
        if (i) out.push_back('.');
        out += symbols[i].token();
    }
    return out;
}

SymbolWord SymbolWord::parse(std::string_view s) {
    std::vector<Symbol> syms;
    std::size_t start = 0;
    while (start < s.size()) {
        std::size_t dot = s.find('.', start);
        if (dot == std::string_view::npos) dot = s.size();
        syms.push_back(Symbol::parse(s.substr(start, dot - start)));
        start = dot + 1;
    }
    return SymbolWord(std::move(syms));
}

// ---------------------------------------------------------------------------
// KneadingSequence
// ---------------------------------------------------------------------------
KneadingSequence::KneadingSequence(SymbolWord word, std::optional<Periodicity> flags)
    : word_(std::move(word)), flags_(flags) {
    if (flags_) {
        if (flags_->period == 0) throw ConstraintError("period must be positive");
        if (word_.depth() < flags_->preperiod + flags_->period)
            throw ConstraintError("stored word shorter than preperiod+period");
        // stored tail must already respect the flags
        for (std::size_t t = flags_->preperiod; t + flags_->period < word_.depth(); ++t) {
            if (!(word_.symbols[t] == word_.symbols[t + flags_->period]))
                throw ConstraintError("stored symbols inconsistent with period flags");
        }
    }
}

Symbol KneadingSequence::at(std::size_t t) const {
    if (t < word_.depth()) return word_.symbols[t];
    if (!flags_)
        throw UndecidableError("kneading sequence of depth " + std::to_string(word_.depth()) +
                               " has no period flags; symbol " + std::to_string(t) +
                               " is undecidable");
    const std::size_t r = flags_->preperiod, s = flags_->period;
    return word_.symbols[r + (t - r) % s];
}

SymbolWord KneadingSequence::truncation(std::size_t depth) const {
    std::vector<Symbol> syms;
    syms.reserve(depth);
    for (std::size_t t = 0; t < depth; ++t) syms.push_back(at(t));
    return SymbolWord(std::move(syms));
}

std::string KneadingSequence::str() const {
    if (!flags_) return word_.str();
    const std::size_t r = flags_->preperiod, s = flags_->period;
    std::string out;
    for (std::size_t t = 0; t < r; ++t) {
        if (t) out.push_back('.');
        out += word_.symbols[t].token();
    }
    if (r) out.push_back('|');
    out.push_back('(');
    for (std::size_t t = r; t < r + s; ++t) {
        if (t > r) out.push_back('.');
        out += word_.symbols[t].token();
    }
    out.push_back(')');
    return out;
}

KneadingSequence KneadingSequence::parse(std::string_view s) {
    auto open = s.find('(');
    if (open == std::string_view::npos) return KneadingSequence(SymbolWord::parse(s));
    auto close = s.find(')', open);
    if (close == std::string_view::npos) throw ConstraintError("unbalanced '(' in sequence");
    std::string_view pre = s.substr(0, open);
    if (!pre.empty() && pre.back() == '|') pre.remove_suffix(1);
    SymbolWord prew = pre.empty() ? SymbolWord() : SymbolWord::parse(pre);
    SymbolWord perw = SymbolWord::parse(s.substr(open + 1, close - open - 1));
    if (perw.depth() == 0) throw ConstraintError("empty period in sequence");
    std::vector<Symbol> all = prew.symbols;
    all.insert(all.end(), perw.symbols.begin(), perw.symbols.end());
    return KneadingSequence(SymbolWord(std::move(all)),
                            Periodicity{prew.depth(), perw.depth()});
}

// ---------------------------------------------------------------------------
// Extremal itineraries (boundary anchored)
// ---------------------------------------------------------------------------
KneadingSequence extremal_word(const Shape& shape, Extremal which) {
    const int m = shape.modality();
    auto I0 = Symbol::interval(0);
    auto Im = Symbol::interval(m);
    if (which == Extremal::Min) {
        if (shape.sign(0) == 1)
            return KneadingSequence(SymbolWord({I0}), Periodicity{0, 1});
        if (shape.sign(m) == 1)
            return KneadingSequence(SymbolWord({I0, Im}), Periodicity{1, 1});
        return KneadingSequence(SymbolWord({I0, Im}), Periodicity{0, 2});
    }
    if (shape.sign(m) == 1)
        return KneadingSequence(SymbolWord({Im}), Periodicity{0, 1});
    if (shape.sign(0) == 1)
        return KneadingSequence(SymbolWord({Im, I0}), Periodicity{1, 1});
    return KneadingSequence(SymbolWord({Im, I0}), Periodicity{0, 2});
}

SymbolWord extremal_sequence(const Shape& shape, Extremal which, std::size_t depth) {
    if (depth < 1) throw ConstraintError("extremal_sequence needs depth >= 1");
    return extremal_word(shape, which).truncation(depth);
}

// ---------------------------------------------------------------------------
// KneadingData
// ---------------------------------------------------------------------------
KneadingData::KneadingData(Shape shape, std::vector<KneadingSequence> sequences)
    : shape_(std::move(shape)),
      seqs_(std::move(sequences)),
      lower_bound_(extremal_word(shape_, shape_.sign(0) == 1 ? Extremal::Min : Extremal::Max)),
      upper_bound_(extremal_word(shape_, shape_.sign(shape_.modality()) == 1 ? Extremal::Max
                                                                             : Extremal::Min)) {
    const int m = shape_.modality();
    if (static_cast<int>(seqs_.size()) != m)
        throw ConstraintError("kneading data needs exactly m sequences");
    for (const auto& q : seqs_) {
        if (q.word().max_index() > m)
            throw ConstraintError("kneading symbol index exceeds modality");
        if (q.stored_depth() == 0)
            throw ConstraintError("empty kneading sequence");
    }
}

const KneadingSequence& KneadingData::sequence(int i) const {
    if (i < 1 || i > modality()) throw ConstraintError("kneading sequence index out of range");
    return seqs_[static_cast<std::size_t>(i - 1)];
}

const KneadingSequence& KneadingData::bound_sequence(int i) const {
    if (i == 0) return lower_bound_;          // K_0 = itinerary of f(a)
    if (i == modality() + 1) return upper_bound_;  // K_{m+1} = itinerary of f(b)
    return sequence(i);
}

bool KneadingData::decidable_to(std::size_t depth) const {
    return std::all_of(seqs_.begin(), seqs_.end(),
                       [&](const KneadingSequence& q) { return q.decidable_to(depth); });
}

// ---------------------------------------------------------------------------
// Sign function and twisted order
// ---------------------------------------------------------------------------
int epsilon(Symbol s, const Shape& shape) {
    const int m = shape.modality();
    if (s.is_fold()) {
        if (s.index() < 1 || s.index() > m)
            throw ConstraintError("fold symbol index out of range for shape");
        return 0;
    }
    if (s.index() < 0 || s.index() > m)
        throw ConstraintError("interval symbol index out of range for shape");
    return shape.sign(s.index());
}

int word_sign(const SymbolWord& w, const Shape& shape) {
    int sign = 1;
    for (Symbol s : w.symbols) {
        sign *= epsilon(s, shape);
        if (sign == 0) return 0;
    }
    return sign;
}

Cmp twisted_compare(const SymbolWord& a, const SymbolWord& b, const Shape& shape) {
    if (a.depth() != b.depth())
        throw ConstraintError("twisted_compare requires equal depths");
    int sign = 1;
    for (std::size_t k = 0; k < a.depth(); ++k) {
        if (!(a.symbols[k] == b.symbols[k])) {
            if (sign == 0) return Cmp::Undefined;
            bool less = a.symbols[k] < b.symbols[k];
            if (sign < 0) less = !less;
            return less ? Cmp::LT : Cmp::GT;
        }
        sign *= epsilon(a.symbols[k], shape);
    }
    return Cmp::EQ;
}

// ---------------------------------------------------------------------------
// Admissibility
// ---------------------------------------------------------------------------
namespace {

// Compare a word suffix (w[from..]) against a kneading sequence, walking the
// available material.  Ties at the word's end satisfy the closed inequality;
// running out of kneading material before a decision is an error.
Cmp compare_suffix_vs_sequence(const SymbolWord& w, std::size_t from,
                               const KneadingSequence& q, const Shape& shape) {
    int sign = 1;
    const std::size_t len = w.depth() - from;
    for (std::size_t t = 0; t < len; ++t) {
        if (!q.decidable_to(t + 1))
            throw UndecidableError("kneading depth " + std::to_string(q.stored_depth()) +
                                   " insufficient to decide a suffix comparison of length " +
                                   std::to_string(len));
        Symbol ws = w.symbols[from + t];
        Symbol qs = q.at(t);
        if (!(ws == qs)) {
            if (sign == 0) return Cmp::Undefined;
            bool less = ws < qs;
            if (sign < 0) less = !less;
            return less ? Cmp::LT : Cmp::GT;
        }
        sign *= epsilon(ws, shape);
    }
    return Cmp::EQ;  // tie at truncation boundary
}

// Compare two kneading sequences (as infinite words) up to a horizon.
// Returns EQ when no difference is seen within the horizon.
Cmp compare_sequences(const KneadingSequence& a, std::size_t a_from,
                      const KneadingSequence& b, const Shape& shape, std::size_t horizon) {
    int sign = 1;
    for (std::size_t t = 0; t < horizon; ++t) {
        if (!a.decidable_to(a_from + t + 1) || !b.decidable_to(t + 1)) return Cmp::EQ;
        Symbol as = a.at(a_from + t);
        Symbol bs = b.at(t);
        if (!(as == bs)) {
            if (sign == 0) return Cmp::Undefined;
            bool less = as < bs;
            if (sign < 0) less = !less;
            return less ? Cmp::LT : Cmp::GT;
        }
        sign *= epsilon(as, shape);
    }
    return Cmp::EQ;
}

constexpr std::size_t kCheckHorizon = 8192;

}  // namespace

bool is_admissible_word(const SymbolWord& w, const KneadingData& K) {
    const Shape& shape = K.shape();
    const int m = K.modality();
    if (w.max_index() > m)
        throw ConstraintError("word symbol index exceeds kneading modality");

    for (std::size_t k = 0; k < w.depth(); ++k) {
        Symbol s = w.symbols[k];
        if (s.is_fold()) {
            // Condition 1: the continuation must equal K_j.
            const KneadingSequence& Kj = K.sequence(s.index());
            for (std::size_t t = 0; k + 1 + t < w.depth(); ++t) {
                if (!Kj.decidable_to(t + 1))
                    throw UndecidableError("kneading depth insufficient for Condition 1 check");
                if (!(w.symbols[k + 1 + t] == Kj.at(t))) return false;
            }
        } else {
            // Condition 2 (boundary-anchored two-sided form).
            const int j = s.index();
            const KneadingSequence& lo =
                K.bound_sequence(shape.sign(j) == 1 ? j : j + 1);
            const KneadingSequence& hi =
                K.bound_sequence(shape.sign(j) == 1 ? j + 1 : j);
            Cmp against_lo = compare_suffix_vs_sequence(w, k + 1, lo, shape);
            if (against_lo == Cmp::LT || against_lo == Cmp::Undefined) return false;
            Cmp against_hi = compare_suffix_vs_sequence(w, k + 1, hi, shape);
            if (against_hi == Cmp::GT || against_hi == Cmp::Undefined) return false;
        }
    }
    return true;
}

AdmissibilityReport check_kneading_admissible(const KneadingData& K) {
    const Shape& shape = K.shape();
    const int m = K.modality();

    for (int i = 1; i <= m; ++i) {
        const KneadingSequence& Ki = K.sequence(i);
        const std::size_t extent = Ki.stored_depth();
        for (std::size_t t = 0; t < extent; ++t) {
            Symbol s = Ki.at(t);
            if (s.is_fold()) {
                // Condition 1 within the data itself.
                const KneadingSequence& Kr = K.sequence(s.index());
                for (std::size_t u = 0; u < kCheckHorizon; ++u) {
                    if (!Ki.decidable_to(t + 2 + u) || !Kr.decidable_to(u + 1)) break;
                    if (!(Ki.at(t + 1 + u) == Kr.at(u))) {
                        AdmissibilityReport r;
                        r.ok = false; r.condition = 1; r.sequence = i; r.position = t;
                        r.detail = "fold symbol " + s.token() + " in K_" + std::to_string(i) +
                                   " at index " + std::to_string(t) +
                                   " is not followed by K_" + std::to_string(s.index());
                        return r;
                    }
                }
            } else {
                const int j = s.index();
                const KneadingSequence& lo = K.bound_sequence(shape.sign(j) == 1 ? j : j + 1);
                const KneadingSequence& hi = K.bound_sequence(shape.sign(j) == 1 ? j + 1 : j);
                Cmp a = compare_sequences(Ki, t + 1, lo, shape, kCheckHorizon);
                Cmp b = compare_sequences(Ki, t + 1, hi, shape, kCheckHorizon);
                if (a == Cmp::LT || b == Cmp::GT || a == Cmp::Undefined || b == Cmp::Undefined) {
                    AdmissibilityReport r;
                    r.ok = false; r.condition = 2; r.sequence = i; r.position = t;
                    r.detail = "suffix of K_" + std::to_string(i) + " after index " +
                               std::to_string(t) + " leaves the interval of symbol " + s.token();
                    return r;
                }
            }
        }
    }

    // Condition 3 on adjacent pairs.
    for (int i = 1; i < m; ++i) {
        Cmp c = compare_sequences(K.sequence(i), 0, K.sequence(i + 1), shape, kCheckHorizon);
        bool bad = (shape.sign(i) == 1) ? (c == Cmp::GT) : (c == Cmp::LT);
        if (c == Cmp::Undefined) bad = false;  // only equal data can hit a common fold
        if (bad) {
            AdmissibilityReport r;
            r.ok = false; r.condition = 3; r.sequence = i; r.position = 0;
            r.detail = "K_" + std::to_string(i) + " and K_" + std::to_string(i + 1) +
                       " violate the twisted inequality for sigma_" + std::to_string(i);
            return r;
        }
    }
    return AdmissibilityReport{};
}

bool kneading_gg(const KneadingData& f, const KneadingData& g) {
    if (!(f.shape() == g.shape()))
        throw ConstraintError("kneading_gg requires equal shapes");
    const Shape& shape = f.shape();
    const int m = f.modality();

    // Common comparison depth: stored depth when unflagged, a fixed cap when
    // the sequence extends periodically.
    constexpr std::size_t kCap = 256;
    std::size_t depth = kCap;
    for (int i = 1; i <= m; ++i) {
        for (const KneadingData* K : {&f, &g}) {
            const KneadingSequence& q = K->sequence(i);
            if (!q.flags()) depth = std::min(depth, q.stored_depth());
        }
    }

    for (int i = 1; i <= m; ++i) {
        Cmp c = twisted_compare(f.sequence(i).truncation(depth),
                                g.sequence(i).truncation(depth), shape);
        if (c == Cmp::EQ) continue;
        if (c == Cmp::Undefined) return false;
        if (shape.sign(i) == -1 && c == Cmp::LT) return false;
        if (shape.sign(i) == 1 && c == Cmp::GT) return false;
    }
    return true;
}

}  // namespace foldmap
