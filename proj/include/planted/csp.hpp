#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "planted/bitvec.hpp"
#include "planted/errors.hpp"
#include "planted/rng.hpp"

namespace planted {

using VarId = std::uint32_t;

// A full truth assignment to the n variables of an instance.
using Assignment = BitVec;

// Fraction of coordinates on which the two assignments disagree, in [0,1].
double hamming_error(const Assignment& a, const Assignment& b);

// Canonical variable tuple: strictly increasing VarIds. One representation
// per variable set; every PartialAssignment is positionally aligned with
// this order.
class VarTuple {
public:
    static constexpr int kMaxArity = 20;

    VarTuple() = default;
    explicit VarTuple(std::vector<VarId> vars);
    VarTuple(std::initializer_list<VarId> vars) : VarTuple(std::vector<VarId>(vars)) {}

    int arity() const { return static_cast<int>(vars_.size()); }
    VarId operator[](int i) const { return vars_[static_cast<std::size_t>(i)]; }
    std::span<const VarId> vars() const { return vars_; }

    bool contains(VarId v) const;
    // Index of v in the sorted order, or -1 if absent.
    int position_of(VarId v) const;

    // Tuple with v inserted at its sorted position; v must not be present.
    VarTuple with(VarId v) const;
    // Tuple with the variable at position pos removed.
    VarTuple without_position(int pos) const;

    bool operator==(const VarTuple&) const = default;
    auto operator<=>(const VarTuple&) const = default;

    std::string to_string() const;

private:
    std::vector<VarId> vars_;
};

struct VarTupleHash {
    std::size_t operator()(const VarTuple& t) const {
        std::uint64_t h = 0x243F6A8885A308D3ULL;
        for (VarId v : t.vars()) h = mix64(h, v + 1);
        return static_cast<std::size_t>(h);
    }
};

// Truth values for one tuple, bit j = value of the tuple's j-th variable in
// sorted order. Backed by a 32-bit mask, so arity is capped at
// VarTuple::kMaxArity. Ordering is lexicographic with F < T, position 0
// read first.
class PartialAssignment {
public:
    PartialAssignment() = default;
    PartialAssignment(std::uint32_t bits, int len);

    // The rank-th assignment of the given length in lexicographic order
    // (rank 0 = all-F, rank 2^len-1 = all-T).
    static PartialAssignment from_lex_rank(std::uint32_t rank, int len);
    // Parses "TFT" / "101", position 0 first.
    static PartialAssignment from_tf(std::string_view s);

    int size() const { return len_; }
    bool bit(int pos) const { return (bits_ >> pos) & 1U; }
    // Index into a 2^len membership table.
    std::uint32_t mask() const { return bits_; }
    std::uint32_t lex_rank() const;

    PartialAssignment with_inserted(int pos, bool value) const;
    PartialAssignment without_position(int pos) const;
    // Projection onto the given positions (ascending), preserving order.
    PartialAssignment project(std::span<const int> positions) const;

    std::string to_tf() const;

    bool operator==(const PartialAssignment&) const = default;
    std::strong_ordering operator<=>(const PartialAssignment& o) const {
        if (auto c = len_ <=> o.len_; c != 0) return c;
        return lex_rank() <=> o.lex_rank();
    }

private:
    std::uint32_t bits_ = 0;
    std::uint8_t len_ = 0;
};

// Outcome of propagating a sub-assignment through a constraint toward one
// target variable. Forced: exactly one extension allowed. Free: both.
// Contradiction: the sub-assignment matches no allowed assignment at all
// (the vacuous case; it still pins the target in the counting sense).
class Implication {
public:
    static Implication forced(bool value) { return Implication(Kind::Forced, value); }
    static Implication free() { return Implication(Kind::Free, false); }
    static Implication contradiction() { return Implication(Kind::Contradiction, false); }

    bool is_forced() const { return kind_ == Kind::Forced; }
    bool is_free() const { return kind_ == Kind::Free; }
    bool is_contradiction() const { return kind_ == Kind::Contradiction; }
    // Forced or Contradiction: the sub-assignment decides the target either
    // concretely or vacuously.
    bool decides() const { return kind_ != Kind::Free; }

    bool forced_value() const;

    bool operator==(const Implication&) const = default;

private:
    enum class Kind : std::uint8_t { Forced, Free, Contradiction };
    Implication(Kind k, bool v) : kind_(k), value_(v) {}
    Kind kind_;
    bool value_;
};

// Allowed joint values for one tuple, stored as a 2^arity membership mask
// indexed by PartialAssignment::mask(). Invariant: never empty, never full
// (1 <= |allowed| <= 2^arity - 1).
class ConstraintSet {
public:
    ConstraintSet(VarTuple tuple, BitVec allowed);
    static ConstraintSet of(VarTuple tuple, std::initializer_list<PartialAssignment> allowed);
    // Everything except the one given assignment.
    static ConstraintSet all_except(VarTuple tuple, const PartialAssignment& removed);

    const VarTuple& tuple() const { return tuple_; }
    int arity() const { return tuple_.arity(); }
    std::size_t allowed_count() const { return allowed_.count(); }
    bool contains(const PartialAssignment& a) const;
    // Allowed assignments in lexicographic order.
    std::vector<PartialAssignment> allowed_list() const;

    bool operator==(const ConstraintSet&) const = default;

private:
    VarTuple tuple_;
    BitVec allowed_;
};

// Projection of every allowed assignment onto sub's coordinates, deduplicated,
// in lexicographic order. sub must be a subset of c's tuple.
std::vector<PartialAssignment> restrict_to(const ConstraintSet& c, const VarTuple& sub);

// Implication of a sub-assignment covering all of c's variables except
// target. sub is positionally aligned with c.tuple() minus target.
Implication implied_value(const ConstraintSet& c, const PartialAssignment& sub, VarId target);

// Lexicographically smallest assignment to sub (= c's tuple minus exactly one
// variable) whose implied_value on the excluded variable decides it. Existence
// is guaranteed for any constraint set missing at least one assignment.
PartialAssignment forced_exists(const ConstraintSet& c, const VarTuple& sub);

}  // namespace planted
