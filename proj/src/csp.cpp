#include "planted/csp.hpp"

#include <cassert>
#include <sstream>
#include <stdexcept>

namespace planted {

double hamming_error(const Assignment& a, const Assignment& b) {
    if (a.size() != b.size())
        throw LengthMismatch("hamming_error: lengths differ (" + std::to_string(a.size()) +
                             " vs " + std::to_string(b.size()) + ")");
    if (a.size() == 0) return 0.0;
    return static_cast<double>(a.hamming(b)) / static_cast<double>(a.size());
}

VarTuple::VarTuple(std::vector<VarId> vars) : vars_(std::move(vars)) {
    std::sort(vars_.begin(), vars_.end());
    for (std::size_t i = 1; i < vars_.size(); ++i)
        if (vars_[i] == vars_[i - 1])
            throw std::invalid_argument("VarTuple: duplicate variable " + std::to_string(vars_[i]));
    if (vars_.size() > kMaxArity)
        throw std::invalid_argument("VarTuple: arity exceeds cap");
}

bool VarTuple::contains(VarId v) const {
    return std::binary_search(vars_.begin(), vars_.end(), v);
}

int VarTuple::position_of(VarId v) const {
    auto it = std::lower_bound(vars_.begin(), vars_.end(), v);
    if (it == vars_.end() || *it != v) return -1;
    return static_cast<int>(it - vars_.begin());
}

VarTuple VarTuple::with(VarId v) const {
    std::vector<VarId> next = vars_;
    auto it = std::lower_bound(next.begin(), next.end(), v);
    if (it != next.end() && *it == v)
        throw std::invalid_argument("VarTuple::with: variable already present");
    next.insert(it, v);
    VarTuple t;
    t.vars_ = std::move(next);
    return t;
}

VarTuple VarTuple::without_position(int pos) const {
    assert(pos >= 0 && pos < arity());
    std::vector<VarId> next = vars_;
    next.erase(next.begin() + pos);
    VarTuple t;
    t.vars_ = std::move(next);
    return t;
}

std::string VarTuple::to_string() const {
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < vars_.size(); ++i) {
        if (i) os << ',';
        os << vars_[i];
    }
    os << ')';
    return os.str();
}

PartialAssignment::PartialAssignment(std::uint32_t bits, int len) {
    if (len < 0 || len > VarTuple::kMaxArity)
        throw std::invalid_argument("PartialAssignment: bad length");
    len_ = static_cast<std::uint8_t>(len);
    bits_ = bits & ((len == 32 ? 0U : (1U << len)) - 1U);
}

PartialAssignment PartialAssignment::from_lex_rank(std::uint32_t rank, int len) {
    std::uint32_t bits = 0;
    for (int j = 0; j < len; ++j)
        if ((rank >> (len - 1 - j)) & 1U) bits |= 1U << j;
    return PartialAssignment(bits, len);
}

PartialAssignment PartialAssignment::from_tf(std::string_view s) {
    std::uint32_t bits = 0;
    for (std::size_t j = 0; j < s.size(); ++j)
        if (s[j] == 'T' || s[j] == '1') bits |= 1U << j;
    return PartialAssignment(bits, static_cast<int>(s.size()));
}

std::uint32_t PartialAssignment::lex_rank() const {
    std::uint32_t rank = 0;
    for (int j = 0; j < len_; ++j)
        if (bit(j)) rank |= 1U << (len_ - 1 - j);
    return rank;
}

PartialAssignment PartialAssignment::with_inserted(int pos, bool value) const {
    assert(pos >= 0 && pos <= len_);
    const std::uint32_t low = bits_ & ((1U << pos) - 1U);
    const std::uint32_t high = bits_ >> pos;
    const std::uint32_t bits = low | (static_cast<std::uint32_t>(value) << pos) | (high << (pos + 1));
    return PartialAssignment(bits, len_ + 1);
}

PartialAssignment PartialAssignment::without_position(int pos) const {
    assert(pos >= 0 && pos < len_);
    const std::uint32_t low = bits_ & ((1U << pos) - 1U);
    const std::uint32_t high = bits_ >> (pos + 1);
    return PartialAssignment(low | (high << pos), len_ - 1);
}

PartialAssignment PartialAssignment::project(std::span<const int> positions) const {
    std::uint32_t bits = 0;
    for (std::size_t j = 0; j < positions.size(); ++j) {
        assert(positions[j] >= 0 && positions[j] < len_);
        if (bit(positions[j])) bits |= 1U << j;
    }
    return PartialAssignment(bits, static_cast<int>(positions.size()));
}

std::string PartialAssignment::to_tf() const {
    std::string s(len_, 'F');
    for (int j = 0; j < len_; ++j)
        if (bit(j)) s[static_cast<std::size_t>(j)] = 'T';
    return s;
}

bool Implication::forced_value() const {
    if (kind_ != Kind::Forced) throw std::logic_error("Implication: no forced value");
    return value_;
}

ConstraintSet::ConstraintSet(VarTuple tuple, BitVec allowed)
    : tuple_(std::move(tuple)), allowed_(std::move(allowed)) {
    const std::size_t cells = std::size_t{1} << tuple_.arity();
    if (allowed_.size() != cells)
        throw ArityMismatch("ConstraintSet: mask size does not match tuple arity");
    const std::size_t k = allowed_.count();
    if (k == 0)
        throw EmptyConstraintError("ConstraintSet: empty allowed set for tuple " +
                                   tuple_.to_string());
    if (k == cells)
        throw std::invalid_argument("ConstraintSet: full allowed set carries no constraint");
}

ConstraintSet ConstraintSet::of(VarTuple tuple, std::initializer_list<PartialAssignment> allowed) {
    BitVec mask(std::size_t{1} << tuple.arity());
    for (const auto& a : allowed) {
        if (a.size() != tuple.arity())
            throw ArityMismatch("ConstraintSet::of: member arity mismatch");
        mask.set(a.mask());
    }
    return ConstraintSet(std::move(tuple), std::move(mask));
}

ConstraintSet ConstraintSet::all_except(VarTuple tuple, const PartialAssignment& removed) {
    if (removed.size() != tuple.arity())
        throw ArityMismatch("ConstraintSet::all_except: arity mismatch");
    BitVec mask(std::size_t{1} << tuple.arity());
    mask.set_all(true);
    mask.reset(removed.mask());
    return ConstraintSet(std::move(tuple), std::move(mask));
}

bool ConstraintSet::contains(const PartialAssignment& a) const {
    if (a.size() != arity()) throw ArityMismatch("ConstraintSet::contains: arity mismatch");
    return allowed_.test(a.mask());
}

std::vector<PartialAssignment> ConstraintSet::allowed_list() const {
    std::vector<PartialAssignment> out;
    const std::uint32_t cells = 1U << arity();
    for (std::uint32_t rank = 0; rank < cells; ++rank) {
        auto a = PartialAssignment::from_lex_rank(rank, arity());
        if (allowed_.test(a.mask())) out.push_back(a);
    }
    return out;
}

std::vector<PartialAssignment> restrict_to(const ConstraintSet& c, const VarTuple& sub) {
    std::vector<int> positions;
    positions.reserve(static_cast<std::size_t>(sub.arity()));
    for (VarId v : sub.vars()) {
        const int pos = c.tuple().position_of(v);
        if (pos < 0)
            throw SubsetViolation("restrict_to: variable " + std::to_string(v) +
                                  " not in tuple " + c.tuple().to_string());
        positions.push_back(pos);
    }
    BitVec seen(std::size_t{1} << sub.arity());
    std::vector<PartialAssignment> out;
    for (const auto& a : c.allowed_list()) {
        const auto proj = a.project(positions);
        if (!seen.test(proj.mask())) {
            seen.set(proj.mask());
            out.push_back(proj);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

Implication implied_value(const ConstraintSet& c, const PartialAssignment& sub, VarId target) {
    const int pos = c.tuple().position_of(target);
    if (pos < 0)
        throw SubsetViolation("implied_value: target " + std::to_string(target) +
                              " not in tuple " + c.tuple().to_string());
    if (sub.size() != c.arity() - 1)
        throw ArityMismatch("implied_value: sub-assignment must cover all but one variable");
    const bool allows_f = c.contains(sub.with_inserted(pos, false));
    const bool allows_t = c.contains(sub.with_inserted(pos, true));
    if (allows_f && allows_t) return Implication::free();
    if (allows_f) return Implication::forced(false);
    if (allows_t) return Implication::forced(true);
    return Implication::contradiction();
}

PartialAssignment forced_exists(const ConstraintSet& c, const VarTuple& sub) {
    if (sub.arity() != c.arity() - 1)
        throw ArityMismatch("forced_exists: sub must exclude exactly one variable");
    VarId excluded = 0;
    bool found = false;
    for (VarId v : c.tuple().vars()) {
        if (sub.position_of(v) < 0) {
            if (found) throw SubsetViolation("forced_exists: sub is not a subset of the tuple");
            excluded = v;
            found = true;
        }
    }
    if (!found) throw SubsetViolation("forced_exists: sub equals the tuple");
    const std::uint32_t cells = 1U << sub.arity();
    for (std::uint32_t rank = 0; rank < cells; ++rank) {
        const auto a = PartialAssignment::from_lex_rank(rank, sub.arity());
        if (implied_value(c, a, excluded).decides()) return a;
    }
    // Unreachable for any valid (non-full) constraint set: if no assignment
    // decided the excluded variable, every cell would be allowed.
    throw std::logic_error("forced_exists: no deciding assignment found");
}

}  // namespace planted
