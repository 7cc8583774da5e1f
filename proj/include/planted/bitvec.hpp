#pragma once

#include <bit>
#include <cassert>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace planted {

// Packed boolean vector. Bit i lives in word i/64 at bit i%64; unused tail
// bits are kept zero so equality and popcount can work word-wise.
class BitVec {
public:
    BitVec() = default;
    explicit BitVec(std::size_t n, bool fill = false) : n_(n), w_((n + 63) / 64, fill ? ~0ULL : 0ULL) {
        clear_tail();
    }

    // Parses a string of 'T'/'F' (also accepts '1'/'0'), position 0 first.
    static BitVec from_tf(std::string_view s) {
        BitVec v(s.size());
        for (std::size_t i = 0; i < s.size(); ++i) {
            v.set(i, s[i] == 'T' || s[i] == '1');
        }
        return v;
    }

    std::size_t size() const { return n_; }
    bool empty() const { return n_ == 0; }

    bool test(std::size_t i) const {
        assert(i < n_);
        return (w_[i >> 6] >> (i & 63)) & 1ULL;
    }

    void set(std::size_t i, bool value = true) {
        assert(i < n_);
        if (value)
            w_[i >> 6] |= 1ULL << (i & 63);
        else
            w_[i >> 6] &= ~(1ULL << (i & 63));
    }

    void reset(std::size_t i) { set(i, false); }

    void set_all(bool value) {
        for (auto& w : w_) w = value ? ~0ULL : 0ULL;
        clear_tail();
    }

    std::size_t count() const {
        std::size_t c = 0;
        for (auto w : w_) c += static_cast<std::size_t>(std::popcount(w));
        return c;
    }

    bool any() const {
        for (auto w : w_)
            if (w) return true;
        return false;
    }
    bool none() const { return !any(); }

    BitVec complement() const {
        BitVec r(n_);
        for (std::size_t i = 0; i < w_.size(); ++i) r.w_[i] = ~w_[i];
        r.clear_tail();
        return r;
    }

    // Number of positions where the two vectors differ; sizes must match.
    std::size_t hamming(const BitVec& o) const {
        assert(n_ == o.n_);
        std::size_t c = 0;
        for (std::size_t i = 0; i < w_.size(); ++i)
            c += static_cast<std::size_t>(std::popcount(w_[i] ^ o.w_[i]));
        return c;
    }

    // Lexicographic order with position 0 most significant and F < T.
    bool lex_less(const BitVec& o) const {
        assert(n_ == o.n_);
        for (std::size_t i = 0; i < w_.size(); ++i) {
            const std::uint64_t diff = w_[i] ^ o.w_[i];
            if (diff) {
                const int bit = std::countr_zero(diff);
                return !((w_[i] >> bit) & 1ULL);  // this has F at the first differing position
            }
        }
        return false;
    }

    std::string to_tf() const {
        std::string s(n_, 'F');
        for (std::size_t i = 0; i < n_; ++i)
            if (test(i)) s[i] = 'T';
        return s;
    }

    bool operator==(const BitVec& o) const = default;

private:
    void clear_tail() {
        if (n_ & 63) w_.back() &= (1ULL << (n_ & 63)) - 1;
    }

    std::size_t n_ = 0;
    std::vector<std::uint64_t> w_;
};

}  // namespace planted
