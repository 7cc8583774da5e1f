#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "planted/csp.hpp"

namespace planted {

// The only path from the recovery algorithms to ground truth. Samples are
// uniform i.i.d. with replacement over the full variable set; every sample
// counts against the running total, and against the hard cap when one is set.
class VerifiedOracle {
public:
    VerifiedOracle(Assignment planted, std::uint64_t seed,
                   std::optional<std::uint64_t> budget = std::nullopt)
        : planted_(std::move(planted)),
          rng_(SeedChain(seed).with("oracle").value()),
          budget_(budget) {}

    std::vector<std::pair<VarId, bool>> sample_batch(std::size_t count) {
        if (count < 1) throw ConfigError("sample_batch: count must be >= 1");
        if (budget_ && used_ + count > *budget_)
            throw BudgetExhausted("verified budget exceeded: " + std::to_string(used_) + " used, " +
                                  std::to_string(count) + " requested, cap " +
                                  std::to_string(*budget_));
        std::vector<std::pair<VarId, bool>> out;
        out.reserve(count);
        for (std::size_t i = 0; i < count; ++i) {
            const auto v = static_cast<VarId>(rng_.below(planted_.size()));
            out.emplace_back(v, planted_.test(v));
        }
        used_ += count;
        return out;
    }

    std::uint64_t used() const { return used_; }
    std::size_t universe_size() const { return planted_.size(); }

private:
    Assignment planted_;
    SplitMix64 rng_;
    std::uint64_t used_ = 0;
    std::optional<std::uint64_t> budget_;
};

}  // namespace planted
