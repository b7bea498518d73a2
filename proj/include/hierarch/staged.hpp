#pragma once

// Recursively enumerable abelian groups <x_1, x_2, ... | x_j = 0 for j in I>,
// with I given in stages, and the staged Betti estimate
// b(s, h) = #{ j <= h : x_j not killed by stage s },
// which is non-increasing in s and non-decreasing in h.

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "hierarch/groups.hpp"
#include "hierarch/markers.hpp"

namespace hierarch::staged {

using markers::Index;

class REAbelianPresentation {
public:
    /// Kills in the order given; `known_stages` is how far the enumeration
    /// was run. Events must be ordered by stage.
    REAbelianPresentation(const std::vector<markers::MarkerEvent>& events, std::uint64_t known_stages);

    std::uint64_t stage() const noexcept { return known_stages_; }
    /// Stage at which x_j was killed, if it was.
    std::optional<std::uint64_t> kill_stage(Index j) const;
    /// Indices killed by stage s, in enumeration order.
    std::vector<Index> killed_by(std::uint64_t s) const;

    /// Finite abelian presentation on x_1..x_h: all commutators plus x_j for
    /// each j <= h killed by stage s. Its first Betti number is b(s, h).
    groups::FinitePresentation truncated(std::uint64_t s, Index h) const;

private:
    std::vector<std::pair<std::uint64_t, Index>> kills_;  ///< (stage, index) in order
    std::map<Index, std::uint64_t> stage_of_;
    std::uint64_t known_stages_;
};

/// Replays the cells enumerated by `run`: x_j is killed when cell j enters W.
REAbelianPresentation re_abelian_from_markers(const markers::MarkerRun& run);

struct StagedBettiEstimate {
    std::uint64_t stage = 0;
    Index horizon = 0;
    std::uint64_t value = 0;
};

/// Throws DomainError when s lies beyond the replayed stages.
StagedBettiEstimate staged_betti(const REAbelianPresentation& a, std::uint64_t s, Index h);

}  // namespace hierarch::staged
