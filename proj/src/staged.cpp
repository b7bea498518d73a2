#include "hierarch/staged.hpp"

#include "hierarch/errors.hpp"

namespace hierarch::staged {

REAbelianPresentation::REAbelianPresentation(const std::vector<markers::MarkerEvent>& events,
                                             std::uint64_t known_stages)
    : known_stages_(known_stages) {
    std::uint64_t last = 0;
    for (const auto& e : events) {
        if (e.stage < last) throw ValidationError("events are not ordered by stage");
        if (e.stage > known_stages) throw ValidationError("event beyond the recorded number of stages");
        if (e.freed_cell < 1) throw ValidationError("freed cells are numbered from 1");
        if (!stage_of_.emplace(e.freed_cell, e.stage).second)
            throw ValidationError("cell " + std::to_string(e.freed_cell) + " enumerated twice");
        kills_.emplace_back(e.stage, e.freed_cell);
        last = e.stage;
    }
}

std::optional<std::uint64_t> REAbelianPresentation::kill_stage(Index j) const {
    auto it = stage_of_.find(j);
    if (it == stage_of_.end()) return std::nullopt;
    return it->second;
}

std::vector<Index> REAbelianPresentation::killed_by(std::uint64_t s) const {
    std::vector<Index> out;
    for (const auto& [stage, j] : kills_) {
        if (stage > s) break;
        out.push_back(j);
    }
    return out;
}

groups::FinitePresentation REAbelianPresentation::truncated(std::uint64_t s, Index h) const {
    std::vector<groups::Word> relators;
    for (Index i = 1; i <= h; ++i)
        for (Index j = i + 1; j <= h; ++j) {
            const auto a = static_cast<groups::Letter>(i), b = static_cast<groups::Letter>(j);
            relators.push_back({a, b, -a, -b});
        }
    for (Index j = 1; j <= h; ++j)
        if (auto k = kill_stage(j); k && *k <= s) relators.push_back({static_cast<groups::Letter>(j)});
    return groups::FinitePresentation(h, std::move(relators));
}

REAbelianPresentation re_abelian_from_markers(const markers::MarkerRun& run) {
    return REAbelianPresentation(run.events(), run.stage());
}

StagedBettiEstimate staged_betti(const REAbelianPresentation& a, std::uint64_t s, Index h) {
    if (s > a.stage())
        throw DomainError("stage " + std::to_string(s) + " lies beyond the " + std::to_string(a.stage()) +
                          " replayed stages");
    std::uint64_t killed = 0;
    for (Index j = 1; j <= h; ++j)
        if (auto k = a.kill_stage(j); k && *k <= s) ++killed;
    return {s, h, h - killed};
}

}  // namespace hierarch::staged
