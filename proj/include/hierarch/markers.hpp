#pragma once

// Moving-markers enumeration for Σ3 predicates ∃n ∀m ∃k QQ(n,m,k).
//
// For every n a semi-decider M(n) halts on input m once each p <= m has a
// witness k with QQ(n,p,k). Marker n sits on the n-th free tape cell and is
// pushed one cell further every time a stage equals a halting time of M(n);
// the cells it leaves are enumerated into W. If P holds, the complement of
// W is finite and its size is the least n with ∀m ∃k QQ(n,m,k).

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "hierarch/arith.hpp"

namespace hierarch::markers {

using Index = std::uint64_t;

/// A Σ3 kernel QQ(n, p, k) together with the marker-tape conventions.
class Sigma3Instance {
public:
    using Evaluator = std::function<bool(Index n, Index p, Index k, arith::EvalBudget&)>;

    /// Defaults: positive domain and a dummy marker on cell 0.
    explicit Sigma3Instance(Evaluator kernel, std::uint64_t step_budget = 1'000'000);

    /// QQ from a 3-variable table, or a 4-variable table with the family
    /// parameter `l` fixed.
    static Sigma3Instance from_table(const arith::TableKernel& table, std::optional<Index> l = std::nullopt);

    /// QQ from a formula of shape ∃n ∀m ∃k (leading ∃∃ blocks are merged first).
    static Sigma3Instance from_formula(const arith::PrenexFormula& formula);

    Sigma3Instance& with_dummy_marker(bool on);
    /// n ranges over {0,1,...}; markers start at 0 and there is no dummy.
    Sigma3Instance& with_zero_based(bool on);
    /// Declares QQ constant beyond (n, m, k) bounds; needed by brute_force_min_n.
    Sigma3Instance& with_constant_beyond(Index n, Index m, Index k);

    bool dummy_marker() const noexcept { return dummy_; }
    bool zero_based() const noexcept { return zero_based_; }
    Index first_marker() const noexcept { return zero_based_ ? 0 : 1; }
    const std::optional<std::array<Index, 3>>& constant_beyond() const noexcept { return constant_beyond_; }

    /// One kernel evaluation with its own budget; throws KernelTimeout.
    bool eval(Index n, Index p, Index k) const;

private:
    Evaluator kernel_;
    std::uint64_t step_budget_;
    bool dummy_ = true;
    bool zero_based_ = false;
    std::optional<std::array<Index, 3>> constant_beyond_;
};

/// Halting time of M(n) on input m under the canonical dovetail: rounds
/// r = 1, 2, ...; in round r every p <= m still lacking a witness is tested
/// at k = r. Time counts kernel evaluations. Unknown (nullopt) if the run
/// needs more than `cap` evaluations. `trace`, when given, sees every (p, k)
/// evaluated in order.
std::optional<std::uint64_t> mn_halting_time(const Sigma3Instance& instance, Index n, Index m, std::uint64_t cap,
                                             const std::function<void(Index p, Index k)>& trace = {});

/// Incremental, cached evaluation of M(n). The dovetail tests p exactly w(p)
/// times, where w(p) is its least witness, so T_n(m) = w(1) + ... + w(m);
/// the cache stores least witnesses and their prefix sums.
class MnSemidecider {
public:
    MnSemidecider(std::shared_ptr<const Sigma3Instance> instance, Index n);

    Index index() const noexcept { return n_; }
    std::optional<std::uint64_t> halting_time(Index m, std::uint64_t cap);
    /// True iff s = T_n(m) for some m (then m <= s).
    bool halts_at(std::uint64_t s);

private:
    /// Tries to find the next least witness with k <= limit.
    bool extend(std::uint64_t limit);

    std::shared_ptr<const Sigma3Instance> instance_;
    Index n_;
    std::vector<std::uint64_t> prefix_;  ///< T_n(1), T_n(2), ...
    std::uint64_t searched_ = 0;         ///< k values already refuted for the next p
};

struct MarkerEvent {
    std::uint64_t stage;
    Index marker;
    Index freed_cell;  ///< in N = {1,2,...}
    friend bool operator==(const MarkerEvent&, const MarkerEvent&) = default;
};

/// Staged state of the construction. Cells are reported in {1,2,...}: with a
/// dummy marker, or zero-based, tape cell c is reported as c + 1.
class MarkerRun {
public:
    explicit MarkerRun(Sigma3Instance instance);

    void advance(std::uint64_t stages = 1);

    std::uint64_t stage() const noexcept { return stage_; }
    const std::vector<MarkerEvent>& events() const noexcept { return events_; }
    const Sigma3Instance& instance() const noexcept { return *instance_; }

    bool enumerated(Index cell) const;
    /// Reported cell under marker `marker`.
    Index marker_position(Index marker) const;
    /// Reported cell of the unmovable dummy marker, if any.
    std::optional<Index> dummy_position() const;

private:
    Index slot_of(Index marker) const;
    void ensure_slots(std::size_t count) const;

    std::shared_ptr<const Sigma3Instance> instance_;
    std::uint64_t stage_ = 0;
    std::vector<MarkerEvent> events_;
    std::vector<MnSemidecider> machines_;
    // Complement of W, materialized up to the largest slot used; every tape
    // cell >= frontier_ is still free.
    mutable std::vector<Index> complement_;
    mutable Index frontier_ = 0;
    std::vector<char> in_w_;
};

MarkerRun run_markers(const Sigma3Instance& instance, std::uint64_t stages);

struct Snapshot {
    std::vector<Index> cells;
    std::uint64_t cardinality = 0;
};

/// Cells c <= horizon not yet in W.
Snapshot complement_snapshot(const MarkerRun& run, Index horizon);

struct Stabilization {
    bool stabilized = false;  ///< observed, not proven
    std::uint64_t stage = 0;
    Snapshot snapshot;
};

/// Advances `run` until the snapshot at `horizon` has not changed for a
/// quiet window (default max(64, 4 * current cardinality)) or max_stages is
/// reached. `on_stage`, when given, sees the run after every stage.
Stabilization run_until_stable(MarkerRun& run, Index horizon, std::uint64_t max_stages,
                               std::uint64_t quiet_window = 0,
                               const std::function<void(const MarkerRun&)>& on_stage = {});

struct Box {
    Index n, m, k;
};

/// Least n <= box.n with ∀m<=box.m ∃k<=box.k QQ(n,m,k); nullopt if none.
/// Refuses instances without a constant-beyond declaration covered by box.
std::optional<Index> brute_force_min_n(const Sigma3Instance& instance, Box box);

/// Random kernel, monotone in k: QQ(n,p,k) = k >= w(n,p) on a small table,
/// with the top row of n fully witnessed so the predicate holds.
arith::TableKernel random_sigma3_table(std::uint64_t seed, Index max_n = 5, Index max_m = 4, Index max_k = 4,
                                       std::uint64_t origin = 1);

}  // namespace hierarch::markers
