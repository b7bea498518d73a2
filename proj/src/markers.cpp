#include "hierarch/markers.hpp"

#include <algorithm>
#include <random>

#include "hierarch/errors.hpp"

namespace hierarch::markers {

using arith::Value;

// --- Sigma3Instance -------------------------------------------------------------

Sigma3Instance::Sigma3Instance(Evaluator kernel, std::uint64_t step_budget)
    : kernel_(std::move(kernel)), step_budget_(step_budget) {
    if (!kernel_) throw ValidationError("Σ3 instance needs a kernel");
}

Sigma3Instance Sigma3Instance::from_table(const arith::TableKernel& table, std::optional<Index> l) {
    const auto arity = table.vars().size();
    if (arity != 3 && arity != 4) throw ValidationError("Σ3 table kernel must have 3 or 4 variables");
    if (arity == 4 && !l) throw ValidationError("4-variable kernel needs the family parameter l");
    if (arity == 3 && l) throw ValidationError("family parameter given for a 3-variable kernel");
    auto shared = std::make_shared<const arith::TableKernel>(table);
    Evaluator eval;
    if (arity == 3) {
        eval = [shared](Index n, Index p, Index k, arith::EvalBudget& budget) {
            budget.tick();
            const std::array<std::uint64_t, 3> point{n, p, k};
            return shared->at(point);
        };
    } else {
        eval = [shared, l = *l](Index n, Index p, Index k, arith::EvalBudget& budget) {
            budget.tick();
            const std::array<std::uint64_t, 4> point{n, p, k, l};
            return shared->at(point);
        };
    }
    Sigma3Instance inst(std::move(eval), 1);
    const auto& b = table.bounds();
    inst.with_constant_beyond(b[0], b[1], b[2]);
    if (table.origin() == 0) inst.with_zero_based(true);
    return inst;
}

Sigma3Instance Sigma3Instance::from_formula(const arith::PrenexFormula& formula) {
    const arith::PrenexFormula* f = &formula;
    std::optional<arith::PrenexFormula> merged;
    while (f->prefix().size() > 3 && f->prefix()[0].quantifier == arith::Quantifier::Exists &&
           f->prefix()[1].quantifier == arith::Quantifier::Exists) {
        merged = arith::merge_leading_exists(*f);
        f = &*merged;
    }
    const auto& p = f->prefix();
    using arith::Quantifier;
    if (p.size() != 3 || p[0].quantifier != Quantifier::Exists || p[1].quantifier != Quantifier::ForAll ||
        p[2].quantifier != Quantifier::Exists || !f->free_vars().empty())
        throw ShapeError("expected a closed formula of shape ∃n ∀m ∃k");
    auto kernel = f->kernel();
    Sigma3Instance inst(
        [kernel](Index n, Index m, Index k, arith::EvalBudget& budget) {
            const std::array<Value, 3> args{Value(n), Value(m), Value(k)};
            return kernel.eval(args, budget);
        },
        kernel.step_budget);
    if (kernel.constant_beyond && !merged) {
        const auto& b = *kernel.constant_beyond;
        inst.with_constant_beyond(b[0], b[1], b[2]);
    }
    return inst;
}

Sigma3Instance& Sigma3Instance::with_dummy_marker(bool on) {
    dummy_ = on;
    return *this;
}

Sigma3Instance& Sigma3Instance::with_zero_based(bool on) {
    zero_based_ = on;
    if (on) dummy_ = false;
    return *this;
}

Sigma3Instance& Sigma3Instance::with_constant_beyond(Index n, Index m, Index k) {
    constant_beyond_ = std::array<Index, 3>{n, m, k};
    return *this;
}

bool Sigma3Instance::eval(Index n, Index p, Index k) const {
    arith::EvalBudget budget(step_budget_);
    try {
        return kernel_(n, p, k, budget);
    } catch (const Error&) {
        throw;
    } catch (...) {
        // Budget exhaustion unwinds with a private tag type.
        throw KernelTimeout("n=" + std::to_string(n) + ", m=" + std::to_string(p) + ", k=" + std::to_string(k));
    }
}

// --- M(n) ------------------------------------------------------------------------

std::optional<std::uint64_t> mn_halting_time(const Sigma3Instance& instance, Index n, Index m, std::uint64_t cap,
                                             const std::function<void(Index, Index)>& trace) {
    if (cap < 1) throw DomainError("cap must be at least 1");
    std::vector<Index> lacking(m);
    for (Index p = 1; p <= m; ++p) lacking[p - 1] = p;
    std::uint64_t evaluations = 0;
    for (Index round = 1; !lacking.empty(); ++round) {
        std::vector<Index> still;
        for (auto p : lacking) {
            if (evaluations == cap) return std::nullopt;
            ++evaluations;
            if (trace) trace(p, round);
            if (!instance.eval(n, p, round)) still.push_back(p);
        }
        lacking = std::move(still);
    }
    return evaluations;
}

MnSemidecider::MnSemidecider(std::shared_ptr<const Sigma3Instance> instance, Index n)
    : instance_(std::move(instance)), n_(n) {}

bool MnSemidecider::extend(std::uint64_t limit) {
    const Index p = prefix_.size() + 1;
    const std::uint64_t base = prefix_.empty() ? 0 : prefix_.back();
    for (auto k = searched_ + 1; k <= limit; ++k) {
        if (instance_->eval(n_, p, k)) {
            prefix_.push_back(base + k);
            searched_ = 0;
            return true;
        }
        searched_ = k;
    }
    return false;
}

std::optional<std::uint64_t> MnSemidecider::halting_time(Index m, std::uint64_t cap) {
    if (m == 0) return 0;
    while (prefix_.size() < m) {
        const std::uint64_t base = prefix_.empty() ? 0 : prefix_.back();
        if (base >= cap || !extend(cap - base)) return std::nullopt;
    }
    return prefix_[m - 1] <= cap ? std::optional(prefix_[m - 1]) : std::nullopt;
}

bool MnSemidecider::halts_at(std::uint64_t s) {
    while (prefix_.empty() || prefix_.back() < s) {
        const std::uint64_t base = prefix_.empty() ? 0 : prefix_.back();
        if (!extend(s - base)) return false;
    }
    return std::binary_search(prefix_.begin(), prefix_.end(), s);
}

// --- MarkerRun --------------------------------------------------------------------

MarkerRun::MarkerRun(Sigma3Instance instance)
    : instance_(std::make_shared<const Sigma3Instance>(std::move(instance))) {
    if (instance_->zero_based() && instance_->dummy_marker())
        throw ShapeError("the zero-based variant has no dummy marker");
}

Index MarkerRun::slot_of(Index marker) const {
    return marker - instance_->first_marker() + (instance_->dummy_marker() ? 1 : 0);
}

void MarkerRun::ensure_slots(std::size_t count) const {
    while (complement_.size() < count) complement_.push_back(frontier_++);
}

void MarkerRun::advance(std::uint64_t stages) {
    for (std::uint64_t done = 0; done < stages; ++done) {
        const std::uint64_t s = ++stage_;
        const Index first = instance_->first_marker();
        // Markers first..s are examined in increasing order.
        while (machines_.size() < s - first + 1) machines_.emplace_back(instance_, first + machines_.size());
        for (Index i = first; i <= s; ++i) {
            bool moves = false;
            try {
                moves = machines_[i - first].halts_at(s);
            } catch (const KernelTimeout& e) {
                throw KernelTimeout(e.point(), "stage " + std::to_string(s) + ", marker " + std::to_string(i));
            }
            if (!moves) continue;
            // The marker leaves its cell, which joins W; every marker after it
            // shifts to its successor's cell, i.e. keeps its rank in the complement.
            const auto slot = slot_of(i);
            ensure_slots(slot + 1);
            const Index cell = complement_[slot];
            complement_.erase(complement_.begin() + static_cast<std::ptrdiff_t>(slot));
            if (in_w_.size() <= cell) in_w_.resize(cell + 1, 0);
            in_w_[cell] = 1;
            events_.push_back({s, i, cell + 1});
        }
    }
}

bool MarkerRun::enumerated(Index cell) const {
    if (cell == 0) return false;
    return cell - 1 < in_w_.size() && in_w_[cell - 1];
}

Index MarkerRun::marker_position(Index marker) const {
    if (marker < instance_->first_marker()) throw DomainError("no marker with that index");
    const auto slot = slot_of(marker);
    ensure_slots(slot + 1);
    return complement_[slot] + 1;
}

std::optional<Index> MarkerRun::dummy_position() const {
    if (!instance_->dummy_marker()) return std::nullopt;
    return Index{1};
}

MarkerRun run_markers(const Sigma3Instance& instance, std::uint64_t stages) {
    if (stages < 1) throw DomainError("stages must be at least 1");
    MarkerRun run(instance);
    run.advance(stages);
    return run;
}

Snapshot complement_snapshot(const MarkerRun& run, Index horizon) {
    if (horizon < 1) throw DomainError("horizon must be at least 1");
    Snapshot s;
    for (Index c = 1; c <= horizon; ++c)
        if (!run.enumerated(c)) s.cells.push_back(c);
    s.cardinality = s.cells.size();
    return s;
}

Stabilization run_until_stable(MarkerRun& run, Index horizon, std::uint64_t max_stages, std::uint64_t quiet_window,
                               const std::function<void(const MarkerRun&)>& on_stage) {
    Stabilization out;
    auto current = complement_snapshot(run, horizon);
    std::uint64_t quiet = 0;
    while (run.stage() < max_stages) {
        run.advance();
        if (on_stage) on_stage(run);
        auto next = complement_snapshot(run, horizon);
        quiet = next.cells == current.cells ? quiet + 1 : 0;
        current = std::move(next);
        const std::uint64_t window = quiet_window ? quiet_window : std::max<std::uint64_t>(64, 4 * current.cardinality);
        if (quiet >= window) {
            out.stabilized = true;
            break;
        }
    }
    out.stage = run.stage();
    out.snapshot = std::move(current);
    return out;
}

std::optional<Index> brute_force_min_n(const Sigma3Instance& instance, Box box) {
    const auto& declared = instance.constant_beyond();
    if (!declared)
        throw Unsupported("brute-force oracle needs a kernel declared constant beyond its bounds");
    if (box.m < (*declared)[1] || box.k < (*declared)[2])
        throw DomainError("box must cover the declared bounds in m and k");
    if (box.m < 1 || box.k < 1) throw DomainError("box bounds must be at least 1");

    using arith::Block;
    using arith::Quantifier;
    arith::Kernel kernel;
    kernel.step_budget = UINT64_MAX;
    kernel.eval = [&instance](std::span<const Value> args, arith::EvalBudget&) {
        return instance.eval(static_cast<Index>(args[2]), static_cast<Index>(args[0]), static_cast<Index>(args[1]));
    };
    const arith::PrenexFormula inner({{Quantifier::ForAll, "m"}, {Quantifier::Exists, "k"}}, std::move(kernel), {"n"});
    for (Index n = instance.first_marker(); n <= box.n; ++n) {
        if (arith::bounded_eval(inner, {{"m", box.m}, {"k", box.k}}, {{"n", Value(n)}}).value) return n;
    }
    return std::nullopt;
}

arith::TableKernel random_sigma3_table(std::uint64_t seed, Index max_n, Index max_m, Index max_k,
                                       std::uint64_t origin) {
    if (max_n < std::max<Index>(origin, 1) || max_m < 1 || max_k < 1)
        throw DomainError("random table bounds too small");
    std::mt19937_64 rng(seed);
    auto uniform = [&rng](Index lo, Index hi) { return std::uniform_int_distribution<Index>(lo, hi)(rng); };
    const Index bn = uniform(std::max<Index>(origin, 1), max_n);
    const Index bm = uniform(1, max_m);
    const Index bk = uniform(1, max_k);
    std::bernoulli_distribution witnessed(0.6);
    std::vector<std::vector<std::uint64_t>> support;
    for (Index n = origin; n <= bn; ++n) {
        for (Index p = origin; p <= bm; ++p) {
            if (n != bn && !witnessed(rng)) continue;
            const Index w = uniform(1, bk);
            for (Index k = std::max<Index>(w, origin); k <= bk; ++k) support.push_back({n, p, k});
        }
    }
    return arith::TableKernel({"n", "m", "k"}, {bn, bm, bk}, false, std::move(support), origin, seed);
}

}  // namespace hierarch::markers
