#pragma once

// Prenex arithmetic predicates over the naturals: classification, the
// pairing bijection, quantifier merging, bounded and limit evaluation.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "hierarch/bigint.hpp"

namespace hierarch::arith {

using Value = BigInt;

enum class Quantifier { Exists, ForAll };

struct Block {
    Quantifier quantifier;
    std::string var;
    friend bool operator==(const Block&, const Block&) = default;
};

/// Step counter handed to kernels. Exhaustion unwinds the evaluation and is
/// reported by the caller as KernelTimeout with the offending point.
class EvalBudget {
public:
    explicit EvalBudget(std::uint64_t limit) : limit_(limit) {}
    void tick(std::uint64_t n = 1);
    std::uint64_t used() const noexcept { return used_; }

private:
    std::uint64_t limit_;
    std::uint64_t used_ = 0;
};

/// A total decidable predicate supplied as an evaluator.
struct Kernel {
    std::function<bool(std::span<const Value>, EvalBudget&)> eval;
    std::uint64_t step_budget = 1'000'000;
    /// When set, the kernel is constant along each argument beyond the given
    /// bound (one entry per argument). Bounded evaluation over a box covering
    /// these bounds is then exact.
    std::optional<std::vector<std::uint64_t>> constant_beyond;

    /// Evaluates with a fresh budget; throws KernelTimeout on exhaustion.
    bool operator()(std::span<const Value> args) const;
};

/// Value domain of quantified variables: {1,2,...} or {0,1,2,...}.
struct Domain {
    bool include_zero = false;
    std::uint64_t first() const noexcept { return include_zero ? 0 : 1; }
};

class PrenexFormula {
public:
    /// Kernel arguments are the prefix variables in order, then `free_vars`.
    PrenexFormula(std::vector<Block> prefix, Kernel kernel, std::vector<std::string> free_vars = {});

    const std::vector<Block>& prefix() const noexcept { return prefix_; }
    const std::vector<std::string>& free_vars() const noexcept { return free_vars_; }
    const Kernel& kernel() const noexcept { return kernel_; }
    std::size_t arity() const noexcept { return prefix_.size() + free_vars_.size(); }

private:
    std::vector<Block> prefix_;
    Kernel kernel_;
    std::vector<std::string> free_vars_;
};

enum class Side { Sigma, Pi };

struct HierarchyClass {
    Side side;
    int level;
    std::string to_string() const;  ///< "Sigma_3", "Pi_1", ...
    friend bool operator==(const HierarchyClass&, const HierarchyClass&) = default;
};

/// Side from the first quantifier, level = 1 + number of alternations.
HierarchyClass classify(const PrenexFormula& f);

/// (2*n1 - 1) * 2^(n2 - 1): a bijection from pairs of positive integers onto
/// the positive integers.
Value pair(const Value& n1, const Value& n2);
std::pair<Value, Value> unpair(const Value& code);

/// Replaces a leading ∃a∃b by a single ∃ over pair(a, b); the new kernel
/// evaluates the old one at unpair(N).
PrenexFormula merge_leading_exists(const PrenexFormula& f);

struct BoundedResult {
    bool value = false;
    /// Least witness of the leading variable: the smallest value making an
    /// ∃-formula true, or the smallest counterexample of a false ∀-formula.
    std::optional<Value> witness;
};

/// Evaluates the prefix over the box [first..bound] per quantified variable.
BoundedResult bounded_eval(const PrenexFormula& f, const std::map<std::string, std::uint64_t>& bounds,
                           const std::map<std::string, Value>& free = {}, Domain domain = {});

struct LimitResult {
    int bit = 0;
    std::uint64_t stabilized_for = 0;  ///< length of the final constant run
};

/// Evaluates g(n, 1..stages); the bit is provisional. Throws DomainError on a
/// non-binary value.
LimitResult limit_eval(const std::function<int(const Value&, std::uint64_t)>& g, const Value& n,
                       std::uint64_t stages);

// ---------------------------------------------------------------------------
// Table kernels: the JSON fixture format shared with the marker enumerator.
//
//   {"kind": "table-kernel", "vars": ["n","m","k"], "origin": 1,
//    "bounds": [3,1,1], "default": false, "support": [[3,1,1]], "seed": 7}
//
// The table covers origin..bound per coordinate; points in `support` take
// the negation of `default`. Outside the table every coordinate is clamped
// into range, so the kernel is constant beyond its bounds.

class TableKernel {
public:
    TableKernel(std::vector<std::string> vars, std::vector<std::uint64_t> bounds, bool default_value,
                std::vector<std::vector<std::uint64_t>> support, std::uint64_t origin = 1,
                std::optional<std::uint64_t> seed = std::nullopt);

    static TableKernel from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;

    const std::vector<std::string>& vars() const noexcept { return vars_; }
    const std::vector<std::uint64_t>& bounds() const noexcept { return bounds_; }
    std::uint64_t origin() const noexcept { return origin_; }
    std::optional<std::uint64_t> seed() const noexcept { return seed_; }

    bool at(std::span<const std::uint64_t> point) const;
    Kernel as_kernel() const;

    /// Kernel for QQ(n,m,k) = (n >= threshold).
    static TableKernel threshold(std::uint64_t threshold, std::uint64_t origin = 1);

private:
    std::size_t offset(std::span<const std::uint64_t> point) const;

    std::vector<std::string> vars_;
    std::vector<std::uint64_t> bounds_;
    std::uint64_t origin_;
    bool default_;
    std::vector<std::vector<std::uint64_t>> support_;
    std::vector<char> cells_;
    std::optional<std::uint64_t> seed_;
};

/// Formula fixture: {"prefix": [["E","n"],["A","m"],["E","k"]], "free": [],
/// "kernel": {table-kernel}}.
PrenexFormula formula_from_json(const nlohmann::json& j);

/// "n=3, m=1" style rendering of a point, used in error messages.
std::string format_point(std::span<const std::string> names, std::span<const Value> values);

}  // namespace hierarch::arith
