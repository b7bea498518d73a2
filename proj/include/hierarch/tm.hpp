#pragma once

// Deterministic binary Turing machines: tables, simulation, canonical
// enumeration and exhaustive busy-beaver search.

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace hierarch::tm {

enum class Move : std::uint8_t { Left = 0, Right = 1 };

/// Target state index used for the halting transition. Real states are 1..n.
inline constexpr std::uint8_t kHalt = 0;

struct Transition {
    std::uint8_t write = 0;
    Move move = Move::Right;
    std::uint8_t next = kHalt;

    bool halts() const noexcept { return next == kHalt; }
    friend bool operator==(const Transition&, const Transition&) = default;
};

/// A total transition table over the alphabet {0,1}. Immutable once built;
/// the constructor rejects anything that is not well formed.
class TMachine {
public:
    /// `table` holds 2*states entries, row-major: (state 1, 0), (state 1, 1),
    /// (state 2, 0), ...
    TMachine(int states, std::vector<Transition> table);

    /// Parses `n; s,b -> w,D,t | ...`. Every (state, symbol) pair must be
    /// listed exactly once.
    static TMachine parse(std::string_view text);
    std::string to_text() const;

    int states() const noexcept { return states_; }
    const Transition& at(int state, int symbol) const { return table_[index(state, symbol)]; }
    std::span<const Transition> table() const noexcept { return table_; }

    /// Left/right swapped copy.
    TMachine mirrored() const;
    /// Copy with states renamed by `perm` (perm[old] = new, perm[0] = 0 for HALT).
    TMachine renamed(std::span<const int> perm) const;

    friend bool operator==(const TMachine&, const TMachine&) = default;

private:
    static std::size_t index(int state, int symbol) { return static_cast<std::size_t>((state - 1) * 2 + symbol); }

    int states_;
    std::vector<Transition> table_;
};

/// Lexicographic order of table encodings; defines canonical order.
std::strong_ordering compare_tables(const TMachine& a, const TMachine& b);

struct TapeSummary {
    std::int64_t leftmost = 0;   ///< smallest visited cell (origin = 0)
    std::int64_t rightmost = 0;  ///< largest visited cell
    std::int64_t head = 0;
    std::string cells;           ///< '0'/'1' for leftmost..rightmost

    friend bool operator==(const TapeSummary&, const TapeSummary&) = default;
};

struct Halted {
    std::uint64_t steps = 0;
    std::uint64_t ones_written = 0;  ///< ones left on the tape at halt
    friend bool operator==(const Halted&, const Halted&) = default;
};

struct BudgetExhausted {
    std::uint64_t budget = 0;
    friend bool operator==(const BudgetExhausted&, const BudgetExhausted&) = default;
};

struct RunResult {
    std::variant<Halted, BudgetExhausted> outcome;
    TapeSummary tape;
    int final_state = 1;  ///< 0 once halted

    bool halted() const noexcept { return std::holds_alternative<Halted>(outcome); }
    const Halted& halt() const { return std::get<Halted>(outcome); }
    friend bool operator==(const RunResult&, const RunResult&) = default;
};

/// Two-sided binary tape, blank 0, growing on demand.
class Tape {
public:
    std::uint8_t read() const noexcept { return cells_[pos_]; }
    void write(std::uint8_t symbol) noexcept { cells_[pos_] = symbol; }
    void move(Move m);
    std::int64_t head() const noexcept { return static_cast<std::int64_t>(pos_) - origin_; }
    std::uint64_t ones() const noexcept;
    TapeSummary summary() const;

private:
    std::vector<std::uint8_t> cells_ = std::vector<std::uint8_t>(1, 0);
    std::size_t pos_ = 0;
    std::int64_t origin_ = 0;  ///< index of cell 0 inside cells_
    std::int64_t leftmost_ = 0, rightmost_ = 0;
};

/// Simulates from the blank tape, head at 0, state 1. A halting transition
/// counts as a step. Throws DomainError when budget is 0.
RunResult run(const TMachine& machine, std::uint64_t budget);

// ---------------------------------------------------------------------------
// Enumeration

inline constexpr int kDefaultStateCap = 4;

/// The active cap: kDefaultStateCap unless HIERARCH_CAP_STATES raises it.
int state_cap();

/// True when `m` is the representative of its class under mirroring and
/// renaming of the non-start states: (1,0) moves right and the table is
/// lexicographically least among all renamings.
bool is_canonical(const TMachine& m);

/// Representative of the class of `m`.
TMachine canonical_form(const TMachine& m);

/// Lazy stream of canonical n-state machines in canonical order. The
/// underlying raw index space can be sliced with [begin, end) so workers
/// can split it.
class MachineEnumerator {
public:
    explicit MachineEnumerator(int n_states);
    MachineEnumerator(int n_states, std::uint64_t begin, std::uint64_t end);

    /// Number of raw tables whose (1,0) transition moves right.
    static std::uint64_t raw_space(int n_states);

    std::optional<TMachine> next();
    /// Raw index of the machine most recently returned by next().
    std::uint64_t last_index() const noexcept { return cursor_ - 1; }

private:
    TMachine decode(std::uint64_t index) const;

    int n_;
    std::uint64_t cursor_;
    std::uint64_t end_;
};

/// Collects the whole canonical stream. Throws CapExceeded above state_cap().
std::vector<TMachine> enumerate_machines(int n_states);

// ---------------------------------------------------------------------------
// Halting analysis and search

enum class Verdict { Halts, NeverHalts, Unresolved };

enum class Proof {
    None,
    NoHaltTransition,  ///< no transition targets HALT
    HaltUnreachable,   ///< HALT not reachable in the state graph from 1
    Cycle,             ///< exact configuration repeated
    TranslatedCycle,   ///< configuration repeated up to translation at a record
    ClosedPositionSet, ///< a closed abstract configuration set avoids HALT
};

struct Decision {
    Verdict verdict = Verdict::Unresolved;
    Proof proof = Proof::None;
    std::uint64_t steps = 0;  ///< halting time when verdict == Halts
    std::uint64_t ones = 0;
};

/// Runs `machine` for at most `budget` steps and tries to prove non-halting
/// with the static checks, the repeated-configuration detectors and, for
/// whatever is left, closed position sets.
Decision decide(const TMachine& machine, std::uint64_t budget);

/// Half-tape abstraction used by closed_position_set(): the automaton reads a
/// half-tape from its far (blank) end towards the head and remembers the last
/// `window` cells plus a counter modulo `modulus`.
struct HalfTapeAutomaton {
    enum class Counter {
        Ones,              ///< number of ones
        SinceFirstOne,     ///< cells read since the farthest one
    };
    int window = 1;
    int modulus = 1;
    Counter counter = Counter::Ones;
};

/// Sound non-halting test: explores abstract configurations (state, left
/// automaton state, head symbol, right automaton state) to a fixpoint. True
/// means no halting transition is reachable, hence the machine never halts
/// from the blank tape. False means nothing.
bool closed_position_set(const TMachine& machine, const HalfTapeAutomaton& automaton);

std::string_view proof_name(Proof p);

struct BusyBeaverRecord {
    int n_states = 0;
    std::uint64_t budget = 0;
    std::uint64_t best_steps = 0;
    std::vector<TMachine> champions;  ///< canonical order
    std::uint64_t unresolved = 0;
    std::uint64_t examined = 0;
    std::uint64_t halting = 0;
    std::uint64_t proven_nonhalting = 0;

    bool exact() const noexcept { return unresolved == 0; }
    friend bool operator==(const BusyBeaverRecord&, const BusyBeaverRecord&) = default;
};

/// Exhaustive search over the canonical stream. The result does not depend
/// on `workers`.
BusyBeaverRecord busy_beaver_search(int n_states, std::uint64_t budget, int workers = 1);

}  // namespace hierarch::tm
