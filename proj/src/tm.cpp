#include "hierarch/tm.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <numeric>
#include <sstream>
#include <thread>

#include "hierarch/errors.hpp"
#include "text.hpp"

namespace hierarch::tm {

namespace {

using text::parse_int;
using text::split;
using text::trim;

constexpr int kMaxStates = 250;

// Sort key of one transition; table order is the lexicographic order of keys.
unsigned key(const Transition& t) {
    return static_cast<unsigned>(t.next) * 4u + static_cast<unsigned>(t.write) * 2u +
           static_cast<unsigned>(t.move);
}

}  // namespace

TMachine::TMachine(int states, std::vector<Transition> table) : states_(states), table_(std::move(table)) {
    if (states_ < 1 || states_ > kMaxStates)
        throw ValidationError("state count must be in 1.." + std::to_string(kMaxStates));
    if (table_.size() != static_cast<std::size_t>(2 * states_))
        throw ValidationError("transition table must have " + std::to_string(2 * states_) + " entries, got " +
                              std::to_string(table_.size()));
    for (std::size_t i = 0; i < table_.size(); ++i) {
        const auto& t = table_[i];
        const auto where = "(" + std::to_string(i / 2 + 1) + "," + std::to_string(i % 2) + ")";
        if (t.write > 1) throw ValidationError("transition " + where + " writes a non-binary symbol");
        if (t.next > states_) throw ValidationError("transition " + where + " targets unknown state");
        if (t.move != Move::Left && t.move != Move::Right)
            throw ValidationError("transition " + where + " has an invalid move");
    }
}

TMachine TMachine::parse(std::string_view text) {
    text = trim(text);
    auto semi = text.find(';');
    if (semi == std::string_view::npos) throw ValidationError("machine text lacks 'n_states;' header");
    const int n = parse_int(text.substr(0, semi), "state count");
    if (n < 1 || n > kMaxStates) throw ValidationError("state count must be in 1.." + std::to_string(kMaxStates));

    std::vector<std::optional<Transition>> slots(static_cast<std::size_t>(2 * n));
    auto body = trim(text.substr(semi + 1));
    if (!body.empty()) {
        for (auto item : split(body, '|')) {
            item = trim(item);
            auto arrow = item.find("->");
            if (arrow == std::string_view::npos) throw ValidationError("transition lacks '->': " + std::string(item));
            auto lhs = split(item.substr(0, arrow), ',');
            auto rhs = split(item.substr(arrow + 2), ',');
            if (lhs.size() != 2 || rhs.size() != 3)
                throw ValidationError("transition must read 's,b -> w,D,t': " + std::string(item));
            const int s = parse_int(lhs[0], "state");
            const int b = parse_int(lhs[1], "symbol");
            if (s < 1 || s > n || (b != 0 && b != 1))
                throw ValidationError("transition source out of range: " + std::string(item));
            Transition t;
            const int w = parse_int(rhs[0], "write symbol");
            if (w != 0 && w != 1) throw ValidationError("write symbol must be 0 or 1: " + std::string(item));
            t.write = static_cast<std::uint8_t>(w);
            auto d = trim(rhs[1]);
            if (d == "L") t.move = Move::Left;
            else if (d == "R") t.move = Move::Right;
            else throw ValidationError("direction must be L or R: " + std::string(item));
            auto target = trim(rhs[2]);
            if (target == "H") {
                t.next = kHalt;
            } else {
                const int to = parse_int(target, "target state");
                if (to < 1 || to > n) throw ValidationError("target state out of range: " + std::string(item));
                t.next = static_cast<std::uint8_t>(to);
            }
            auto& slot = slots[static_cast<std::size_t>((s - 1) * 2 + b)];
            if (slot) throw ValidationError("duplicate transition for (" + std::to_string(s) + "," + std::to_string(b) + ")");
            slot = t;
        }
    }
    std::vector<Transition> table;
    table.reserve(slots.size());
    for (std::size_t i = 0; i < slots.size(); ++i) {
        if (!slots[i])
            throw ValidationError("missing transition for (" + std::to_string(i / 2 + 1) + "," + std::to_string(i % 2) + ")");
        table.push_back(*slots[i]);
    }
    return TMachine(n, std::move(table));
}

std::string TMachine::to_text() const {
    std::string out = std::to_string(states_) + ";";
    for (std::size_t i = 0; i < table_.size(); ++i) {
        const auto& t = table_[i];
        out += i == 0 ? " " : " | ";
        out += std::to_string(i / 2 + 1) + "," + std::to_string(i % 2) + " -> " + std::to_string(t.write) + "," +
               (t.move == Move::Left ? "L" : "R") + "," + (t.halts() ? std::string("H") : std::to_string(t.next));
    }
    return out;
}

TMachine TMachine::mirrored() const {
    auto table = table_;
    for (auto& t : table) t.move = t.move == Move::Left ? Move::Right : Move::Left;
    return TMachine(states_, std::move(table));
}

TMachine TMachine::renamed(std::span<const int> perm) const {
    std::vector<Transition> table(table_.size());
    for (int s = 1; s <= states_; ++s) {
        for (int b = 0; b < 2; ++b) {
            auto t = at(s, b);
            t.next = static_cast<std::uint8_t>(perm[t.next]);
            table[index(perm[s], b)] = t;
        }
    }
    return TMachine(states_, std::move(table));
}

std::strong_ordering compare_tables(const TMachine& a, const TMachine& b) {
    if (auto c = a.states() <=> b.states(); c != 0) return c;
    for (std::size_t i = 0; i < a.table().size(); ++i) {
        if (auto c = key(a.table()[i]) <=> key(b.table()[i]); c != 0) return c;
    }
    return std::strong_ordering::equal;
}

// --- Tape -------------------------------------------------------------------

void Tape::move(Move m) {
    if (m == Move::Right) {
        if (++pos_ == cells_.size()) cells_.push_back(0);
    } else if (pos_ == 0) {
        // Grow leftwards in chunks so long left-moving runs stay linear.
        const std::size_t grow = std::max<std::size_t>(16, cells_.size());
        cells_.insert(cells_.begin(), grow, 0);
        origin_ += static_cast<std::int64_t>(grow);
        pos_ = grow - 1;
    } else {
        --pos_;
    }
    leftmost_ = std::min(leftmost_, head());
    rightmost_ = std::max(rightmost_, head());
}

std::uint64_t Tape::ones() const noexcept {
    return static_cast<std::uint64_t>(std::count(cells_.begin(), cells_.end(), std::uint8_t{1}));
}

TapeSummary Tape::summary() const {
    TapeSummary s{leftmost_, rightmost_, head(), {}};
    s.cells.reserve(static_cast<std::size_t>(rightmost_ - leftmost_ + 1));
    for (auto c = leftmost_; c <= rightmost_; ++c)
        s.cells.push_back(cells_[static_cast<std::size_t>(c + origin_)] ? '1' : '0');
    return s;
}

// --- Simulation -------------------------------------------------------------

RunResult run(const TMachine& machine, std::uint64_t budget) {
    if (budget == 0) throw DomainError("budget must be at least 1");
    Tape tape;
    int state = 1;
    for (std::uint64_t step = 1; step <= budget; ++step) {
        const auto& t = machine.at(state, tape.read());
        tape.write(t.write);
        tape.move(t.move);
        if (t.halts()) return RunResult{Halted{step, tape.ones()}, tape.summary(), 0};
        state = t.next;
    }
    return RunResult{BudgetExhausted{budget}, tape.summary(), state};
}

// --- Enumeration ------------------------------------------------------------

int state_cap() {
    if (const char* env = std::getenv("HIERARCH_CAP_STATES")) {
        int v = 0;
        std::string_view s(env);
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec == std::errc{} && p == s.data() + s.size() && v > kDefaultStateCap) return std::min(v, 8);
    }
    return kDefaultStateCap;
}

namespace {

// Calls f(perm) for every renaming fixing 0 (HALT) and 1 (start).
template <class F>
void for_each_renaming(int n, F&& f) {
    std::vector<int> tail(static_cast<std::size_t>(std::max(0, n - 1)));
    std::iota(tail.begin(), tail.end(), 2);
    std::vector<int> perm(static_cast<std::size_t>(n + 1));
    do {
        perm[0] = 0;
        perm[1] = 1;
        for (std::size_t i = 0; i < tail.size(); ++i) perm[i + 2] = tail[i];
        f(std::span<const int>(perm));
    } while (std::next_permutation(tail.begin(), tail.end()));
}

}  // namespace

bool is_canonical(const TMachine& m) {
    if (m.at(1, 0).move != Move::Right) return false;
    bool least = true;
    for_each_renaming(m.states(), [&](std::span<const int> perm) {
        if (least && compare_tables(m.renamed(perm), m) < 0) least = false;
    });
    return least;
}

TMachine canonical_form(const TMachine& m) {
    const TMachine oriented = m.at(1, 0).move == Move::Right ? m : m.mirrored();
    TMachine best = oriented;
    for_each_renaming(m.states(), [&](std::span<const int> perm) {
        auto candidate = oriented.renamed(perm);
        if (compare_tables(candidate, best) < 0) best = std::move(candidate);
    });
    return best;
}

std::uint64_t MachineEnumerator::raw_space(int n) {
    const std::uint64_t radix = 4u * static_cast<std::uint64_t>(n + 1);
    std::uint64_t total = 2u * static_cast<std::uint64_t>(n + 1);
    for (int i = 1; i < 2 * n; ++i) total *= radix;
    return total;
}

MachineEnumerator::MachineEnumerator(int n_states) : MachineEnumerator(n_states, 0, UINT64_MAX) {}

MachineEnumerator::MachineEnumerator(int n_states, std::uint64_t begin, std::uint64_t end) : n_(n_states) {
    if (n_states < 1) throw DomainError("state count must be at least 1");
    const int cap = state_cap();
    if (n_states > cap)
        throw CapExceeded("enumeration is capped at " + std::to_string(cap) +
                          " states (raise with HIERARCH_CAP_STATES)");
    end_ = std::min(end, raw_space(n_states));
    cursor_ = std::min(begin, end_);
}

TMachine MachineEnumerator::decode(std::uint64_t index) const {
    const std::uint64_t radix = 4u * static_cast<std::uint64_t>(n_ + 1);
    std::vector<Transition> table(static_cast<std::size_t>(2 * n_));
    for (std::size_t i = table.size(); i-- > 1;) {
        const auto digit = static_cast<unsigned>(index % radix);
        index /= radix;
        table[i] = Transition{static_cast<std::uint8_t>((digit >> 1) & 1u), static_cast<Move>(digit & 1u),
                              static_cast<std::uint8_t>(digit >> 2)};
    }
    // (1,0) always moves right; its digit holds (next, write).
    const auto digit = static_cast<unsigned>(index);
    table[0] = Transition{static_cast<std::uint8_t>(digit & 1u), Move::Right, static_cast<std::uint8_t>(digit >> 1)};
    return TMachine(n_, std::move(table));
}

std::optional<TMachine> MachineEnumerator::next() {
    while (cursor_ < end_) {
        auto m = decode(cursor_++);
        if (is_canonical(m)) return m;
    }
    return std::nullopt;
}

std::vector<TMachine> enumerate_machines(int n_states) {
    MachineEnumerator e(n_states);
    std::vector<TMachine> out;
    while (auto m = e.next()) out.push_back(std::move(*m));
    return out;
}

// --- Deciders ---------------------------------------------------------------

std::string_view proof_name(Proof p) {
    switch (p) {
        case Proof::None: return "none";
        case Proof::NoHaltTransition: return "no-halt-transition";
        case Proof::HaltUnreachable: return "halt-unreachable";
        case Proof::Cycle: return "cycle";
        case Proof::TranslatedCycle: return "translated-cycle";
        case Proof::ClosedPositionSet: return "closed-position-set";
    }
    return "none";
}

namespace {

bool halt_reachable(const TMachine& m) {
    std::vector<char> seen(static_cast<std::size_t>(m.states() + 1), 0);
    std::vector<int> stack{1};
    seen[1] = 1;
    while (!stack.empty()) {
        const int s = stack.back();
        stack.pop_back();
        for (int b = 0; b < 2; ++b) {
            const auto& t = m.at(s, b);
            if (t.halts()) return true;
            if (!seen[t.next]) {
                seen[t.next] = 1;
                stack.push_back(t.next);
            }
        }
    }
    return false;
}

// Snapshot taken when the head reaches a new extreme cell. `cells` holds the
// tape from the far side of the visited span up to (and including) the head.
struct Record {
    std::uint64_t step;
    int state;
    std::int64_t pos;
    std::vector<std::uint8_t> cells;  // ordered outward from the head
};

// Flat tape sized for the budget; no bounds growth during the hot loop.
class FlatRun {
public:
    FlatRun(const TMachine& m, std::uint64_t budget)
        : m_(m), width_(static_cast<std::int64_t>(budget) + 2), tape_(static_cast<std::size_t>(2 * width_ + 1), 0) {}

    Decision go(std::uint64_t budget) {
        // Brent-style exact-cycle snapshot.
        std::uint64_t snap_step = 0, snap_power = 1;
        int snap_state = 1;
        std::int64_t snap_head = 0, snap_lo = 0;
        std::vector<std::uint8_t> snap_cells{0};

        std::vector<Record> right_records, left_records;
        std::vector<std::int64_t> heads;  // head position after each step
        heads.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(budget, 1u << 20)) + 1);
        heads.push_back(0);

        for (std::uint64_t step = 1; step <= budget; ++step) {
            auto& cell = at(head_);
            const auto& t = m_.at(state_, cell);
            cell = t.write;
            head_ += t.move == Move::Right ? 1 : -1;
            if (t.halts()) {
                Decision d{Verdict::Halts, Proof::None, step, 0};
                for (auto c : tape_) d.ones += c;
                return d;
            }
            state_ = t.next;
            heads.push_back(head_);

            if (head_ > hi_) {
                hi_ = head_;
                if (check_translated(right_records, heads, step, +1)) return never(Proof::TranslatedCycle);
            } else if (head_ < lo_) {
                lo_ = head_;
                if (check_translated(left_records, heads, step, -1)) return never(Proof::TranslatedCycle);
            } else if (state_ == snap_state && head_ == snap_head && same_as_snapshot(snap_lo, snap_cells)) {
                return never(Proof::Cycle);
            }

            if (step - snap_step == snap_power) {
                snap_step = step;
                snap_power *= 2;
                snap_state = state_;
                snap_head = head_;
                snap_lo = lo_;
                snap_cells.assign(&at(lo_), &at(hi_) + 1);
            }
        }
        return Decision{};
    }

private:
    std::uint8_t& at(std::int64_t pos) { return tape_[static_cast<std::size_t>(pos + width_)]; }

    static Decision never(Proof p) { return Decision{Verdict::NeverHalts, p, 0, 0}; }

    bool same_as_snapshot(std::int64_t snap_lo, const std::vector<std::uint8_t>& snap) {
        // Both spans are within [lo_, hi_]; cells outside the snapshot were blank then.
        const std::int64_t snap_hi = snap_lo + static_cast<std::int64_t>(snap.size()) - 1;
        for (auto p = lo_; p <= hi_; ++p) {
            const std::uint8_t then = (p >= snap_lo && p <= snap_hi) ? snap[static_cast<std::size_t>(p - snap_lo)] : 0;
            if (at(p) != then) return false;
        }
        return true;
    }

    // A new record at `pos` in state q. If an earlier record in the same
    // direction and state saw the same cells within the span the head used
    // since then, the segment of behaviour repeats shifted forever.
    bool check_translated(std::vector<Record>& records, const std::vector<std::int64_t>& heads, std::uint64_t step,
                          int dir) {
        Record now{step, state_, head_, {}};
        const std::int64_t far = dir > 0 ? lo_ : hi_;
        for (std::int64_t p = head_;; p -= dir) {
            now.cells.push_back(at(p));
            if (p == far) break;
        }
        for (const auto& r : records) {
            if (r.state != now.state) continue;
            // Largest backwards excursion from the earlier record, relative to it.
            std::int64_t reach = 0;
            for (auto i = r.step; i <= step; ++i) reach = std::max(reach, (r.pos - heads[i]) * dir);
            const auto need = static_cast<std::size_t>(reach) + 1;
            auto cell = [](const std::vector<std::uint8_t>& v, std::size_t i) -> std::uint8_t {
                return i < v.size() ? v[i] : 0;
            };
            bool same = true;
            for (std::size_t i = 0; i < need && same; ++i) same = cell(r.cells, i) == cell(now.cells, i);
            if (same) return true;
        }
        records.push_back(std::move(now));
        return false;
    }

    const TMachine& m_;
    std::int64_t width_;
    std::vector<std::uint8_t> tape_;
    std::int64_t head_ = 0, lo_ = 0, hi_ = 0;
    int state_ = 1;
};

}  // namespace

namespace {

class Automaton {
public:
    explicit Automaton(const HalfTapeAutomaton& a)
        : window_mask_((1u << a.window) - 1), shift_(static_cast<unsigned>(a.window)),
          modulus_(static_cast<unsigned>(a.modulus)), counter_(a.counter) {}

    // State 0 is the blank half-tape and is fixed by reading 0.
    unsigned size() const {
        return (window_mask_ + 1) * (counter_ == HalfTapeAutomaton::Counter::Ones ? modulus_ : modulus_ + 1);
    }

    unsigned step(unsigned s, unsigned symbol) const {
        const unsigned win = ((s << 1) | symbol) & window_mask_;
        unsigned c = s >> shift_;
        if (counter_ == HalfTapeAutomaton::Counter::Ones) {
            c = (c + symbol) % modulus_;
        } else if (c == 0) {
            c = symbol;  // 0 = no one seen yet
        } else {
            c = 1 + c % modulus_;
        }
        return win | (c << shift_);
    }

private:
    unsigned window_mask_;
    unsigned shift_;
    unsigned modulus_;
    HalfTapeAutomaton::Counter counter_;
};

}  // namespace

bool closed_position_set(const TMachine& machine, const HalfTapeAutomaton& spec) {
    if (spec.window < 1 || spec.window > 12 || spec.modulus < 1 || spec.modulus > 16)
        throw DomainError("half-tape automaton parameters out of range");
    const Automaton dfa(spec);
    const unsigned size = dfa.size();

    // prefixes[side][s]: s is the automaton state of some prefix (read from the
    // far end) of some reachable half-tape on that side.
    std::vector<char> prefixes[2] = {std::vector<char>(size, 0), std::vector<char>(size, 0)};
    prefixes[0][0] = prefixes[1][0] = 1;

    struct Config {
        int state;
        unsigned left, head, right;
    };
    const auto config_id = [&](const Config& c) {
        return ((static_cast<std::size_t>(c.state) * size + c.left) * 2 + c.head) * size + c.right;
    };
    std::vector<char> seen(static_cast<std::size_t>(machine.states() + 1) * size * 2 * size);

    for (bool grew = true; grew;) {
        grew = false;
        std::fill(seen.begin(), seen.end(), 0);
        std::vector<Config> stack{{1, 0, 0, 0}};
        seen[config_id(stack.back())] = 1;
        while (!stack.empty()) {
            const Config c = stack.back();
            stack.pop_back();
            const auto& t = machine.at(c.state, static_cast<int>(c.head));
            if (t.halts()) return false;
            const bool right = t.move == Move::Right;
            // Moving right pushes the written cell onto the left half and pops the right half.
            auto& pushed_side = prefixes[right ? 0 : 1];
            const auto& popped_side = prefixes[right ? 1 : 0];
            const unsigned pushed = dfa.step(right ? c.left : c.right, t.write);
            if (!pushed_side[pushed]) {
                pushed_side[pushed] = 1;
                grew = true;
            }
            const unsigned popped_from = right ? c.right : c.left;
            for (unsigned s = 0; s < size; ++s) {
                if (!popped_side[s]) continue;
                for (unsigned a = 0; a < 2; ++a) {
                    if (dfa.step(s, a) != popped_from) continue;
                    const Config n = right ? Config{t.next, pushed, a, s} : Config{t.next, s, a, pushed};
                    auto& mark = seen[config_id(n)];
                    if (!mark) {
                        mark = 1;
                        stack.push_back(n);
                    }
                }
            }
        }
    }
    return true;
}

Decision decide(const TMachine& machine, std::uint64_t budget) {
    if (budget == 0) throw DomainError("budget must be at least 1");
    const auto table = machine.table();
    if (std::none_of(table.begin(), table.end(), [](const Transition& t) { return t.halts(); }))
        return Decision{Verdict::NeverHalts, Proof::NoHaltTransition, 0, 0};
    if (!halt_reachable(machine)) return Decision{Verdict::NeverHalts, Proof::HaltUnreachable, 0, 0};
    auto d = FlatRun(machine, budget).go(budget);
    if (d.verdict != Verdict::Unresolved) return d;

    using Counter = HalfTapeAutomaton::Counter;
    for (auto counter : {Counter::Ones, Counter::SinceFirstOne}) {
        for (int modulus = 1; modulus <= 4; ++modulus) {
            for (int window = 1; window <= 6; ++window) {
                if (closed_position_set(machine, {window, modulus, counter}))
                    return Decision{Verdict::NeverHalts, Proof::ClosedPositionSet, 0, 0};
            }
        }
    }
    return d;
}

// --- Search -----------------------------------------------------------------

namespace {

struct Partial {
    BusyBeaverRecord rec;
    std::vector<std::uint64_t> champion_index;
};

void merge_into(Partial& into, Partial&& from) {
    into.rec.examined += from.rec.examined;
    into.rec.halting += from.rec.halting;
    into.rec.proven_nonhalting += from.rec.proven_nonhalting;
    into.rec.unresolved += from.rec.unresolved;
    if (from.rec.best_steps > into.rec.best_steps) {
        into.rec.best_steps = from.rec.best_steps;
        into.rec.champions = std::move(from.rec.champions);
        into.champion_index = std::move(from.champion_index);
    } else if (from.rec.best_steps == into.rec.best_steps) {
        for (std::size_t i = 0; i < from.rec.champions.size(); ++i) {
            into.rec.champions.push_back(std::move(from.rec.champions[i]));
            into.champion_index.push_back(from.champion_index[i]);
        }
    }
}

Partial search_slice(int n, std::uint64_t budget, std::uint64_t begin, std::uint64_t end) {
    Partial p;
    MachineEnumerator e(n, begin, end);
    while (auto m = e.next()) {
        ++p.rec.examined;
        const auto d = decide(*m, budget);
        switch (d.verdict) {
            case Verdict::Halts:
                ++p.rec.halting;
                if (d.steps > p.rec.best_steps) {
                    p.rec.best_steps = d.steps;
                    p.rec.champions.clear();
                    p.champion_index.clear();
                }
                if (d.steps == p.rec.best_steps) {
                    p.rec.champions.push_back(*m);
                    p.champion_index.push_back(e.last_index());
                }
                break;
            case Verdict::NeverHalts: ++p.rec.proven_nonhalting; break;
            case Verdict::Unresolved: ++p.rec.unresolved; break;
        }
    }
    return p;
}

}  // namespace

BusyBeaverRecord busy_beaver_search(int n_states, std::uint64_t budget, int workers) {
    if (budget == 0) throw DomainError("budget must be at least 1");
    if (workers < 1) throw DomainError("workers must be at least 1");
    MachineEnumerator probe(n_states);  // validates the cap
    const auto space = MachineEnumerator::raw_space(n_states);

    // Fixed slicing independent of the worker count keeps the merge order fixed.
    const std::uint64_t slices = std::min<std::uint64_t>(space, 64);
    std::vector<Partial> parts(slices);
    auto bound = [&](std::uint64_t i) { return space / slices * i + std::min(i, space % slices); };

    if (workers == 1) {
        for (std::uint64_t i = 0; i < slices; ++i) parts[i] = search_slice(n_states, budget, bound(i), bound(i + 1));
    } else {
        std::vector<std::thread> pool;
        std::atomic<std::uint64_t> next{0};
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::uint64_t i; (i = next.fetch_add(1)) < slices;)
                    parts[i] = search_slice(n_states, budget, bound(i), bound(i + 1));
            });
        }
        for (auto& t : pool) t.join();
    }

    Partial total;
    for (auto& p : parts) merge_into(total, std::move(p));
    total.rec.n_states = n_states;
    total.rec.budget = budget;
    return total.rec;
}

}  // namespace hierarch::tm
