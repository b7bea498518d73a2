#pragma once

// Machines of order k: binary Turing machines with a separate write-only
// query tape and a QUERY action that asks a halting oracle about the
// machine whose text is spelled on the query tape.
//
// Query convention: the query tape holds 8-bit characters, most significant
// bit first, spelling machine text in the tm format. A QUERY transition
// consumes one step, decodes and clears the query tape, leaves the work tape
// untouched, and moves to its Yes or No successor.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "hierarch/tm.hpp"

namespace hierarch::oracle {

using StateId = std::uint32_t;

struct OracleTransition {
    enum class Kind : std::uint8_t { Step, Query };
    Kind kind = Kind::Step;
    // Step
    std::uint8_t write = 0;
    tm::Move move = tm::Move::Right;
    StateId next = 0;                   ///< 0 = HALT
    std::optional<std::uint8_t> emit;   ///< bit appended to the query tape
    // Query
    StateId yes = 0, no = 0;

    static OracleTransition step(std::uint8_t write, tm::Move move, StateId next,
                                 std::optional<std::uint8_t> emit = std::nullopt) {
        OracleTransition t;
        t.write = write;
        t.move = move;
        t.next = next;
        t.emit = emit;
        return t;
    }
    static OracleTransition query(StateId yes, StateId no) {
        OracleTransition t;
        t.kind = Kind::Query;
        t.yes = yes;
        t.no = no;
        return t;
    }
    friend bool operator==(const OracleTransition&, const OracleTransition&) = default;
};

class OracleMachine {
public:
    /// `order` is metadata: the machine expects an oracle for order-(k-1)
    /// halting. Table layout as in tm::TMachine.
    OracleMachine(StateId states, std::vector<OracleTransition> table, int order = 2);

    /// The tm format extended per transition with `w,D,t,q` (q = query bit)
    /// or `?Y/N` (query, branch to Y on yes and N on no). The header may read
    /// `n order k;`.
    static OracleMachine parse(std::string_view text);
    std::string to_text() const;

    /// The oracle-free machine seen as an order-k machine.
    static OracleMachine from_machine(const tm::TMachine& m, int order = 2);

    /// Spells `query` on the query tape, asks, halts on Yes and runs forever
    /// (moving right) on No.
    static OracleMachine asking(std::string_view query, int order = 2);

    StateId states() const noexcept { return states_; }
    int order() const noexcept { return order_; }
    const OracleTransition& at(StateId state, int symbol) const { return table_[(state - 1) * 2 + symbol]; }
    bool uses_oracle() const noexcept;

    friend bool operator==(const OracleMachine&, const OracleMachine&) = default;

private:
    StateId states_;
    std::vector<OracleTransition> table_;
    int order_;
};

enum class Answer { Yes, No };

std::string_view answer_name(Answer a);

struct QueryRecord {
    std::uint64_t step = 0;  ///< step at which the query was made
    std::string query;       ///< decoded query text
    Answer answer = Answer::No;
    friend bool operator==(const QueryRecord&, const QueryRecord&) = default;
};

/// Halting oracle for order-1 machines, with the transcript of a run.
class HaltingOracle {
public:
    /// Keys are machine texts; they are normalized through the tm parser so
    /// spacing differences do not matter.
    static HaltingOracle exact(const std::map<std::string, Answer>& table);
    /// {"<machine text>": "yes" | "no", ...}
    static HaltingOracle from_json(const nlohmann::json& j);
    /// Yes iff the queried machine halts within `budget` steps; malformed
    /// queries are answered No.
    static HaltingOracle budget_approx(std::uint64_t budget);

    bool approximate() const noexcept { return !table_; }
    std::optional<std::uint64_t> budget() const noexcept { return budget_; }

    /// Answers and records. Exact tables throw OracleIncomplete on a miss.
    Answer ask(const std::string& query, std::uint64_t step = 0);

    const std::vector<QueryRecord>& transcript() const noexcept { return transcript_; }
    void clear_transcript() noexcept { transcript_.clear(); }

private:
    HaltingOracle() = default;

    std::optional<std::map<std::string, Answer>> table_;
    std::optional<std::uint64_t> budget_;
    std::vector<QueryRecord> transcript_;
};

/// The computable stand-in for the order-(k-1) halting oracle. Only order 2
/// is supported: a genuine oracle for higher orders is not computable, and
/// stacked approximations would need an order-(k-1) machine text format.
HaltingOracle approximate_oracle(int order, std::uint64_t budget);

struct RelativizedResult {
    tm::RunResult run;
    std::vector<QueryRecord> transcript;  ///< the queries made by this run
    bool approximate = false;             ///< answers came from an approximate oracle
};

/// Same semantics as tm::run plus QUERY steps. Throws DomainError when
/// budget is 0 and OracleIncomplete when an exact table misses a query.
RelativizedResult run_relativized(const OracleMachine& machine, HaltingOracle& oracle, std::uint64_t budget);

/// 8-bit MSB-first encoding of text as query-tape bits, and its inverse. A
/// trailing partial byte is zero-padded.
std::vector<std::uint8_t> encode_query(std::string_view text);
std::string decode_query(const std::vector<std::uint8_t>& bits);

}  // namespace hierarch::oracle
