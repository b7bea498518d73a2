#include <doctest.h>

#include <random>

#include "hierarch/errors.hpp"
#include "hierarch/oracle.hpp"
#include "oracles.hpp"

using namespace hierarch;
using namespace hierarch::oracle;

namespace {

const char* kChampion2 = "2; 1,0 -> 1,R,2 | 1,1 -> 1,L,2 | 2,0 -> 1,L,1 | 2,1 -> 1,R,H";
const char* kChampion3 = "3; 1,0 -> 1,R,2 | 1,1 -> 0,L,H | 2,0 -> 1,L,2 | 2,1 -> 0,R,3 | 3,0 -> 1,L,3 | 3,1 -> 1,L,1";
const char* kLoop = "1; 1,0 -> 0,R,1 | 1,1 -> 0,R,1";
const char* kHalt = "1; 1,0 -> 1,R,H | 1,1 -> 1,R,H";

}  // namespace

TEST_CASE("query encoding round-trips") {
    const std::string text = kChampion2;
    const auto bits = encode_query(text);
    CHECK(bits.size() == text.size() * 8);
    CHECK(decode_query(bits) == text);
    // 'A' = 0x41
    CHECK(encode_query("A") == std::vector<std::uint8_t>{0, 1, 0, 0, 0, 0, 0, 1});
}

TEST_CASE("oracle machine text format") {
    const auto m = OracleMachine::parse("2 order 3; 1,0 -> 1,R,2,1 | 1,1 -> ?H/2 | 2,0 -> ?2/H | 2,1 -> 0,L,1");
    CHECK(m.order() == 3);
    CHECK(m.uses_oracle());
    CHECK(m.at(1, 1).kind == OracleTransition::Kind::Query);
    CHECK(m.at(1, 0).emit == std::optional<std::uint8_t>(1));
    CHECK(OracleMachine::parse(m.to_text()) == m);
    CHECK_THROWS_AS(OracleMachine::parse("1; 1,0 -> ?H | 1,1 -> 1,R,H"), ValidationError);
    CHECK_THROWS_AS(OracleMachine::parse("1; 1,0 -> 1,R,H"), ValidationError);
    // Oracle-free order-2 text is plain machine text.
    CHECK(OracleMachine::from_machine(tm::TMachine::parse(kChampion2)).to_text() == kChampion2);
}

TEST_CASE("oracle-free machines behave exactly as plain machines") {
    auto oracle = HaltingOracle::exact({});
    for (const char* text : {kChampion2, kChampion3, kLoop, kHalt}) {
        const auto m = tm::TMachine::parse(text);
        for (std::uint64_t b : {1, 5, 21, 100}) {
            const auto r = run_relativized(OracleMachine::from_machine(m), oracle, b);
            CHECK(r.run == tm::run(m, b));
            CHECK(r.transcript.empty());
        }
    }
}

TEST_CASE("forced branch on a fixed query") {
    const auto m = OracleMachine::asking(kChampion2);
    auto yes = HaltingOracle::exact({{kChampion2, Answer::Yes}});
    const auto r = run_relativized(m, yes, 100000);
    REQUIRE(r.run.halted());
    CHECK(r.run.halt().steps == std::string(kChampion2).size() * 8 + 1);
    REQUIRE(r.transcript.size() == 1);
    CHECK(r.transcript[0].query == kChampion2);
    CHECK(r.transcript[0].answer == Answer::Yes);
    CHECK_FALSE(r.approximate);

    auto no = HaltingOracle::exact({{kChampion2, Answer::No}});
    CHECK_FALSE(run_relativized(m, no, 100000).run.halted());
}

TEST_CASE("exact tables normalize keys and refuse misses") {
    // Extra spacing in the key still matches the machine's canonical text.
    auto spaced = HaltingOracle::exact({{"2;1,0->1,R,2|1,1->1,L,2|2,0->1,L,1|2,1->1,R,H", Answer::Yes}});
    CHECK(spaced.ask(kChampion2) == Answer::Yes);
    auto empty = HaltingOracle::exact({});
    try {
        run_relativized(OracleMachine::asking(kLoop), empty, 100000);
        FAIL("expected OracleIncomplete");
    } catch (const OracleIncomplete& e) {
        CHECK(e.query() == kLoop);
    }
    CHECK_THROWS_AS(HaltingOracle::from_json(nlohmann::json{{kLoop, "maybe"}}), ValidationError);
}

TEST_CASE("budget-approximate oracle") {
    auto b10 = approximate_oracle(2, 10);
    CHECK(b10.approximate());
    CHECK(b10.ask(kChampion2) == Answer::Yes);
    CHECK(b10.ask(kHalt) == Answer::Yes);
    CHECK(b10.ask("not a machine") == Answer::No);
    auto b1 = approximate_oracle(2, 1);
    CHECK(b1.ask(kHalt) == Answer::Yes);
    for (std::uint64_t b : {1, 10, 1000, 100000}) CHECK(approximate_oracle(2, b).ask(kLoop) == Answer::No);
    CHECK(approximate_oracle(2, 20).ask(kChampion3) == Answer::No);
    CHECK(approximate_oracle(2, 30).ask(kChampion3) == Answer::Yes);
    CHECK(b10.transcript().size() == 3);
    CHECK_THROWS_AS(approximate_oracle(3, 10), Unsupported);
    CHECK_THROWS_AS(approximate_oracle(2, 0), DomainError);
}

TEST_CASE("transcripts are deterministic") {
    // Two queries in sequence: ask about the champion, then about the loop.
    std::string text;
    {
        const auto q1 = encode_query(kChampion2);
        const auto q2 = encode_query(kLoop);
        const std::size_t n1 = q1.size(), n2 = q2.size();
        const std::size_t states = n1 + 1 + n2 + 1;
        text = std::to_string(states) + ";";
        auto add = [&](std::size_t s, const std::string& rhs) {
            for (int b = 0; b < 2; ++b)
                text += (s == 1 && b == 0 ? " " : " | ") + std::to_string(s) + "," + std::to_string(b) + " -> " + rhs;
        };
        for (std::size_t i = 0; i < n1; ++i) add(i + 1, "0,R," + std::to_string(i + 2) + "," + std::to_string(q1[i]));
        add(n1 + 1, "?" + std::to_string(n1 + 2) + "/" + std::to_string(n1 + 2));
        for (std::size_t i = 0; i < n2; ++i)
            add(n1 + 2 + i, "0,R," + std::to_string(n1 + 3 + i) + "," + std::to_string(q2[i]));
        add(states, "?H/H");
    }
    const auto m = OracleMachine::parse(text);
    auto run_once = [&] {
        auto o = approximate_oracle(2, 50);
        return run_relativized(m, o, 1'000'000);
    };
    const auto a = run_once(), b = run_once();
    CHECK(a.transcript == b.transcript);
    REQUIRE(a.transcript.size() == 2);
    CHECK(a.transcript[0].answer == Answer::Yes);
    CHECK(a.transcript[1].answer == Answer::No);
    CHECK(a.approximate);
    CHECK(a.run.halted());
}

TEST_CASE("approximate oracle is monotone in its budget") {
    std::mt19937_64 rng(17);
    for (int i = 0; i < 50; ++i) {
        const auto q = oracles::random_machine(rng).to_text();
        bool seen_yes = false;
        for (std::uint64_t b : {1, 2, 4, 8, 16, 32, 64, 128}) {
            const bool yes = approximate_oracle(2, b).ask(q) == Answer::Yes;
            if (seen_yes) CHECK(yes);
            seen_yes = seen_yes || yes;
        }
    }
}
