#include "hierarch/oracle.hpp"

#include "hierarch/errors.hpp"
#include "text.hpp"

namespace hierarch::oracle {

using text::parse_int;
using text::split;
using text::trim;

namespace {

constexpr StateId kMaxStates = 1u << 24;

StateId parse_target(std::string_view s, StateId n, std::string_view item) {
    s = trim(s);
    if (s == "H") return 0;
    const auto to = parse_int<StateId>(s, "target state");
    if (to < 1 || to > n) throw ValidationError("target state out of range: " + std::string(item));
    return to;
}

std::string target_text(StateId t) { return t == 0 ? std::string("H") : std::to_string(t); }

std::string normalize(std::string_view query) {
    try {
        return tm::TMachine::parse(query).to_text();
    } catch (const ValidationError&) {
        return std::string(trim(query));
    }
}

}  // namespace

OracleMachine::OracleMachine(StateId states, std::vector<OracleTransition> table, int order)
    : states_(states), table_(std::move(table)), order_(order) {
    if (states_ < 1 || states_ > kMaxStates) throw ValidationError("state count out of range");
    if (order_ < 2) throw ValidationError("oracle machines have order >= 2");
    if (table_.size() != static_cast<std::size_t>(states_) * 2)
        throw ValidationError("transition table must have " + std::to_string(2 * states_) + " entries");
    for (std::size_t i = 0; i < table_.size(); ++i) {
        const auto& t = table_[i];
        const auto where = "(" + std::to_string(i / 2 + 1) + "," + std::to_string(i % 2) + ")";
        if (t.kind == OracleTransition::Kind::Query) {
            if (t.yes > states_ || t.no > states_) throw ValidationError("query " + where + " targets unknown state");
        } else {
            if (t.write > 1 || (t.emit && *t.emit > 1))
                throw ValidationError("transition " + where + " writes a non-binary symbol");
            if (t.next > states_) throw ValidationError("transition " + where + " targets unknown state");
        }
    }
}

OracleMachine OracleMachine::parse(std::string_view src) {
    src = trim(src);
    const auto semi = src.find(';');
    if (semi == std::string_view::npos) throw ValidationError("machine text lacks 'n_states;' header");
    auto header = trim(src.substr(0, semi));
    int order = 2;
    if (auto at = header.find("order"); at != std::string_view::npos) {
        order = parse_int(header.substr(at + 5), "order");
        header = header.substr(0, at);
    }
    const auto n = parse_int<StateId>(header, "state count");
    if (n < 1 || n > kMaxStates) throw ValidationError("state count out of range");

    std::vector<std::optional<OracleTransition>> slots(static_cast<std::size_t>(n) * 2);
    auto body = trim(src.substr(semi + 1));
    if (!body.empty()) {
        for (auto item : split(body, '|')) {
            item = trim(item);
            const auto arrow = item.find("->");
            if (arrow == std::string_view::npos) throw ValidationError("transition lacks '->': " + std::string(item));
            auto lhs = split(item.substr(0, arrow), ',');
            auto rhs = trim(item.substr(arrow + 2));
            if (lhs.size() != 2) throw ValidationError("transition source must read 's,b': " + std::string(item));
            const auto s = parse_int<StateId>(lhs[0], "state");
            const int b = parse_int(lhs[1], "symbol");
            if (s < 1 || s > n || (b != 0 && b != 1))
                throw ValidationError("transition source out of range: " + std::string(item));
            OracleTransition t;
            if (!rhs.empty() && rhs.front() == '?') {
                auto branches = split(rhs.substr(1), '/');
                if (branches.size() != 2) throw ValidationError("query must read '?Y/N': " + std::string(item));
                t = OracleTransition::query(parse_target(branches[0], n, item), parse_target(branches[1], n, item));
            } else {
                auto parts = split(rhs, ',');
                if (parts.size() != 3 && parts.size() != 4)
                    throw ValidationError("transition must read 'w,D,t[,q]': " + std::string(item));
                const int w = parse_int(parts[0], "write symbol");
                if (w != 0 && w != 1) throw ValidationError("write symbol must be 0 or 1: " + std::string(item));
                const auto d = trim(parts[1]);
                if (d != "L" && d != "R") throw ValidationError("direction must be L or R: " + std::string(item));
                std::optional<std::uint8_t> emit;
                if (parts.size() == 4) {
                    const int q = parse_int(parts[3], "query bit");
                    if (q != 0 && q != 1) throw ValidationError("query bit must be 0 or 1: " + std::string(item));
                    emit = static_cast<std::uint8_t>(q);
                }
                t = OracleTransition::step(static_cast<std::uint8_t>(w), d == "L" ? tm::Move::Left : tm::Move::Right,
                                           parse_target(parts[2], n, item), emit);
            }
            auto& slot = slots[(s - 1) * 2 + static_cast<std::size_t>(b)];
            if (slot)
                throw ValidationError("duplicate transition for (" + std::to_string(s) + "," + std::to_string(b) + ")");
            slot = t;
        }
    }
    std::vector<OracleTransition> table;
    table.reserve(slots.size());
    for (std::size_t i = 0; i < slots.size(); ++i) {
        if (!slots[i])
            throw ValidationError("missing transition for (" + std::to_string(i / 2 + 1) + "," +
                                  std::to_string(i % 2) + ")");
        table.push_back(*slots[i]);
    }
    return OracleMachine(n, std::move(table), order);
}

std::string OracleMachine::to_text() const {
    std::string out = std::to_string(states_) + (order_ == 2 ? "" : " order " + std::to_string(order_)) + ";";
    for (std::size_t i = 0; i < table_.size(); ++i) {
        const auto& t = table_[i];
        out += i == 0 ? " " : " | ";
        out += std::to_string(i / 2 + 1) + "," + std::to_string(i % 2) + " -> ";
        if (t.kind == OracleTransition::Kind::Query) {
            out += "?" + target_text(t.yes) + "/" + target_text(t.no);
        } else {
            out += std::to_string(t.write) + "," + (t.move == tm::Move::Left ? "L" : "R") + "," + target_text(t.next);
            if (t.emit) out += "," + std::to_string(*t.emit);
        }
    }
    return out;
}

OracleMachine OracleMachine::from_machine(const tm::TMachine& m, int order) {
    std::vector<OracleTransition> table;
    for (const auto& t : m.table()) table.push_back(OracleTransition::step(t.write, t.move, t.next));
    return OracleMachine(static_cast<StateId>(m.states()), std::move(table), order);
}

OracleMachine OracleMachine::asking(std::string_view query, int order) {
    const auto bits = encode_query(query);
    const auto len = static_cast<StateId>(bits.size());
    std::vector<OracleTransition> table;
    for (StateId i = 0; i < len; ++i)
        for (std::uint8_t b = 0; b < 2; ++b) table.push_back(OracleTransition::step(b, tm::Move::Right, i + 2, bits[i]));
    const StateId loop = len + 2;  // state len + 1 asks
    table.push_back(OracleTransition::query(0, loop));
    table.push_back(OracleTransition::query(0, loop));
    for (std::uint8_t b = 0; b < 2; ++b) table.push_back(OracleTransition::step(b, tm::Move::Right, loop));
    return OracleMachine(loop, std::move(table), order);
}

bool OracleMachine::uses_oracle() const noexcept {
    for (const auto& t : table_)
        if (t.kind == OracleTransition::Kind::Query || t.emit) return true;
    return false;
}

std::string_view answer_name(Answer a) { return a == Answer::Yes ? "yes" : "no"; }

// --- Oracles --------------------------------------------------------------------

HaltingOracle HaltingOracle::exact(const std::map<std::string, Answer>& table) {
    HaltingOracle o;
    o.table_.emplace();
    for (const auto& [key, answer] : table) {
        auto [it, fresh] = o.table_->emplace(normalize(key), answer);
        if (!fresh && it->second != answer)
            throw ValidationError("oracle table gives conflicting answers for " + it->first);
    }
    return o;
}

HaltingOracle HaltingOracle::from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ValidationError("oracle table must be a JSON object");
    std::map<std::string, Answer> table;
    for (const auto& [key, value] : j.items()) {
        if (value == "yes") table[key] = Answer::Yes;
        else if (value == "no") table[key] = Answer::No;
        else throw ValidationError("oracle answers must be \"yes\" or \"no\" (key " + key + ")");
    }
    return exact(table);
}

HaltingOracle HaltingOracle::budget_approx(std::uint64_t budget) {
    if (budget < 1) throw DomainError("oracle budget must be at least 1");
    HaltingOracle o;
    o.budget_ = budget;
    return o;
}

Answer HaltingOracle::ask(const std::string& query, std::uint64_t step) {
    Answer answer = Answer::No;
    if (table_) {
        auto it = table_->find(normalize(query));
        if (it == table_->end()) throw OracleIncomplete(query);
        answer = it->second;
    } else {
        std::optional<tm::TMachine> m;
        try {
            m = tm::TMachine::parse(query);
        } catch (const ValidationError&) {
        }
        if (m && tm::run(*m, *budget_).halted()) answer = Answer::Yes;
    }
    transcript_.push_back({step, query, answer});
    return answer;
}

HaltingOracle approximate_oracle(int order, std::uint64_t budget) {
    if (order != 2)
        throw Unsupported("only order 2 is supported: the halting oracle for order " + std::to_string(order - 1) +
                          " machines is not computable, and only its order-1 budget approximation is shipped");
    return HaltingOracle::budget_approx(budget);
}

// --- Simulation -----------------------------------------------------------------

std::vector<std::uint8_t> encode_query(std::string_view text) {
    std::vector<std::uint8_t> bits;
    bits.reserve(text.size() * 8);
    for (unsigned char c : text)
        for (int i = 7; i >= 0; --i) bits.push_back(static_cast<std::uint8_t>((c >> i) & 1));
    return bits;
}

std::string decode_query(const std::vector<std::uint8_t>& bits) {
    std::string out;
    for (std::size_t i = 0; i < bits.size(); i += 8) {
        unsigned c = 0;
        for (std::size_t j = i; j < i + 8; ++j) c = (c << 1) | (j < bits.size() ? bits[j] : 0u);
        out.push_back(static_cast<char>(c));
    }
    return out;
}

RelativizedResult run_relativized(const OracleMachine& machine, HaltingOracle& oracle, std::uint64_t budget) {
    if (budget == 0) throw DomainError("budget must be at least 1");
    const auto first_record = oracle.transcript().size();
    auto finish = [&](tm::RunResult r) {
        RelativizedResult out{std::move(r), {}, oracle.approximate()};
        out.transcript.assign(oracle.transcript().begin() + static_cast<std::ptrdiff_t>(first_record),
                              oracle.transcript().end());
        return out;
    };
    tm::Tape tape;
    std::vector<std::uint8_t> query;
    StateId state = 1;
    for (std::uint64_t step = 1; step <= budget; ++step) {
        const auto& t = machine.at(state, tape.read());
        StateId next;
        if (t.kind == OracleTransition::Kind::Query) {
            const auto answer = oracle.ask(decode_query(query), step);
            query.clear();
            next = answer == Answer::Yes ? t.yes : t.no;
        } else {
            tape.write(t.write);
            tape.move(t.move);
            if (t.emit) query.push_back(*t.emit);
            next = t.next;
        }
        if (next == 0) return finish({tm::Halted{step, tape.ones()}, tape.summary(), 0});
        state = next;
    }
    return finish({tm::BudgetExhausted{budget}, tape.summary(), static_cast<int>(state)});
}

}  // namespace hierarch::oracle
