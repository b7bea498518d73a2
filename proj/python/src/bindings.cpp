#include <sstream>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hierarch/arith.hpp"
#include "hierarch/cli.hpp"
#include "hierarch/errors.hpp"
#include "hierarch/groups.hpp"
#include "hierarch/markers.hpp"
#include "hierarch/oracle.hpp"
#include "hierarch/staged.hpp"
#include "hierarch/tm.hpp"

namespace py = pybind11;
using namespace hierarch;

namespace {

BigInt to_big(const py::int_& v) { return BigInt(py::str(v).cast<std::string>()); }

py::int_ from_big(const BigInt& v) { return py::int_(py::reinterpret_steal<py::object>(PyLong_FromString(v.str().c_str(), nullptr, 10))); }

nlohmann::json parse_json(const std::string& text) {
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed JSON: ") + e.what());
    }
}

py::dict run_dict(const tm::RunResult& r) {
    py::dict d;
    d["halted"] = r.halted();
    if (r.halted()) {
        d["steps"] = r.halt().steps;
        d["ones"] = r.halt().ones_written;
    } else {
        d["budget"] = std::get<tm::BudgetExhausted>(r.outcome).budget;
    }
    d["final_state"] = r.final_state;
    d["tape"] = r.tape.cells;
    d["leftmost"] = r.tape.leftmost;
    d["head"] = r.tape.head;
    return d;
}

py::dict presentation_dict(const groups::FinitePresentation& p) {
    py::dict d;
    d["generators"] = p.generators();
    py::list rels;
    for (const auto& w : p.relators()) rels.append(groups::format_word(w));
    d["relators"] = rels;
    d["length"] = groups::presentation_length(p);
    d["text"] = p.to_text();
    return d;
}

std::vector<groups::Word> words(const std::vector<std::string>& texts) {
    std::vector<groups::Word> out;
    for (const auto& t : texts) out.push_back(groups::parse_word(t));
    return out;
}

markers::Sigma3Instance instance_from_json(const std::string& text) {
    const auto j = parse_json(text);
    if (j.contains("prefix")) return markers::Sigma3Instance::from_formula(arith::formula_from_json(j));
    return markers::Sigma3Instance::from_table(arith::TableKernel::from_json(j));
}

}  // namespace

PYBIND11_MODULE(_hierarch, m) {
    m.doc() = "Bindings for the hierarch C++ core";
    static py::exception<Error> error(m, "HierarchError", PyExc_ValueError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::set_error(error, e.what());
        }
    });

    // Machines
    m.def("run_machine", [](const std::string& text, std::uint64_t budget) {
        return run_dict(tm::run(tm::TMachine::parse(text), budget));
    }, py::arg("machine"), py::arg("budget"));
    m.def("canonical_form", [](const std::string& text) { return tm::canonical_form(tm::TMachine::parse(text)).to_text(); });
    m.def("busy_beaver", [](int n, std::uint64_t budget, int workers) {
        tm::BusyBeaverRecord r;
        {
            py::gil_scoped_release release;
            r = tm::busy_beaver_search(n, budget, workers);
        }
        py::dict d;
        d["n_states"] = r.n_states;
        d["budget"] = r.budget;
        d["best_steps"] = r.best_steps;
        d["unresolved"] = r.unresolved;
        d["examined"] = r.examined;
        d["exact"] = r.exact();
        py::list champions;
        for (const auto& c : r.champions) champions.append(c.to_text());
        d["champions"] = champions;
        return d;
    }, py::arg("n_states"), py::arg("budget"), py::arg("workers") = 1);

    // Oracle machines: `oracle` is a {machine text: bool} table or a step budget.
    m.def("run_oracle_machine", [](const std::string& text, py::object oracle_spec, std::uint64_t budget) {
        auto machine = oracle::OracleMachine::parse(text);
        std::optional<oracle::HaltingOracle> o;
        if (py::isinstance<py::dict>(oracle_spec)) {
            std::map<std::string, oracle::Answer> table;
            for (auto [k, v] : oracle_spec.cast<py::dict>())
                table[k.cast<std::string>()] = v.cast<bool>() ? oracle::Answer::Yes : oracle::Answer::No;
            o = oracle::HaltingOracle::exact(table);
        } else {
            o = oracle::approximate_oracle(machine.order(), oracle_spec.cast<std::uint64_t>());
        }
        const auto r = oracle::run_relativized(machine, *o, budget);
        auto d = run_dict(r.run);
        py::list transcript;
        for (const auto& q : r.transcript)
            transcript.append(py::make_tuple(q.step, q.query, std::string(oracle::answer_name(q.answer))));
        d["transcript"] = transcript;
        d["approximate"] = r.approximate;
        return d;
    }, py::arg("machine"), py::arg("oracle"), py::arg("budget"));

    // Arithmetic
    m.def("pair", [](const py::int_& a, const py::int_& b) { return from_big(arith::pair(to_big(a), to_big(b))); });
    m.def("unpair", [](const py::int_& code) {
        const auto [a, b] = arith::unpair(to_big(code));
        return py::make_tuple(from_big(a), from_big(b));
    });
    m.def("classify", [](const std::string& formula) {
        return arith::classify(arith::formula_from_json(parse_json(formula))).to_string();
    }, py::arg("formula_json"));
    m.def("bounded_eval", [](const std::string& formula, const std::map<std::string, std::uint64_t>& bounds,
                             const std::map<std::string, py::int_>& free, bool zero) {
        std::map<std::string, BigInt> values;
        for (const auto& [k, v] : free) values[k] = to_big(v);
        const auto r = arith::bounded_eval(arith::formula_from_json(parse_json(formula)), bounds, values, arith::Domain{zero});
        return py::make_tuple(r.value, r.witness ? py::object(from_big(*r.witness)) : py::object(py::none()));
    }, py::arg("formula_json"), py::arg("bounds"), py::arg("free") = std::map<std::string, py::int_>{},
       py::arg("zero") = false);

    // Markers
    m.def("run_markers", [](const std::string& kernel, std::uint64_t stages, std::optional<bool> dummy, bool zero_based,
                            markers::Index horizon, bool until_stable) {
        auto inst = instance_from_json(kernel);
        if (zero_based) inst.with_zero_based(true);
        if (dummy) inst.with_dummy_marker(*dummy);
        markers::MarkerRun run(inst);
        py::dict d;
        if (until_stable) d["stabilized"] = markers::run_until_stable(run, horizon, stages).stabilized;
        else run.advance(stages);
        py::list events;
        for (const auto& e : run.events()) events.append(py::make_tuple(e.stage, e.marker, e.freed_cell));
        const auto snap = markers::complement_snapshot(run, horizon);
        d["stages"] = run.stage();
        d["events"] = events;
        d["cells"] = snap.cells;
        d["cardinality"] = snap.cardinality;
        return d;
    }, py::arg("kernel_json"), py::arg("stages"), py::arg("dummy") = py::none(), py::arg("zero_based") = false,
       py::arg("horizon") = 32, py::arg("until_stable") = false);
    m.def("brute_force_min_n", [](const std::string& kernel, markers::Index n, markers::Index mm, markers::Index k) {
        return markers::brute_force_min_n(instance_from_json(kernel), {n, mm, k});
    });
    m.def("staged_betti", [](const std::vector<std::tuple<std::uint64_t, markers::Index, markers::Index>>& events,
                             std::uint64_t known_stages, std::uint64_t s, markers::Index h) {
        std::vector<markers::MarkerEvent> ev;
        for (const auto& [stage, marker, cell] : events) ev.push_back({stage, marker, cell});
        return staged::staged_betti(staged::REAbelianPresentation(ev, known_stages), s, h).value;
    }, py::arg("events"), py::arg("known_stages"), py::arg("stage"), py::arg("horizon"));

    // Groups
    m.def("presentation", [](const std::string& text) { return presentation_dict(groups::FinitePresentation::parse(text)); });
    m.def("betti_one", [](const std::string& text) {
        const auto b = groups::betti_one(groups::FinitePresentation::parse(text));
        py::list torsion;
        for (const auto& t : b.torsion) torsion.append(from_big(t));
        return py::make_tuple(b.b1, torsion);
    }, py::arg("presentation"));
    m.def("smith_normal_form", [](const std::vector<std::vector<py::int_>>& rows, std::size_t cols) {
        groups::Matrix mat;
        for (const auto& row : rows) {
            mat.emplace_back();
            for (const auto& x : row) mat.back().push_back(to_big(x));
        }
        const auto r = groups::smith_normal_form(mat, rows.empty() ? cols : rows[0].size());
        auto convert = [](const groups::Matrix& a) {
            py::list out;
            for (const auto& row : a) {
                py::list l;
                for (const auto& x : row) l.append(from_big(x));
                out.append(l);
            }
            return out;
        };
        py::dict d;
        d["D"] = convert(r.D);
        d["U"] = convert(r.U);
        d["V"] = convert(r.V);
        d["rank"] = r.rank;
        py::list inv;
        for (const auto& x : r.invariant_factors) inv.append(from_big(x));
        d["invariant_factors"] = inv;
        return d;
    }, py::arg("matrix"), py::arg("cols") = 0);
    m.def("amalgam", [](const std::string& left, const std::string& right, const std::vector<std::string>& images1,
                        const std::vector<std::string>& images2) {
        return presentation_dict(groups::amalgamated_product(groups::FinitePresentation::parse(left),
                                                             groups::FinitePresentation::parse(right), words(images1),
                                                             words(images2)));
    }, py::arg("left"), py::arg("right"), py::arg("images_left") = std::vector<std::string>{},
       py::arg("images_right") = std::vector<std::string>{});
    m.def("suspension", [](const std::string& g, const std::vector<std::string>& embedding, std::optional<std::string> a) {
        const auto pa = a ? groups::FinitePresentation::parse(*a) : groups::higman_group();
        return presentation_dict(groups::suspension(groups::FinitePresentation::parse(g), pa, words(embedding)));
    }, py::arg("g"), py::arg("embedding"), py::arg("a") = py::none());
    m.def("census", [](std::size_t n) {
        std::vector<std::string> out;
        for (const auto& p : groups::enumerate_presentations(n).presentations) out.push_back(p.to_text());
        return out;
    }, py::arg("max_length"));

    // The command-line entry point, in process.
    m.def("cli", [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = cli::run_cli(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
    }, py::arg("args"));

    m.attr("__version__") = "0.1.0";
}
