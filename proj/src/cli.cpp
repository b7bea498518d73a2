#include "hierarch/cli.hpp"

#include <cerrno>
#include <cstring>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "hierarch/arith.hpp"
#include "hierarch/errors.hpp"
#include "hierarch/groups.hpp"
#include "hierarch/markers.hpp"
#include "hierarch/oracle.hpp"
#include "hierarch/staged.hpp"
#include "hierarch/tm.hpp"
#include "text.hpp"

namespace hierarch::cli {

using json = nlohmann::ordered_json;

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw Error("SHA-256 computation failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 15]);
    }
    return out;
}

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path + ": " + std::strerror(errno));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, std::string_view data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path + ": " + std::strerror(errno));
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) throw IoError("cannot write " + path + ": " + std::strerror(errno));
}

json parse_json(const std::string& content, const std::string& path) {
    try {
        return json::parse(content);
    } catch (const json::exception& e) {
        throw ValidationError(path + ": " + e.what());
    }
}

json record(std::string_view kind) {
    json j;
    j["kind"] = kind;
    j["schema"] = kSchema;
    return j;
}

json big(const BigInt& v) {
    if (v >= 0 && v <= std::numeric_limits<std::int64_t>::max()) return static_cast<std::int64_t>(v);
    if (v < 0 && v >= std::numeric_limits<std::int64_t>::min()) return static_cast<std::int64_t>(v);
    return v.str();
}

// One command execution: collected output and the inputs it read.
struct Run {
    std::string output;
    json inputs = json::object();
    json fixtures = json::object();

    void emit(const json& rec) { output += rec.dump() + "\n"; }
    std::string read(const std::string& path) {
        auto content = read_file(path);
        inputs[path] = sha256_hex(content);
        return content;
    }
};

std::vector<std::string_view> content_lines(std::string_view s) {
    std::vector<std::string_view> out;
    for (auto line : text::split(s, '\n')) {
        line = text::trim(line);
        if (!line.empty() && line.front() != '#') out.push_back(line);
    }
    return out;
}

json tape_json(const tm::TapeSummary& t) {
    return {{"leftmost", t.leftmost}, {"rightmost", t.rightmost}, {"head", t.head}, {"cells", t.cells}};
}

void put_outcome(json& rec, const tm::RunResult& r) {
    if (r.halted()) {
        rec["outcome"] = "halted";
        rec["steps"] = r.halt().steps;
        rec["ones"] = r.halt().ones_written;
    } else {
        rec["outcome"] = "budget-exhausted";
        rec["budget"] = std::get<tm::BudgetExhausted>(r.outcome).budget;
    }
    rec["final_state"] = r.final_state;
    rec["tape"] = tape_json(r.tape);
}

json presentation_json(std::string_view kind, const groups::FinitePresentation& p) {
    auto rec = record(kind);
    rec["generators"] = p.generators();
    json rels = json::array();
    for (const auto& r : p.relators()) rels.push_back(groups::format_word(r));
    rec["relators"] = rels;
    rec["length"] = groups::presentation_length(p);
    return rec;
}

void put_betti(json& rec, const groups::FinitePresentation& p) {
    const auto b = groups::betti_one(p);
    rec["b1"] = b.b1;
    json tor = json::array();
    for (const auto& t : b.torsion) tor.push_back(big(t));
    rec["torsion"] = tor;
}

std::map<std::string, std::uint64_t> parse_assignments(const std::string& spec, std::string_view what) {
    std::map<std::string, std::uint64_t> out;
    if (text::trim(spec).empty()) return out;
    for (auto item : text::split(spec, ',')) {
        auto eq = item.find('=');
        if (eq == std::string_view::npos) throw ValidationError(std::string(what) + " must read name=value");
        out[std::string(text::trim(item.substr(0, eq)))] = text::parse_int<std::uint64_t>(item.substr(eq + 1), what);
    }
    return out;
}

std::vector<std::vector<groups::Word>> parse_embedding_blocks(std::string_view src) {
    std::vector<std::vector<groups::Word>> blocks(1);
    for (auto line : content_lines(src)) {
        if (line == "--") {
            blocks.emplace_back();
            continue;
        }
        blocks.back().push_back(groups::parse_word(line));
    }
    if (blocks.back().empty()) blocks.pop_back();
    return blocks;
}

struct Options {
    std::string out, manifest;
    std::string machine, oracle;
    std::uint64_t budget = 0;
    int states = 0, workers = 1;
    std::string formula, bounds, free;
    bool zero = false;
    std::string kernel, dummy = "on";
    std::uint64_t stages = 0, horizon = 32, quiet = 0, family = 0;
    bool until_stable = false;
    std::string in, left, right, images, g, a, embed, events;
    std::size_t iterate = 1, max_length = 0;
    std::uint64_t stage = 0, h = 0;
    std::string replay;
};

using Handler = std::function<void(Run&)>;

struct Leaf {
    CLI::App* app;
    std::string name;
    Handler handler;
};

struct Built {
    std::unique_ptr<CLI::App> app;
    std::unique_ptr<Options> opt;
    std::vector<Leaf> leaves;
    CLI::App* replay = nullptr;
};

void add_output(CLI::App* sub, Options& o) {
    sub->add_option("--out", o.out, "write JSON lines here instead of standard output");
    sub->add_option("--manifest", o.manifest, "manifest path (default <out>.manifest.json)");
}

Built build() {
    Built b;
    b.app = std::make_unique<CLI::App>("Computability and group-homology laboratory", "hierarch");
    b.opt = std::make_unique<Options>();
    auto& app = *b.app;
    auto& o = *b.opt;
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kToolVersion));

    // tm
    auto* tm_cmd = app.add_subcommand("tm", "run single machines")->require_subcommand(1);
    auto* tm_run = tm_cmd->add_subcommand("run", "simulate machines from the blank tape");
    tm_run->add_option("--machine", o.machine, "file with one machine per line")->required();
    tm_run->add_option("--budget", o.budget, "step budget")->required()->check(CLI::PositiveNumber);
    add_output(tm_run, o);
    b.leaves.push_back({tm_run, "tm run", [&o](Run& r) {
        const auto source = r.read(o.machine);
        for (auto line : content_lines(source)) {
            const auto m = tm::TMachine::parse(line);
            auto rec = record("tm-run");
            rec["machine"] = m.to_text();
            put_outcome(rec, tm::run(m, o.budget));
            r.emit(rec);
        }
    }});

    auto* tm_oracle = tm_cmd->add_subcommand("run-oracle", "simulate order-k machines with an oracle");
    tm_oracle->add_option("--machine", o.machine, "file with one oracle machine per line")->required();
    tm_oracle->add_option("--oracle", o.oracle, "table.json or approx:BUDGET")->required();
    tm_oracle->add_option("--budget", o.budget, "step budget")->required()->check(CLI::PositiveNumber);
    add_output(tm_oracle, o);
    b.leaves.push_back({tm_oracle, "tm run-oracle", [&o](Run& r) {
        std::optional<std::uint64_t> approx;
        std::optional<json> table;
        if (o.oracle.rfind("approx:", 0) == 0)
            approx = text::parse_int<std::uint64_t>(std::string_view(o.oracle).substr(7), "oracle budget");
        else
            table = parse_json(r.read(o.oracle), o.oracle);
        const auto source = r.read(o.machine);
        for (auto line : content_lines(source)) {
            const auto m = oracle::OracleMachine::parse(line);
            auto h = approx ? oracle::approximate_oracle(m.order(), *approx) : oracle::HaltingOracle::from_json(*table);
            const auto result = oracle::run_relativized(m, h, o.budget);
            for (const auto& q : result.transcript) {
                auto rec = record("oracle-query");
                rec["step"] = q.step;
                rec["query"] = q.query;
                rec["answer"] = oracle::answer_name(q.answer);
                r.emit(rec);
            }
            auto rec = record("tm-run-oracle");
            rec["machine"] = m.to_text();
            rec["order"] = m.order();
            rec["oracle"] = approx ? "approx" : "table";
            if (approx) rec["oracle_budget"] = *approx;
            rec["approximate"] = result.approximate;
            rec["queries"] = result.transcript.size();
            put_outcome(rec, result.run);
            r.emit(rec);
        }
    }});

    // bb
    auto* bb_cmd = app.add_subcommand("bb", "busy-beaver search")->require_subcommand(1);
    auto* bb_search = bb_cmd->add_subcommand("search", "exhaustive search over canonical machines");
    bb_search->add_option("--states", o.states, "number of states")->required()->check(CLI::PositiveNumber);
    bb_search->add_option("--budget", o.budget, "step budget per machine")->required()->check(CLI::PositiveNumber);
    bb_search->add_option("--workers", o.workers, "worker threads")->check(CLI::PositiveNumber);
    add_output(bb_search, o);
    b.leaves.push_back({bb_search, "bb search", [&o](Run& r) {
        const auto rec = tm::busy_beaver_search(o.states, o.budget, o.workers);
        for (const auto& c : rec.champions) {
            auto j = record("bb-champion");
            j["machine"] = c.to_text();
            j["steps"] = rec.best_steps;
            r.emit(j);
        }
        auto j = record("bb-record");
        j["n_states"] = rec.n_states;
        j["budget"] = rec.budget;
        j["best_steps"] = rec.best_steps;
        j["champions"] = rec.champions.size();
        j["unresolved"] = rec.unresolved;
        j["exact"] = rec.exact();
        j["examined"] = rec.examined;
        j["halting"] = rec.halting;
        j["proven_nonhalting"] = rec.proven_nonhalting;
        r.emit(j);
    }});

    // hier
    auto* hier_cmd = app.add_subcommand("hier", "prenex formulas")->require_subcommand(1);
    auto* classify = hier_cmd->add_subcommand("classify", "Sigma/Pi level of a formula");
    classify->add_option("--formula", o.formula, "formula JSON")->required();
    add_output(classify, o);
    b.leaves.push_back({classify, "hier classify", [&o](Run& r) {
        const auto f = arith::formula_from_json(parse_json(r.read(o.formula), o.formula));
        const auto c = arith::classify(f);
        auto rec = record("classification");
        rec["class"] = c.to_string();
        rec["side"] = c.side == arith::Side::Sigma ? "Sigma" : "Pi";
        rec["level"] = c.level;
        r.emit(rec);
    }});

    auto* eval = hier_cmd->add_subcommand("eval", "bounded evaluation over a finite box");
    eval->add_option("--formula", o.formula, "formula JSON")->required();
    eval->add_option("--bounds", o.bounds, "per-variable bounds, e.g. n=5,m=5,k=5")->required();
    eval->add_option("--free", o.free, "free variable values, e.g. x=3");
    eval->add_flag("--zero", o.zero, "variables range over 0,1,2,...");
    add_output(eval, o);
    b.leaves.push_back({eval, "hier eval", [&o](Run& r) {
        const auto f = arith::formula_from_json(parse_json(r.read(o.formula), o.formula));
        std::map<std::string, arith::Value> free;
        for (const auto& [k, v] : parse_assignments(o.free, "free value")) free[k] = v;
        const auto bounds = parse_assignments(o.bounds, "bound");
        const auto result = arith::bounded_eval(f, bounds, free, arith::Domain{o.zero});
        auto rec = record("bounded-eval");
        rec["class"] = arith::classify(f).to_string();
        rec["value"] = result.value;
        rec["witness"] = result.witness ? big(*result.witness) : json(nullptr);
        json jb = json::object();
        for (const auto& [k, v] : bounds) jb[k] = v;
        rec["bounds"] = jb;
        r.emit(rec);
    }});

    // markers
    auto* markers_cmd = app.add_subcommand("markers", "moving-markers enumeration")->require_subcommand(1);
    auto* mrun = markers_cmd->add_subcommand("run", "run the staged construction");
    mrun->add_option("--kernel", o.kernel, "table kernel or formula JSON")->required();
    mrun->add_option("--stages", o.stages, "stages to run (maximum with --until-stable)")
        ->required()
        ->check(CLI::PositiveNumber);
    auto* dummy = mrun->add_option("--dummy", o.dummy, "dummy marker on cell 0")->check(CLI::IsMember({"on", "off"}));
    mrun->add_flag("--zero-based", o.zero, "n ranges over 0,1,2,... (no dummy marker)");
    mrun->add_option("--horizon", o.horizon, "snapshot horizon")->check(CLI::PositiveNumber);
    mrun->add_option("--family", o.family, "family parameter l for 4-variable kernels");
    mrun->add_flag("--until-stable", o.until_stable, "stop once the snapshot is quiet");
    mrun->add_option("--quiet-window", o.quiet, "quiet window for --until-stable (0 = default)");
    add_output(mrun, o);
    b.leaves.push_back({mrun, "markers run", [&o, dummy](Run& r) {
        const auto j = parse_json(r.read(o.kernel), o.kernel);
        std::optional<markers::Sigma3Instance> inst;
        if (j.contains("prefix")) {
            inst = markers::Sigma3Instance::from_formula(arith::formula_from_json(j));
        } else {
            const auto table = arith::TableKernel::from_json(j);
            if (table.seed()) r.fixtures["kernel_seed"] = *table.seed();
            inst = markers::Sigma3Instance::from_table(
                table, table.vars().size() == 4 ? std::optional<markers::Index>(o.family) : std::nullopt);
        }
        if (o.zero) inst->with_zero_based(true);
        if (dummy->count() || !inst->zero_based()) inst->with_dummy_marker(o.dummy == "on");
        markers::MarkerRun run(*inst);
        std::optional<markers::Stabilization> stab;
        if (o.until_stable) stab = markers::run_until_stable(run, o.horizon, o.stages, o.quiet);
        else run.advance(o.stages);

        auto head = record("markers-run");
        head["stages"] = run.stage();
        head["dummy"] = run.instance().dummy_marker();
        head["zero_based"] = run.instance().zero_based();
        head["horizon"] = o.horizon;
        head["events"] = run.events().size();
        if (r.fixtures.contains("kernel_seed")) head["kernel_seed"] = r.fixtures["kernel_seed"];
        r.emit(head);
        for (const auto& e : run.events()) {
            auto rec = record("marker-event");
            rec["stage"] = e.stage;
            rec["marker"] = e.marker;
            rec["freed_cell"] = e.freed_cell;
            r.emit(rec);
        }
        const auto snap = markers::complement_snapshot(run, o.horizon);
        auto rec = record("marker-snapshot");
        rec["stage"] = run.stage();
        rec["horizon"] = o.horizon;
        rec["cells"] = snap.cells;
        rec["cardinality"] = snap.cardinality;
        if (stab) rec["stabilized"] = stab->stabilized;
        r.emit(rec);
    }});

    // pres
    auto* pres = app.add_subcommand("pres", "group presentations")->require_subcommand(1);
    auto* b1 = pres->add_subcommand("b1", "first Betti number and torsion");
    b1->add_option("--in", o.in, "presentation file")->required();
    add_output(b1, o);
    b.leaves.push_back({b1, "pres b1", [&o](Run& r) {
        const auto p = groups::FinitePresentation::parse(r.read(o.in));
        auto rec = presentation_json("betti-one", p);
        put_betti(rec, p);
        r.emit(rec);
    }});

    auto* amalgam = pres->add_subcommand("amalgam", "amalgamated product");
    amalgam->add_option("--left", o.left, "first presentation")->required();
    amalgam->add_option("--right", o.right, "second presentation")->required();
    amalgam->add_option("--images", o.images, "lines 'u = v' identifying u in left with v in right");
    add_output(amalgam, o);
    b.leaves.push_back({amalgam, "pres amalgam", [&o](Run& r) {
        const auto p1 = groups::FinitePresentation::parse(r.read(o.left));
        const auto p2 = groups::FinitePresentation::parse(r.read(o.right));
        std::vector<groups::Word> im1, im2;
        if (!o.images.empty()) {
            const auto source = r.read(o.images);
            for (auto line : content_lines(source)) {
                auto eq = line.find('=');
                if (eq == std::string_view::npos) throw ValidationError("image line must read 'u = v'");
                im1.push_back(groups::parse_word(line.substr(0, eq)));
                im2.push_back(groups::parse_word(line.substr(eq + 1)));
            }
        }
        const auto p = groups::amalgamated_product(p1, p2, im1, im2);
        auto rec = presentation_json("presentation", p);
        put_betti(rec, p);
        r.emit(rec);
    }});

    auto* suspend = pres->add_subcommand("suspend", "suspension A *_G A");
    suspend->add_option("--g", o.g, "presentation of G")->required();
    suspend->add_option("--a", o.a, "presentation of A (default: Higman's group)");
    suspend->add_option("--embed", o.embed, "images of G's generators in A, one per line; '--' separates levels")
        ->required();
    suspend->add_option("--iterate", o.iterate, "number of suspensions")->check(CLI::PositiveNumber);
    add_output(suspend, o);
    b.leaves.push_back({suspend, "pres suspend", [&o](Run& r) {
        const auto g = groups::FinitePresentation::parse(r.read(o.g));
        const auto a = o.a.empty() ? groups::higman_group() : groups::FinitePresentation::parse(r.read(o.a));
        const auto embed_text = r.read(o.embed);
        const auto p = groups::iterated_suspension(g, a, parse_embedding_blocks(embed_text), o.iterate);
        auto rec = presentation_json("presentation", p);
        rec["suspensions"] = o.iterate;
        put_betti(rec, p);
        r.emit(rec);
    }});

    auto* census = pres->add_subcommand("census", "canonical presentations of bounded length");
    census->add_option("--max-length", o.max_length, "maximal presentation length")->required();
    add_output(census, o);
    b.leaves.push_back({census, "pres census", [&o](Run& r) {
        const auto c = groups::enumerate_presentations(o.max_length);
        std::map<std::size_t, std::size_t> by_length;
        for (std::size_t i = 0; i < c.presentations.size(); ++i) {
            auto rec = presentation_json("census-entry", c.presentations[i]);
            rec["index"] = i;
            r.emit(rec);
            ++by_length[groups::presentation_length(c.presentations[i])];
        }
        auto rec = record("census-summary");
        rec["max_length"] = c.max_length;
        rec["count"] = c.count();
        json counts = json::object();
        for (const auto& [len, n] : by_length) counts[std::to_string(len)] = n;
        rec["by_length"] = counts;
        r.emit(rec);
    }});

    auto* sb = pres->add_subcommand("staged-betti", "staged Betti estimate from marker events");
    sb->add_option("--events", o.events, "JSONL written by 'markers run'")->required();
    sb->add_option("--stage", o.stage, "stage s")->required();
    sb->add_option("--horizon", o.h, "horizon h")->required();
    add_output(sb, o);
    b.leaves.push_back({sb, "pres staged-betti", [&o](Run& r) {
        std::vector<markers::MarkerEvent> events;
        std::optional<std::uint64_t> stages;
        const auto source = r.read(o.events);
        for (auto line : content_lines(source)) {
            const auto j = parse_json(std::string(line), o.events);
            const auto kind = j.value("kind", "");
            try {
                if (kind == "markers-run") stages = j.at("stages").get<std::uint64_t>();
                else if (kind == "marker-event")
                    events.push_back({j.at("stage").get<std::uint64_t>(), j.at("marker").get<markers::Index>(),
                                      j.at("freed_cell").get<markers::Index>()});
            } catch (const json::exception& e) {
                throw ValidationError(o.events + ": " + e.what());
            }
        }
        if (!stages) throw ValidationError(o.events + ": no markers-run record");
        const staged::REAbelianPresentation a(events, *stages);
        const auto est = staged::staged_betti(a, o.stage, o.h);
        auto rec = record("staged-betti");
        rec["stage"] = est.stage;
        rec["horizon"] = est.horizon;
        rec["value"] = est.value;
        r.emit(rec);
    }});

    b.replay = app.add_subcommand("replay", "re-run a manifest and compare output digests");
    b.replay->add_option("manifest", o.replay, "manifest JSON")->required();
    return b;
}

struct Outcome {
    int code = 0;
    std::string output;
    json manifest;
};

Outcome execute(const std::vector<std::string>& args, bool capture, std::ostream& out, std::ostream& err);

int replay(const std::string& path, std::ostream& out, std::ostream& err) {
    const auto manifest = parse_json(read_file(path), path);
    try {
        if (manifest.at("tool") != kToolVersion)
            throw ValidationError("manifest was written by " + manifest.at("tool").get<std::string>());
        for (const auto& [input, digest] : manifest.at("inputs").items())
            if (sha256_hex(read_file(input)) != digest)
                throw ValidationError("input " + input + " changed since the manifest was written");
        const auto args = manifest.at("argv").get<std::vector<std::string>>();
        const auto again = execute(args, true, out, err);
        if (again.code != 0) return again.code;
        const auto& recorded = manifest.at("outputs");
        const auto digest = sha256_hex(again.output);
        bool identical = true;
        for (const auto& [name, info] : recorded.items())
            identical = identical && info.at("sha256") == digest;
        auto rec = record("replay");
        rec["manifest"] = path;
        rec["identical"] = identical;
        rec["sha256"] = digest;
        out << rec.dump() << "\n";
        return identical ? 0 : 1;
    } catch (const json::exception& e) {
        throw ValidationError(path + ": " + e.what());
    }
}

Outcome execute(const std::vector<std::string>& args, bool capture, std::ostream& out, std::ostream& err) {
    auto built = build();
    auto& app = *built.app;
    const auto& o = *built.opt;
    Outcome result;
    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return result;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return result;
    } catch (const CLI::CallForVersion&) {
        out << kToolVersion << "\n";
        return result;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        result.code = 2;
        return result;
    }

    try {
        if (built.replay->parsed()) {
            result.code = replay(o.replay, out, err);
            return result;
        }
        const Leaf* leaf = nullptr;
        for (const auto& l : built.leaves)
            if (l.app->parsed()) leaf = &l;
        if (!leaf) {
            err << app.help();
            result.code = 2;
            return result;
        }
        Run run;
        leaf->handler(run);
        result.output = std::move(run.output);

        json params = json::object();
        for (const auto* opt : leaf->app->get_options()) {
            if (opt->count() == 0 || opt->get_name() == "--help") continue;
            const auto& res = opt->results();
            params[opt->get_name()] = res.size() == 1 ? json(res[0]) : json(res);
        }
        auto& m = result.manifest;
        m = record("manifest");
        m["tool"] = kToolVersion;
        m["command"] = leaf->name;
        m["argv"] = args;
        m["params"] = params;
        m["inputs"] = run.inputs;
        m["fixtures"] = run.fixtures;
        json outputs = json::object();
        outputs[o.out.empty() ? "-" : o.out] = {{"sha256", sha256_hex(result.output)},
                                                {"bytes", result.output.size()}};
        m["outputs"] = outputs;

        if (!capture) {
            if (o.out.empty()) out << result.output;
            else write_file(o.out, result.output);
            const auto manifest_path = !o.manifest.empty() ? o.manifest
                                       : !o.out.empty()    ? o.out + ".manifest.json"
                                                           : std::string();
            if (!manifest_path.empty()) write_file(manifest_path, m.dump(2) + "\n");
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        result.code = 1;
    }
    return result;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    if (args.empty()) {
        err << build().app->help();
        return 2;
    }
    return execute(args, false, out, err).code;
}

}  // namespace hierarch::cli
