// Acceptance suite: one PASS/FAIL line per criterion; exit status 1 if any
// criterion fails.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hierarch/arith.hpp"
#include "hierarch/cli.hpp"
#include "hierarch/groups.hpp"
#include "hierarch/markers.hpp"
#include "hierarch/oracle.hpp"
#include "hierarch/staged.hpp"
#include "hierarch/tm.hpp"
#include "oracles.hpp"

using namespace hierarch;
namespace fs = std::filesystem;

namespace {

struct Verdict {
    bool ok = true;
    std::string detail;

    void require(bool cond, const std::string& what) {
        if (!cond && ok) detail = what;
        ok = ok && cond;
    }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fx(const std::string& name) { return std::string(HIERARCH_FIXTURES) + "/" + name; }

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

groups::FinitePresentation load(const std::string& name) { return groups::FinitePresentation::parse(slurp(fx(name))); }

// --- 1 ---------------------------------------------------------------------------

Verdict busy_beaver() {
    Verdict v;
    const auto t0 = Clock::now();
    const std::vector<std::tuple<int, std::uint64_t, std::uint64_t>> cases{{1, 10, 1}, {2, 50, 6}, {3, 200, 21}};
    std::ostringstream found;
    for (const auto& [n, budget, expected] : cases) {
        const auto r = tm::busy_beaver_search(n, budget, 1);
        found << (n > 1 ? ", " : "") << "BB(" << n << ")=" << r.best_steps << " unresolved=" << r.unresolved;
        v.require(r.best_steps == expected && r.unresolved == 0, found.str());
    }
    const double t = seconds_since(t0);
    v.require(t < 60, "took " + std::to_string(t) + " s");
    if (v.ok) v.detail = found.str();
    return v;
}

// --- 2 ---------------------------------------------------------------------------

Verdict pairing() {
    Verdict v;
    const auto t0 = Clock::now();
    for (std::uint64_t k = 1; k <= 100000 && v.ok; ++k) {
        const auto [a, b] = arith::unpair(k);
        v.require(arith::pair(a, b) == k, "round-trip fails at " + std::to_string(k));
    }
    for (int a = 1; a <= 300 && v.ok; ++a)
        for (int b = 1; b <= 300 && v.ok; ++b)
            v.require(arith::pair(a, b) >= a, "pair below n1 at (" + std::to_string(a) + "," + std::to_string(b) + ")");
    const double t = seconds_since(t0);
    v.require(t < 1, "took " + std::to_string(t) + " s");
    if (v.ok) v.detail = "1..1e5 round-trip, 300x300 grid";
    return v;
}

// --- 3 ---------------------------------------------------------------------------

Verdict snf() {
    Verdict v;
    const auto t0 = Clock::now();
    std::mt19937_64 rng(31337);
    std::uniform_int_distribution<std::size_t> dim(1, 8);
    std::uniform_int_distribution<int> entry(-10, 10);
    for (int i = 0; i < 500 && v.ok; ++i) {
        const auto rows = dim(rng), cols = dim(rng);
        groups::Matrix m(rows, std::vector<BigInt>(cols));
        for (auto& row : m)
            for (auto& x : row) x = entry(rng);
        const auto r = groups::smith_normal_form(m, cols);
        const auto tag = "matrix " + std::to_string(i);
        v.require(groups::multiply(groups::multiply(r.U, m, rows), r.V, cols) == r.D, tag + ": U M V != D");
        v.require(abs(groups::determinant(r.U)) == 1 && abs(groups::determinant(r.V)) == 1, tag + ": not unimodular");
        for (std::size_t a = 0; a < rows; ++a)
            for (std::size_t b = 0; b < cols; ++b)
                if (a != b) v.require(r.D[a][b] == 0, tag + ": D not diagonal");
        for (std::size_t k = 0; k + 1 < r.invariant_factors.size(); ++k)
            v.require(r.invariant_factors[k + 1] % r.invariant_factors[k] == 0, tag + ": divisibility chain broken");
    }
    const double t = seconds_since(t0);
    v.require(t < 30, "took " + std::to_string(t) + " s");
    if (v.ok) v.detail = "500 matrices up to 8x8";
    return v;
}

// --- 4 ---------------------------------------------------------------------------

Verdict betti() {
    Verdict v;
    std::ostringstream found;
    for (const auto& [name, expected] :
         std::vector<std::pair<std::string, std::size_t>>{{"free2.pres", 2}, {"trefoil.pres", 1}, {"genus2.pres", 4}, {"higman.pres", 0}}) {
        const auto b = groups::betti_one(load(name)).b1;
        found << name << "=" << b << " ";
        v.require(b == expected, name + " gives " + std::to_string(b));
    }
    const auto s = groups::suspension(load("z.pres"), load("higman.pres"), {groups::parse_word("a")});
    const auto b = groups::betti_one(s).b1;
    found << "suspension=" << b;
    v.require(b == 0, "suspension gives " + std::to_string(b));
    if (v.ok) v.detail = found.str();
    return v;
}

// --- 5, 6, 7 -----------------------------------------------------------------------

struct MarkerAcceptance {
    Verdict equality, invariant, shape;
    std::size_t runs = 0;
    std::uint64_t stages_checked = 0;
    double seconds = 0;
};

// Marker i must stand on the (slot of i)-th cell outside W.
void check_invariant(const markers::MarkerRun& run, Verdict& v, std::uint64_t& stages_checked) {
    const auto& inst = run.instance();
    const markers::Index first = inst.first_marker();
    const std::size_t offset = inst.dummy_marker() ? 1 : 0;
    const std::size_t markers_live = static_cast<std::size_t>(run.stage() - first + 1);
    std::vector<markers::Index> free;
    for (markers::Index c = 1; free.size() < markers_live + offset; ++c)
        if (!run.enumerated(c)) free.push_back(c);
    if (inst.dummy_marker()) v.require(run.dummy_position() == free[0], "dummy marker moved");
    for (std::size_t idx = 0; idx < markers_live; ++idx)
        if (run.marker_position(first + idx) != free[idx + offset]) {
            v.require(false, "stage " + std::to_string(run.stage()) + ", marker " + std::to_string(first + idx));
            return;
        }
    ++stages_checked;
}

void check_shape(const markers::MarkerRun& run, Verdict& v) {
    const auto a = staged::re_abelian_from_markers(run);
    const markers::Index max_h = 40;
    std::vector<std::uint64_t> prev(max_h + 1);
    for (std::uint64_t s = 0; s <= a.stage(); ++s) {
        std::uint64_t below = 0;
        for (markers::Index h = 0; h <= max_h; ++h) {
            const auto value = staged::staged_betti(a, s, h).value;
            if (s > 0 && value > prev[h]) {
                v.require(false, "increase in stage at s=" + std::to_string(s) + ", h=" + std::to_string(h));
                return;
            }
            if (h > 0 && value < below) {
                v.require(false, "decrease in horizon at s=" + std::to_string(s) + ", h=" + std::to_string(h));
                return;
            }
            prev[h] = value;
            below = value;
        }
    }
}

MarkerAcceptance marker_runs() {
    MarkerAcceptance out;
    const auto t0 = Clock::now();
    auto exercise = [&](markers::Sigma3Instance inst, const std::string& label) {
        const auto& bounds = inst.constant_beyond();
        const auto n0 = markers::brute_force_min_n(inst, {(*bounds)[0], (*bounds)[1], (*bounds)[2]});
        if (!n0) {
            out.equality.require(false, label + ": oracle found no n");
            return;
        }
        for (bool dummy : {true, false}) {
            auto variant = inst;
            variant.with_dummy_marker(dummy);
            markers::MarkerRun run(variant);
            const auto r = markers::run_until_stable(run, 32, 5000, 0, [&](const markers::MarkerRun& m) {
                check_invariant(m, out.invariant, out.stages_checked);
            });
            const std::uint64_t expected = dummy ? *n0 : *n0 - 1;
            out.equality.require(r.stabilized, label + ": no stabilization");
            out.equality.require(r.snapshot.cardinality == expected,
                                 label + (dummy ? " dummy on" : " dummy off") + ": cardinality " +
                                     std::to_string(r.snapshot.cardinality) + ", oracle " + std::to_string(expected));
            check_shape(run, out.shape);
            ++out.runs;
        }
    };
    for (markers::Index t = 1; t <= 5; ++t)
        exercise(markers::Sigma3Instance::from_table(arith::TableKernel::threshold(t)), "n>=" + std::to_string(t));
    for (std::uint64_t seed = 0; seed < 100; ++seed)
        exercise(markers::Sigma3Instance::from_table(markers::random_sigma3_table(seed)), "seed " + std::to_string(seed));
    out.seconds = seconds_since(t0);
    out.equality.require(out.seconds < 120, "took " + std::to_string(out.seconds) + " s");
    if (out.equality.ok) out.equality.detail = std::to_string(out.runs) + " runs (5 threshold + 100 random kernels, dummy on/off)";
    if (out.invariant.ok)
        out.invariant.detail = std::to_string(out.stages_checked) + " stages checked across " + std::to_string(out.runs) + " runs";
    if (out.shape.ok) out.shape.detail = "all stages, horizons 0..40, " + std::to_string(out.runs) + " runs";
    return out;
}

// --- 8 ---------------------------------------------------------------------------

Verdict census() {
    Verdict v;
    const auto t0 = Clock::now();
    std::ostringstream found;
    for (std::size_t n = 1; n <= 4; ++n) {
        const auto ours = groups::enumerate_presentations(n).count();
        const auto brute = oracles::brute_force_census_count(n);
        found << (n > 1 ? ", " : "") << "N=" << n << ": " << ours;
        v.require(ours == brute, "N=" + std::to_string(n) + ": " + std::to_string(ours) + " vs oracle " + std::to_string(brute));
    }
    const double t = seconds_since(t0);
    v.require(t < 60, "took " + std::to_string(t) + " s");
    if (v.ok) v.detail = found.str();
    return v;
}

// --- 9 ---------------------------------------------------------------------------

Verdict relativization() {
    Verdict v;
    std::mt19937_64 rng(50);
    auto empty = oracle::HaltingOracle::exact({});
    for (int i = 0; i < 50 && v.ok; ++i) {
        const auto m = oracles::random_machine(rng);
        for (std::uint64_t b : {1, 7, 64, 500}) {
            const auto rel = oracle::run_relativized(oracle::OracleMachine::from_machine(m), empty, b);
            v.require(rel.run == tm::run(m, b) && rel.transcript.empty(), "conservativity fails for " + m.to_text());
        }
        const auto q = m.to_text();
        bool seen_yes = false;
        for (std::uint64_t b = 1; b <= 256; b *= 2) {
            const bool yes = oracle::approximate_oracle(2, b).ask(q) == oracle::Answer::Yes;
            v.require(!seen_yes || yes, "monotonicity fails for " + q);
            seen_yes = seen_yes || yes;
        }
        // A machine that asks about m and halts on Yes halts under any larger budget.
        const auto asker = oracle::OracleMachine::asking(q);
        bool halted_before = false;
        for (std::uint64_t b = 1; b <= 256; b *= 2) {
            auto o = oracle::approximate_oracle(2, b);
            const bool halted = oracle::run_relativized(asker, o, 100000).run.halted();
            v.require(!halted_before || halted, "relativized monotonicity fails for " + q);
            halted_before = halted_before || halted;
        }
    }
    if (v.ok) v.detail = "50 seeded machines";
    return v;
}

// --- 10 --------------------------------------------------------------------------

Verdict reproducibility() {
    Verdict v;
    const auto dir = fs::temp_directory_path() / "hierarch-acceptance";
    fs::remove_all(dir);
    fs::create_directories(dir);
    auto out = [&](const std::string& name) { return (dir / name).string(); };
    std::vector<std::vector<std::string>> runs{
        {"bb", "search", "--states", "1", "--budget", "10"},
        {"bb", "search", "--states", "2", "--budget", "50"},
        {"bb", "search", "--states", "3", "--budget", "200"},
        {"hier", "eval", "--formula", fx("pair_2_3.json"), "--bounds", "a=5,b=5"},
        {"pres", "b1", "--in", fx("free2.pres")},
        {"pres", "b1", "--in", fx("trefoil.pres")},
        {"pres", "b1", "--in", fx("genus2.pres")},
        {"pres", "b1", "--in", fx("higman.pres")},
        {"pres", "suspend", "--g", fx("z.pres"), "--a", fx("higman.pres"), "--embed", fx("z_to_a.embed")},
        {"pres", "census", "--max-length", "4"},
        {"tm", "run-oracle", "--machine", fx("champion3.tm"), "--oracle", "approx:30", "--budget", "100"},
    };
    for (int t = 1; t <= 5; ++t)
        for (const char* dummy : {"on", "off"})
            runs.push_back({"markers", "run", "--kernel", fx("geq" + std::to_string(t) + ".json"), "--stages", "5000",
                            "--until-stable", "--horizon", "32", "--dummy", dummy});
    runs.push_back({"markers", "run", "--kernel", fx("geq3.json"), "--stages", "300", "--dummy", "on"});
    runs.push_back({"pres", "staged-betti", "--events", out("run-" + std::to_string(runs.size() - 1) + ".jsonl"),
                    "--stage", "300", "--horizon", "32"});

    std::size_t replayed = 0;
    for (std::size_t i = 0; i < runs.size() && v.ok; ++i) {
        auto args = runs[i];
        const auto path = out("run-" + std::to_string(i) + ".jsonl");
        args.insert(args.end(), {"--out", path});
        std::ostringstream o, e;
        if (cli::run_cli(args, o, e) != 0) {
            v.require(false, "run failed: " + e.str());
            break;
        }
        const auto first = slurp(path);
        fs::remove(path);
        std::ostringstream ro, re;
        const int code = cli::run_cli({"replay", path + ".manifest.json"}, ro, re);
        const auto record = nlohmann::json::parse(ro.str().empty() ? "{}" : ro.str());
        v.require(code == 0 && record.value("identical", false), "replay differs for " + path + ": " + re.str());
        // Re-running the stored argv rewrites the same bytes.
        const auto manifest = nlohmann::json::parse(slurp(path + ".manifest.json"));
        std::ostringstream ao, ae;
        v.require(cli::run_cli(manifest.at("argv").get<std::vector<std::string>>(), ao, ae) == 0, "re-run failed");
        v.require(slurp(path) == first, "re-run output differs for " + path);
        ++replayed;
    }
    fs::remove_all(dir);
    if (v.ok) v.detail = std::to_string(replayed) + " manifests replayed byte-identically";
    return v;
}

int failures = 0;

void report(int n, const std::string& title, const Verdict& v, double seconds) {
    if (!v.ok) ++failures;
    std::cout << (v.ok ? "PASS" : "FAIL") << "  criterion " << std::setw(2) << n << "  " << title << " — " << v.detail
              << " (" << std::fixed << std::setprecision(2) << seconds << " s)" << std::endl;
}

template <class F>
void timed(int n, const std::string& title, F f) {
    const auto t0 = Clock::now();
    Verdict v;
    try {
        v = f();
    } catch (const std::exception& e) {
        v.ok = false;
        v.detail = std::string("exception: ") + e.what();
    }
    report(n, title, v, seconds_since(t0));
}

}  // namespace

int main() {
    timed(1, "busy-beaver exactness", busy_beaver);
    timed(2, "pairing bijection", pairing);
    timed(3, "Smith normal form soundness", snf);
    timed(4, "first Betti numbers of the fixtures", betti);

    const auto t0 = Clock::now();
    MarkerAcceptance m;
    try {
        m = marker_runs();
    } catch (const std::exception& e) {
        m.equality = m.invariant = m.shape = Verdict{false, std::string("exception: ") + e.what()};
    }
    const double marker_seconds = seconds_since(t0);
    report(5, "marker cardinality equals the least witness", m.equality, marker_seconds);
    report(6, "marker positions are complement order statistics", m.invariant, marker_seconds);
    report(7, "staged Betti double monotonicity", m.shape, marker_seconds);

    timed(8, "census against brute force", census);
    timed(9, "relativization conservativity and monotonicity", relativization);
    timed(10, "reproducibility from manifests", reproducibility);

    std::cout << (failures ? std::to_string(failures) + " criteria failed" : std::string("all criteria passed")) << std::endl;
    return failures ? 1 : 0;
}
