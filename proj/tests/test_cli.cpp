#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hierarch/cli.hpp"

using hierarch::cli::run_cli;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out, err;
    std::vector<json> records() const {
        std::vector<json> rs;
        std::istringstream in(out);
        for (std::string line; std::getline(in, line);)
            if (!line.empty()) rs.push_back(json::parse(line));
        return rs;
    }
    json last(const std::string& kind) const {
        json found;
        for (auto& r : records())
            if (r["kind"] == kind) found = r;
        return found;
    }
};

Result cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::string fx(const std::string& name) { return std::string(HIERARCH_FIXTURES) + "/" + name; }

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("hierarch-cli-" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("usage errors exit 2") {
    CHECK(cli({}).code == 2);
    CHECK(cli({"bogus"}).code == 2);
    CHECK(cli({"tm", "run", "--budget", "5"}).code == 2);
    CHECK(cli({"bb", "search", "--states", "2", "--budget", "0"}).code == 2);
    CHECK(cli({"--help"}).code == 0);
    CHECK(cli({"--version"}).out == "hierarch 0.1.0\n");
}

TEST_CASE("domain and file errors exit 1") {
    const auto missing = cli({"tm", "run", "--machine", "/nonexistent/x.tm", "--budget", "5"});
    CHECK(missing.code == 1);
    CHECK(missing.err.find("/nonexistent/x.tm") != std::string::npos);
    CHECK(cli({"pres", "census", "--max-length", "9"}).code == 1);
    CHECK(cli({"bb", "search", "--states", "5", "--budget", "5"}).code == 1);
}

TEST_CASE("every record has a kind and the schema version") {
    const auto r = cli({"tm", "run", "--machine", fx("champion2.tm"), "--budget", "50"});
    REQUIRE(r.code == 0);
    for (const auto& rec : r.records()) {
        CHECK(rec.contains("kind"));
        CHECK(rec["schema"] == hierarch::cli::kSchema);
    }
    const auto run = r.last("tm-run");
    CHECK(run["outcome"] == "halted");
    CHECK(run["steps"] == 6);
}

TEST_CASE("bb search") {
    const auto r = cli({"bb", "search", "--states", "2", "--budget", "50"});
    REQUIRE(r.code == 0);
    const auto rec = r.last("bb-record");
    CHECK(rec["best_steps"] == 6);
    CHECK(rec["unresolved"] == 0);
}

TEST_CASE("oracle runs") {
    const auto r = cli({"tm", "run-oracle", "--machine", fx("champion2.tm"), "--oracle", "approx:10", "--budget", "50"});
    REQUIRE(r.code == 0);
    CHECK(r.last("tm-run-oracle")["approximate"] == true);
    CHECK(cli({"tm", "run-oracle", "--machine", fx("champion2.tm"), "--oracle", fx("oracle_table.json"), "--budget",
               "50"})
              .code == 0);
}

TEST_CASE("hier commands") {
    CHECK(cli({"hier", "classify", "--formula", fx("sigma3_geq3.json")}).last("classification")["class"] == "Sigma_3");
    const auto e = cli({"hier", "eval", "--formula", fx("sigma3_geq3.json"), "--bounds", "n=5,m=5,k=5"});
    REQUIRE(e.code == 0);
    CHECK(e.last("bounded-eval")["witness"] == 3);
    CHECK(cli({"hier", "eval", "--formula", fx("sigma3_geq3.json"), "--bounds", "n=5"}).code == 1);
}

TEST_CASE("markers run") {
    const auto on = cli({"markers", "run", "--kernel", fx("geq3.json"), "--stages", "500", "--dummy", "on"});
    REQUIRE(on.code == 0);
    CHECK(on.last("marker-snapshot")["cardinality"] == 3);
    const auto off = cli({"markers", "run", "--kernel", fx("geq3.json"), "--stages", "500", "--dummy", "off"});
    CHECK(off.last("marker-snapshot")["cardinality"] == 2);
    CHECK(cli({"markers", "run", "--kernel", fx("geq3.json"), "--stages", "10", "--zero-based", "--dummy", "on"}).code ==
          1);
    CHECK(cli({"markers", "run", "--kernel", fx("geq3.json"), "--stages", "10", "--dummy", "maybe"}).code == 2);
}

TEST_CASE("pres commands") {
    CHECK(cli({"pres", "b1", "--in", fx("genus2.pres")}).last("betti-one")["b1"] == 4);
    const auto am = cli({"pres", "amalgam", "--left", fx("z.pres"), "--right", fx("z.pres"), "--images",
                         fx("square.images")});
    REQUIRE(am.code == 0);
    CHECK(am.last("presentation")["b1"] == 1);
    const auto su = cli({"pres", "suspend", "--g", fx("z.pres"), "--embed", fx("z_to_a.embed")});
    REQUIRE(su.code == 0);
    CHECK(su.last("presentation")["generators"] == 8);
    CHECK(su.last("presentation")["b1"] == 0);
    CHECK(cli({"pres", "suspend", "--g", fx("z.pres"), "--embed", fx("z_to_a.embed"), "--iterate", "2"}).code == 1);
    CHECK(cli({"pres", "census", "--max-length", "4"}).last("census-summary")["count"] == 20);
}

TEST_CASE("outputs, manifests and replay") {
    const auto dir = scratch_dir("manifest");
    const auto events = (dir / "events.jsonl").string();
    REQUIRE(cli({"markers", "run", "--kernel", fx("geq3.json"), "--stages", "200", "--out", events}).code == 0);
    const auto manifest = json::parse(slurp(events + ".manifest.json"));
    CHECK(manifest["kind"] == "manifest");
    CHECK(manifest["command"] == "markers run");
    CHECK(manifest["inputs"].contains(fx("geq3.json")));
    CHECK(manifest["outputs"][events]["bytes"] == slurp(events).size());

    const auto sb = cli({"pres", "staged-betti", "--events", events, "--stage", "200", "--horizon", "20"});
    REQUIRE(sb.code == 0);
    CHECK(sb.last("staged-betti")["value"] == 3);

    const auto first = slurp(events);
    const auto rep = cli({"replay", events + ".manifest.json"});
    CHECK(rep.code == 0);
    CHECK(rep.last("replay")["identical"] == true);
    CHECK(slurp(events) == first);

    // A tampered output digest is reported as a mismatch.
    auto bad = manifest;
    bad["outputs"][events]["sha256"] = std::string(64, '0');
    std::ofstream(dir / "bad.json") << bad.dump();
    const auto mismatch = cli({"replay", (dir / "bad.json").string()});
    CHECK(mismatch.code == 1);
    CHECK(mismatch.last("replay")["identical"] == false);
    fs::remove_all(dir);
}
