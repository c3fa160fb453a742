#include <doctest.h>

#include <filesystem>
#include <set>
#include <sstream>

#include "callias/config.hpp"
#include "callias/error.hpp"
#include "callias/io.hpp"
#include "callias/runner.hpp"

using namespace callias;
namespace fs = std::filesystem;

namespace {

const std::string kConfigs = CALLIAS_CONFIG_DIR;

std::string scratch(const std::string& name)
{
    fs::path p = fs::temp_directory_path() / "callias_test_cli" / name;
    fs::remove_all(p);
    return p.string();
}

struct Run {
    int rc = 0;
    std::string err;
};

Run run(const std::string& config, const std::string& out, const std::vector<std::string>& sets = {})
{
    std::ostringstream err;
    Run r;
    r.rc = run_command(config, out, 1, sets, err);
    r.err = err.str();
    return r;
}

json read_json(const fs::path& p)
{
    return json::parse(read_file(p.string()));
}

std::set<std::string> files_under(const fs::path& dir)
{
    std::set<std::string> s;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file())
            s.insert(fs::relative(e.path(), dir).generic_string());
    return s;
}

}  // namespace

TEST_CASE("run circle-winding-1: exit 0, residuals 0, complete manifest")
{
    std::string out = scratch("cw1");
    Run r = run(kConfigs + "/circle-winding-1.json", out);
    CHECK(r.rc == 0);
    CHECK(r.err.empty());

    json rep = read_json(fs::path(out) / "index_report.json");
    CHECK(rep["schema"] == "callias-lab/report/v1");
    const json& body = rep["report"];
    CHECK(body["ind_Qmm"] == 0);
    CHECK(body["sf"] == 1);
    CHECK(body["dim_ker_A1"] == 1);
    CHECK(body["incomplete"] == false);
    for (const auto& [k, v] : body["residuals"].items())
        if (v.is_number_integer())
            CHECK_MESSAGE(v == 0, k);
    CHECK(body["violations"].empty());

    json man = read_json(fs::path(out) / "manifest.json");
    CHECK(man["artifact_version"] == kArtifactVersion);
    std::set<std::string> listed;
    for (const json& f : man["files"]) {
        std::string path = f["path"];
        listed.insert(path);
        fs::path p = fs::path(out) / path;
        CHECK(f["sha256"] == sha256_file(p.string()));
        CHECK(f["bytes"] == fs::file_size(p));
    }
    std::set<std::string> on_disk = files_under(out);
    on_disk.erase("manifest.json");
    CHECK(listed == on_disk);
    for (const char* name : {"spectrum.json", "evolve.json", "qblocks.json", "flow.json", "eta.json", "wick.json",
                                    "eigenvalues.csv", "tracks.csv", "trajectory.csv"})
        CHECK_MESSAGE(on_disk.count(name) == 1, name);
}

TEST_CASE("every JSON report carries the schema tag and every CSV has a header")
{
    std::string out = scratch("schema");
    REQUIRE(run(kConfigs + "/circle-winding-1.json", out).rc == 0);
    for (const auto& e : fs::directory_iterator(out)) {
        std::string text = read_file(e.path().string());
        if (e.path().extension() == ".json" && e.path().filename() != "manifest.json") {
            CHECK(json::parse(text)["schema"] == kReportSchema);
        } else if (e.path().extension() == ".csv") {
            auto rows = parse_csv(text);
            REQUIRE(rows.size() >= 2);
            for (const auto& row : rows)
                CHECK(row.size() == rows[0].size());
            CHECK(text.find("\r\n") != std::string::npos);
            CHECK_FALSE(rows[0][0].empty());
        }
    }
}

TEST_CASE("noncompact perturbation exits 1 naming A4")
{
    Run r = run(kConfigs + "/invalid/noncompact-perturbation.json", scratch("invalid"));
    CHECK(r.rc == 1);
    CHECK(r.err.find("AssumptionViolation: A4") == 0);
}

TEST_CASE("too few steps exits 1")
{
    Run r = run(kConfigs + "/circle-winding-1.json", scratch("steps"), {"numerics.time_steps=4"});
    CHECK(r.rc == 1);
    CHECK(r.err.find("StepCountTooLow") != std::string::npos);
}

TEST_CASE("schema errors exit 1")
{
    CHECK(run(kConfigs + "/circle-winding-1.json", scratch("s1"), {"numerics.time_stpes=64"}).rc == 1);
    CHECK(run(kConfigs + "/circle-winding-1.json", scratch("s2"), {"numerics.zero_tol_rel=-1"}).rc == 1);
    CHECK(run(kConfigs + "/circle-winding-1.json", scratch("s3"), {"tasks=[]"}).rc == 1);
    CHECK(run(kConfigs + "/circle-winding-1.json", scratch("s4"), {"tasks=[\"plot\"]"}).rc == 1);
    CHECK(run(kConfigs + "/circle-winding-1.json", scratch("s5"), {"no_equals_sign"}).rc == 1);
    CHECK(run(kConfigs + "/does-not-exist.json", scratch("s6")).rc == 1);
}

TEST_CASE("numerical failures exit 2")
{
    std::string out = scratch("numeric");
    Run r = run(kConfigs + "/model-l-crossing.json", out,
                {"numerics.richardson_tol=1e-12", "tasks=[\"evolve\",\"index\"]", "numerics.resolution=16"});
    CHECK(r.rc == 2);
    CHECK(r.err.find("NotConverged") == 0);
    // the index report is still written, flagged incomplete
    json rep = read_json(fs::path(out) / "index_report.json");
    CHECK(rep["report"]["incomplete"] == true);
    CHECK(fs::exists(fs::path(out) / "manifest.json"));
}

TEST_CASE("error kinds map to exit codes")
{
    CHECK(exit_code(ErrorKind::Config) == 1);
    CHECK(exit_code(ErrorKind::AssumptionViolation) == 1);
    CHECK(exit_code(ErrorKind::StepCountTooLow) == 1);
    CHECK(exit_code(ErrorKind::NotConverged) == 2);
    CHECK(exit_code(ErrorKind::InvariantViolation) == 2);
    CHECK(exit_code(ErrorKind::IdentityViolation) == 3);
}

TEST_CASE("overrides")
{
    json doc = json::parse(R"({"a": {"b": 1}, "name": "x"})");
    apply_override(doc, "a.b=2.5");
    CHECK(doc["a"]["b"] == 2.5);
    apply_override(doc, "name=hello");
    CHECK(doc["name"] == "hello");
    apply_override(doc, "a.c=[1,2]");
    CHECK(doc["a"]["c"].size() == 2);
    apply_override(doc, "a.d.e=true");
    CHECK(doc["a"]["d"]["e"] == true);
    CHECK_THROWS_AS(apply_override(doc, "=3"), Error);
}

TEST_CASE("config hash tracks content")
{
    ExperimentConfig a = load_config(kConfigs + "/circle-winding-1.json");
    ExperimentConfig b = load_config(kConfigs + "/circle-winding-1.json");
    ExperimentConfig c = load_config(kConfigs + "/circle-winding-1.json", {"numerics.time_steps=128"});
    CHECK(config_hash(a.raw) == config_hash(b.raw));
    CHECK(config_hash(a.raw) != config_hash(c.raw));
    CHECK(c.numerics.time_steps == 128);
    CHECK(config_hash(a.raw).size() == 64);
}

TEST_CASE("bundled configs parse")
{
    for (const auto& e : fs::directory_iterator(kConfigs)) {
        if (e.path().extension() != ".json")
            continue;
        CAPTURE(e.path().string());
        ExperimentConfig c = load_config(e.path().string());
        CHECK_FALSE(c.tasks.empty());
    }
}

TEST_CASE("runs are byte-deterministic")
{
    std::string a = scratch("det_a"), b = scratch("det_b");
    REQUIRE(run(kConfigs + "/circle-offset.json", a).rc == 0);
    REQUIRE(run(kConfigs + "/circle-offset.json", b).rc == 0);
    for (const auto& name : files_under(a)) {
        if (name == "manifest.json")
            continue;
        CAPTURE(name);
        CHECK(read_file((fs::path(a) / name).string()) == read_file((fs::path(b) / name).string()));
    }
}

TEST_CASE("worker count does not change the outputs")
{
    std::string a = scratch("workers_1"), b = scratch("workers_3");
    std::ostringstream err;
    REQUIRE(run_command(kConfigs + "/circle-offset.json", a, 1, {}, err) == 0);
    REQUIRE(run_command(kConfigs + "/circle-offset.json", b, 3, {}, err) == 0);
    for (const auto& name : files_under(a)) {
        if (name == "manifest.json")
            continue;
        CAPTURE(name);
        CHECK(read_file((fs::path(a) / name).string()) == read_file((fs::path(b) / name).string()));
    }
}

TEST_CASE("theta sweep: three rows with zero flow")
{
    std::string out = scratch("theta");
    std::ostringstream err;
    int rc = sweep_command(kConfigs + "/circle-theta-sweep.json", "model.gauge.time.to", "0.25,0.5,0.75", out, 2, {},
                           err);
    CHECK(rc == 0);
    auto rows = parse_csv(read_file(out + "/sweep.csv"));
    REQUIRE(rows.size() == 4);
    size_t sf = std::find(rows[0].begin(), rows[0].end(), "sf") - rows[0].begin();
    REQUIRE(sf < rows[0].size());
    for (size_t i = 1; i < rows.size(); ++i)
        CHECK(rows[i][sf] == "0");
    for (int i = 0; i < 3; ++i)
        CHECK(fs::exists(out + "/value_" + std::to_string(i) + "/index_report.json"));
    json man = read_json(fs::path(out) / "manifest.json");
    std::set<std::string> listed;
    for (const json& f : man["files"])
        listed.insert(f["path"].get<std::string>());
    std::set<std::string> on_disk = files_under(out);
    on_disk.erase("manifest.json");
    CHECK(listed == on_disk);
}

TEST_CASE("bump height sweep: flow switches on past the critical height")
{
    std::string out = scratch("height");
    std::ostringstream err;
    int rc = sweep_command(kConfigs + "/model-l-mass-sweep.json", "", "", out, 4, {}, err);
    CHECK(rc == 0);
    auto rows = parse_csv(read_file(out + "/sweep.csv"));
    REQUIRE(rows.size() == 9);
    size_t sf = std::find(rows[0].begin(), rows[0].end(), "sf") - rows[0].begin();
    int switches = 0;
    for (size_t i = 2; i < rows.size(); ++i)
        if (rows[i][sf] != rows[i - 1][sf])
            ++switches;
    CHECK(switches == 1);
    CHECK(rows[1][sf] == "0");
    CHECK(rows.back()[sf] == "1");
}

TEST_CASE("sweep argument errors exit 1")
{
    std::ostringstream err;
    CHECK(sweep_command(kConfigs + "/circle-theta-sweep.json", "model.gauge.time.to", "", scratch("e1"), 1, {}, err) == 1);
    CHECK(sweep_command(kConfigs + "/circle-theta-sweep.json", "model.gauge.time.to", ",", scratch("e2"), 1, {}, err) == 1);
    CHECK(sweep_command(kConfigs + "/circle-theta-sweep.json", "model.gauge.time.kind", "1", scratch("e3"), 1, {}, err) == 1);
    CHECK(sweep_command(kConfigs + "/circle-theta-sweep.json", "model.gauge.time.to", "a,b", scratch("e4"), 1, {}, err) == 1);
}

TEST_CASE("CSV quoting and number formatting")
{
    CHECK(csv_escape("plain") == "plain");
    CHECK(csv_escape("a,b") == "\"a,b\"");
    CHECK(csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
    auto rows = parse_csv("h1,h2\r\n\"a,b\",\"x\"\"y\"\r\n");
    REQUIRE(rows.size() == 2);
    CHECK(rows[1][0] == "a,b");
    CHECK(rows[1][1] == "x\"y");
    for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 6.02214076e23})
        CHECK(std::stod(fmt_double(v)) == v);
    CHECK(fmt_double(0.1) == "0.1");
}
