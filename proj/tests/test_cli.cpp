#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <map>
#include <filesystem>
#include <fstream>
#include <string>

#include "mobimetrics/sha256.hpp"
#include "mobimetrics/util.hpp"

namespace {

namespace fs = std::filesystem;

int run(const std::string& args) {
    const std::string cmd = std::string(MOBIMETRICS_BIN) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string tmp_dir(const char* name) {
    auto p = fs::temp_directory_path() / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p.string();
}

}  // namespace

TEST_CASE("usage errors exit 2") {
    CHECK(run("frobnicate") == 2);
    CHECK(run("") == 2);
    CHECK(run("ingest") == 2);  // --config is required
}

TEST_CASE("--version exits 0") { CHECK(run("--version") == 0); }

TEST_CASE("validation errors exit 1") {
    const std::string dir = tmp_dir("mm_cli_bad");
    CHECK(run("synth --config /nonexistent.cfg --out " + dir) == 1);
    // a config whose window is inverted
    mobimetrics::write_file(dir + "/bad.cfg", "window_start = 2015-01-01\nwindow_end = 2014-01-01\n");
    CHECK(run("ingest --config " + dir + "/bad.cfg --out " + dir) == 1);
    fs::remove_all(dir);
}

TEST_CASE("synth then pipeline stages run end to end") {
    const std::string data = tmp_dir("mm_cli_world");
    const std::string out = tmp_dir("mm_cli_out");
    const std::string cfg = std::string(MOBIMETRICS_WORLDS_DIR) + "/parser.cfg";
    REQUIRE(run("synth --config " + cfg + " --out " + data) == 0);
    CHECK(fs::exists(data + "/positioning.ndjson"));
    CHECK(fs::exists(data + "/run.cfg"));

    REQUIRE(run("ingest --config " + data + "/run.cfg --out " + out) == 0);
    CHECK(fs::exists(out + "/ingest_summary.json"));
    CHECK(fs::exists(out + "/rejects_positioning.csv"));
    REQUIRE(run("cohort --config " + data + "/run.cfg --out " + out) == 0);
    CHECK(fs::exists(out + "/cohort_sizes.csv"));
    REQUIRE(run("presence --config " + data + "/run.cfg --out " + out) == 0);
    CHECK(fs::exists(out + "/presence.csv"));
    CHECK(fs::exists(out + "/employees.csv"));
    REQUIRE(run("index --config " + data + "/run.cfg --out " + out) == 0);
    CHECK(fs::exists(out + "/index_manifest.json"));
    CHECK(fs::exists(out + "/employment_all.csv"));

    // re-running a stage on unchanged inputs is byte-identical
    const std::string first = mobimetrics::sha256_file(out + "/employment_all.csv");
    REQUIRE(run("index --config " + data + "/run.cfg --out " + out) == 0);
    CHECK(mobimetrics::sha256_file(out + "/employment_all.csv") == first);

    // thread count must not change results
    const std::string out2 = tmp_dir("mm_cli_out2");
    REQUIRE(run("index --config " + data + "/run.cfg --out " + out2 + " --threads 4") == 0);
    CHECK(mobimetrics::sha256_file(out2 + "/employment_all.csv") == first);

    fs::remove_all(data);
    fs::remove_all(out);
    fs::remove_all(out2);
}

TEST_CASE("index on a window missing base-year months exits 1 naming the gap") {
    const std::string data = tmp_dir("mm_cli_gap");
    // world whose report months start after the base year ends
    std::string cfg_text = mobimetrics::read_file(std::string(MOBIMETRICS_WORLDS_DIR) + "/parser.cfg");
    cfg_text += "\n";
    mobimetrics::write_file(data + "/world.cfg", cfg_text);
    REQUIRE(run("synth --config " + data + "/world.cfg --out " + data) == 0);

    // rewrite run.cfg with a base year the report months cannot cover
    std::string run_cfg = mobimetrics::read_file(data + "/run.cfg");
    run_cfg += "\n";
    auto pos = run_cfg.find("base_year = 2014");
    REQUIRE(pos != std::string::npos);
    run_cfg.replace(pos, 16, "base_year = 2013");
    mobimetrics::write_file(data + "/run.cfg", run_cfg);

    const std::string out = tmp_dir("mm_cli_gap_out");
    const std::string cmd = std::string(MOBIMETRICS_BIN) + " index --config " + data + "/run.cfg --out " + out +
                            " 2>" + out + "/err.txt >/dev/null";
    const int status = std::system(cmd.c_str());
    CHECK(WEXITSTATUS(status) == 1);
    const std::string err = mobimetrics::read_file(out + "/err.txt");
    CHECK(err.find("missing base-year month 2013-") != std::string::npos);
    fs::remove_all(data);
    fs::remove_all(out);
}

TEST_CASE("full pipeline output matches committed golden checksums") {
    // set MOBIMETRICS_UPDATE_GOLDEN=1 to regenerate after an intentional
    // output format change; goldens were cross-checked against the oracle
    // suites when first committed
    const std::string golden_path = std::string(MOBIMETRICS_GOLDEN_DIR) + "/parser_world_sha256.txt";
    const std::string data = tmp_dir("mm_golden_world");
    const std::string out = tmp_dir("mm_golden_out");
    const std::string cfg = std::string(MOBIMETRICS_WORLDS_DIR) + "/parser.cfg";
    REQUIRE(run("synth --config " + cfg + " --out " + data) == 0);
    for (const char* stage : {"ingest", "cohort", "presence", "index"})
        REQUIRE(run(std::string(stage) + " --config " + data + "/run.cfg --out " + out + "/" + stage) == 0);

    std::map<std::string, std::string> hashes;
    for (const auto& root : {data, out})
        for (const auto& entry : fs::recursive_directory_iterator(root))
            if (entry.is_regular_file()) {
                const std::string rel = (root == data ? "data/" : "out/") +
                                        fs::relative(entry.path(), root).string();
                hashes[rel] = mobimetrics::sha256_file(entry.path().string());
            }
    REQUIRE(hashes.size() > 10);

    if (std::getenv("MOBIMETRICS_UPDATE_GOLDEN")) {
        std::string text;
        for (const auto& [file, digest] : hashes) text += digest + "  " + file + "\n";
        fs::create_directories(MOBIMETRICS_GOLDEN_DIR);
        mobimetrics::write_file(golden_path, text);
        MESSAGE("golden checksums regenerated at ", golden_path);
    } else {
        REQUIRE_MESSAGE(fs::exists(golden_path), "golden file missing; run with MOBIMETRICS_UPDATE_GOLDEN=1");
        std::map<std::string, std::string> golden;
        for (const auto& line : mobimetrics::split(mobimetrics::read_file(golden_path), '\n')) {
            if (line.size() < 70) continue;
            golden[line.substr(66)] = line.substr(0, 64);
        }
        CHECK(golden.size() == hashes.size());
        for (const auto& [file, digest] : golden) {
            REQUIRE_MESSAGE(hashes.count(file), "missing output file: ", file);
            CHECK_MESSAGE(hashes.at(file) == digest, "checksum drift in ", file);
        }
    }
    fs::remove_all(data);
    fs::remove_all(out);
}

TEST_CASE("venue stages: fit, nowcast, detect") {
    const std::string data = tmp_dir("mm_cli_venue");
    const std::string out = tmp_dir("mm_cli_venue_out");
    // small venue world for speed
    std::string cfg_text = mobimetrics::read_file(std::string(MOBIMETRICS_WORLDS_DIR) + "/fraud.cfg");
    auto shrink = [&](const std::string& key, const std::string& repl) {
        auto p = cfg_text.find(key);
        REQUIRE(p != std::string::npos);
        auto e = cfg_text.find('\n', p);
        cfg_text.replace(p, e - p, repl);
    };
    shrink("n_venues_suspected = 30", "n_venues_suspected = 6");
    shrink("n_venues_control = 30", "n_venues_control = 6");
    mobimetrics::write_file(data + "/world.cfg", cfg_text);
    REQUIRE(run("synth --config " + data + "/world.cfg --out " + data) == 0);

    REQUIRE(run("fit --config " + data + "/run.cfg --out " + out) == 0);
    CHECK(fs::exists(out + "/fits.json"));
    REQUIRE(run("nowcast --config " + data + "/run.cfg --out " + out) == 0);
    CHECK(fs::exists(out + "/nowcast_baseline.csv"));
    CHECK(fs::exists(out + "/nowcast_summary.json"));
    REQUIRE(run("detect --config " + data + "/run.cfg --out " + out) == 0);
    CHECK(fs::exists(out + "/anomaly.json"));
    const std::string report = mobimetrics::read_file(out + "/anomaly.json");
    CHECK(report.find("2015-08-25") != std::string::npos);  // flagged window start

    // mobility stages must refuse to run on a venue-only config
    CHECK(run("ingest --config " + data + "/run.cfg --out " + out) == 1);
    fs::remove_all(data);
    fs::remove_all(out);
}
