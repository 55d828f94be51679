#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "pucl/io.hpp"

using namespace pucl;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch_dir() {
    fs::path dir = fs::temp_directory_path() / "pucl-cli-test";
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

int run_cli(const std::string& args, const std::string& capture_path = "") {
    std::string cmd = std::string("\"") + PUCL_CLI_PATH + "\" " + args;
    cmd += capture_path.empty() ? std::string(" > /dev/null 2>&1")
                                : " > " + capture_path + " 2>&1";
    int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("generate is deterministic under flags and validates its inputs") {
    fs::path dir = scratch_dir();
    std::string base = " --preset two-moons --n 120 --alpha 0.1 --c 0.05 --seed 7 --out ";
    CHECK(run_cli("generate" + base + (dir / "a.csv").string()) == 0);
    CHECK(run_cli("generate" + base + (dir / "b.csv").string()) == 0);
    CHECK(read_text_file((dir / "a.csv").string()) == read_text_file((dir / "b.csv").string()));

    CHECK(run_cli("generate --preset two-moons --n 120 --alpha 0.1 --c 0.05 --seed 8 --out " +
                  (dir / "c.csv").string()) == 0);
    CHECK(read_text_file((dir / "a.csv").string()) != read_text_file((dir / "c.csv").string()));

    // exit 1 on validation problems: bad alpha, refused overwrite, bad flag
    CHECK(run_cli("generate --preset two-moons --n 10 --alpha 1.5 --out " +
                  (dir / "d.csv").string()) == 1);
    CHECK(run_cli("generate" + base + (dir / "a.csv").string()) == 1);
    CHECK(run_cli("generate --no-such-flag") == 1);
}

TEST_CASE("train writes a manifest whose replay reproduces the hashes") {
    fs::path dir = scratch_dir();
    std::string data = (dir / "data.csv").string();
    REQUIRE(run_cli("generate --preset clusters --n 200 --alpha 0.15 --c 0.2 --seed 3 "
                    "--clusters 4 --dim 5 --sigma 0.6 --out " + data) == 0);

    std::string run_dir = (dir / "run1").string();
    REQUIRE(run_cli("train " + data +
                    " --epochs 2 --batch-size 40 --m-u 6 --hidden 8 --emb-dim 4 --lr 0.05 "
                    "--run-dir " + run_dir) == 0);
    json manifest = json::parse(read_text_file(run_dir + "/manifest.json"));
    CHECK(manifest.at("config").at("objective") == "pucl");
    CHECK(manifest.at("outputs").at("checkpoint").at("hash").get<std::string>().size() == 16);

    std::string log = (dir / "replay.log").string();
    CHECK(run_cli("train --from-manifest " + run_dir + "/manifest.json --out-dir " +
                  (dir / "replays").string(), log) == 0);
    CHECK(read_text_file(log).find("reproduced: output hashes match the manifest") !=
          std::string::npos);

    // passing both a dataset and a manifest is ambiguous
    CHECK(run_cli("train " + data + " --from-manifest " + run_dir + "/manifest.json") == 1);
}

TEST_CASE("the debiased objective records the forced c in its manifest") {
    fs::path dir = scratch_dir();
    std::string data = (dir / "data.csv").string();
    REQUIRE(run_cli("generate --preset two-moons --n 150 --alpha 0.2 --c 0.3 --seed 5 --out " +
                    data) == 0);
    std::string run_dir = (dir / "deb-run").string();
    REQUIRE(run_cli("train " + data +
                    " --objective deb --alpha 0.2 --c 0.3 --epochs 1 --batch-size 30 --m-u 6 "
                    "--hidden 8 --emb-dim 4 --run-dir " + run_dir) == 0);
    json manifest = json::parse(read_text_file(run_dir + "/manifest.json"));
    CHECK(manifest.at("config").at("c") == 0.0);
    bool noted = false;
    for (const auto& note : manifest.at("notes"))
        if (note.get<std::string>().find("forced to 0") != std::string::npos) noted = true;
    CHECK(noted);
}

TEST_CASE("config files feed flags and the command line wins") {
    fs::path dir = scratch_dir();
    std::string data = (dir / "data.csv").string();
    REQUIRE(run_cli("generate --preset two-moons --n 150 --alpha 0.2 --c 0.3 --seed 5 --out " +
                    data) == 0);
    write_text_file((dir / "train.cfg").string(),
                    "epochs=1\nbatch-size=30\nm-u=6\nhidden=8\nemb-dim=4\nalpha=0.25\n");

    std::string run_a = (dir / "run-a").string();
    REQUIRE(run_cli("train " + data + " --config " + (dir / "train.cfg").string() +
                    " --run-dir " + run_a) == 0);
    json a = json::parse(read_text_file(run_a + "/manifest.json"));
    CHECK(a.at("config").at("alpha") == 0.25);
    CHECK(a.at("config").at("epochs") == 1);

    std::string run_b = (dir / "run-b").string();
    REQUIRE(run_cli("train " + data + " --config " + (dir / "train.cfg").string() +
                    " --alpha 0.4 --run-dir " + run_b) == 0);
    json b = json::parse(read_text_file(run_b + "/manifest.json"));
    CHECK(b.at("config").at("alpha") == 0.4);
}

TEST_CASE("eval skips the probe on label-free feature matrices") {
    fs::path dir = scratch_dir();
    std::string data = (dir / "data.csv").string();
    REQUIRE(run_cli("generate --preset two-moons --n 150 --alpha 0.2 --c 0.3 --seed 5 --out " +
                    data) == 0);
    std::string run_dir = (dir / "run").string();
    REQUIRE(run_cli("train " + data +
                    " --epochs 1 --batch-size 30 --m-u 6 --hidden 8 --emb-dim 4 --run-dir " +
                    run_dir) == 0);

    std::string log = (dir / "eval.log").string();
    REQUIRE(run_cli("eval --checkpoint " + run_dir + "/checkpoint.ckpt --data " + data, log) == 0);
    CHECK(read_text_file(log).find("probe accuracy ") != std::string::npos);

    write_text_file((dir / "plain.csv").string(), "0.5,0.5\n-0.5,0.25\n1.0,-1.0\n0.1,0.9\n");
    REQUIRE(run_cli("eval --checkpoint " + run_dir + "/checkpoint.ckpt --features --data " +
                    (dir / "plain.csv").string(), log) == 0);
    CHECK(read_text_file(log).find("probe skipped") != std::string::npos);
}
