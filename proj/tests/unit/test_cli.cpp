#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"

#include "calib/cli.hpp"
#include "calib/error.hpp"
#include "calib/text.hpp"

namespace fs = std::filesystem;
using namespace calib;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result call(std::vector<std::string> args) {
    std::vector<const char*> argv{"calib"};
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

struct TempDir {
    fs::path path = fs::temp_directory_path() / "calib_cli_test";
    TempDir() { fs::create_directories(path); }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& name) const { return (path / name).string(); }
};

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("config parsing") {
    CHECK(cli::parse_config("gamma = 0.2\n").gamma == 0.2);
    const auto empty = cli::parse_config("");
    CHECK_FALSE(empty.gamma.has_value());
    CHECK_FALSE(empty.bins.has_value());
    const auto c = cli::parse_config("# comment\nbin_kind = equal-mass\nbins = 10  # trailing\ngammas = 0.1,1\n");
    CHECK(c.bin_kind == std::optional<std::string>("equal-mass"));
    CHECK(c.bins == std::optional<std::size_t>(10));
    CHECK(c.gammas->size() == 2);
    try {
        cli::parse_config("gama = 0.2\n");
        FAIL("expected a config error");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("gama") != std::string::npos);
        CHECK(msg.find("line 1") != std::string::npos);
    }
    CHECK_THROWS_AS(cli::parse_config("bins = -3\n"), ConfigError);
    CHECK_THROWS_AS(cli::parse_config("just words\n"), ConfigError);
}

TEST_CASE("merge prefers the primary fields") {
    cli::RunConfig a, b;
    a.gamma = 0.1;
    b.gamma = 0.5;
    b.bins = 7;
    const auto m = cli::merge(a, b);
    CHECK(m.gamma == 0.1);
    CHECK(m.bins == std::optional<std::size_t>(7));
}

TEST_CASE("usage errors exit with 2") {
    CHECK(call({}).code == 2);
    CHECK(call({"bogus"}).code == 2);
    const auto r = call({"metrics", "--features", "f.csv", "--gamma", "0.1"});
    CHECK(r.code == 2);
    CHECK(r.err.find("--preds") != std::string::npos);
    CHECK(call({"metrics", "--preds", "p.csv", "--unknown-flag", "1"}).code == 2);
}

TEST_CASE("end-to-end runs") {
    TempDir dir;
    REQUIRE(call({"synth", "--n", "400", "--d", "4", "--seed", "1", "--out-preds", dir / "p.csv", "--out-feats",
                  dir / "f.csv", "--out-truth", dir / "t.csv"})
                .code == 0);
    REQUIRE(call({"synth", "--n", "300", "--d", "4", "--seed", "2", "--out-preds", dir / "e.csv", "--out-feats",
                  dir / "ef.csv"})
                .code == 0);

    SUBCASE("metrics writes a report") {
        const auto r = call({"metrics", "--preds", dir / "p.csv", "--features", dir / "f.csv", "--kernel",
                             "laplacian", "--gamma", "0.4", "--bins", "15", "--pca", "2", "--out", dir / "m.txt"});
        CHECK(r.code == 0);
        const auto report = text::read_file(dir / "m.txt");
        CHECK(report.find("mlce") != std::string::npos);
        CHECK(report.find("max_group_mce") != std::string::npos);
    }
    SUBCASE("data errors exit with 1") {
        text::write_file_atomic(dir / "bad.csv", "id,y_true,y_pred,conf\nc,0,0,1.2\n");
        CHECK(call({"metrics", "--preds", dir / "bad.csv", "--features", dir / "f.csv", "--gamma", "0.1"}).code == 1);
        CHECK(call({"metrics", "--preds", dir / "p.csv", "--features", dir / "ef.csv", "--gamma", "0.1"}).code == 1);
    }
    SUBCASE("sweep gives one row per bandwidth") {
        const auto r = call({"sweep", "--preds", dir / "p.csv", "--features", dir / "f.csv", "--gammas",
                             "0.01,0.1,1,10,100,1e9", "--out", dir / "s.csv"});
        CHECK(r.code == 0);
        const auto csv = text::read_file(dir / "s.csv");
        std::size_t data_rows = 0;
        std::istringstream in(csv);
        for (std::string line; std::getline(in, line);) {
            data_rows += !line.empty() && line[0] != '#' && std::isdigit(static_cast<unsigned char>(line[0]));
        }
        CHECK(data_rows == 6);
    }
    SUBCASE("config file supplies values and flags override it") {
        text::write_file_atomic(dir / "c.conf", "gamma = 1e9\nbins = 15\n");
        auto r = call({"metrics", "--config", dir / "c.conf", "--preds", dir / "p.csv", "--features", dir / "f.csv",
                       "--out", dir / "m1.txt"});
        CHECK(r.code == 0);
        r = call({"metrics", "--config", dir / "c.conf", "--gamma", "0.2", "--preds", dir / "p.csv", "--features",
                  dir / "f.csv", "--out", dir / "m2.txt"});
        CHECK(r.code == 0);
        CHECK(text::read_file(dir / "m1.txt") != text::read_file(dir / "m2.txt"));
        text::write_file_atomic(dir / "typo.conf", "gama = 0.2\n");
        r = call({"metrics", "--config", dir / "typo.conf", "--preds", dir / "p.csv", "--features", dir / "f.csv"});
        CHECK(r.code == 1);
        CHECK(r.err.find("gama") != std::string::npos);
    }
    SUBCASE("recalibrate, reload the state, and compare decisions") {
        auto r = call({"recalibrate", "--method", "lore", "--recal", dir / "p.csv", "--recal-features", dir / "f.csv",
                       "--eval", dir / "e.csv", "--eval-features", dir / "ef.csv", "--gamma", "0.1", "--out",
                       dir / "r.csv", "--save-state", dir / "state.json"});
        REQUIRE(r.code == 0);
        r = call({"recalibrate", "--load-state", dir / "state.json", "--eval", dir / "e.csv", "--eval-features",
                  dir / "ef.csv", "--out", dir / "r2.csv"});
        REQUIRE(r.code == 0);
        CHECK(text::read_file(dir / "r.csv") == text::read_file(dir / "r2.csv"));
        r = call({"decision", "--preds", dir / "e.csv", "--recal-preds", dir / "r.csv", "--out", dir / "d.csv"});
        CHECK(r.code == 0);
        const auto d = text::read_file(dir / "d.csv");
        CHECK(d.find("ratio,cost_orig,cost_recal,improvement") != std::string::npos);
        CHECK(d.find("# prr[orig]:") != std::string::npos);
    }
    SUBCASE("every recalibration method runs") {
        for (const char* m : {"hb", "ir", "group-hb"}) {
            CHECK(call({"recalibrate", "--method", m, "--recal", dir / "p.csv", "--eval", dir / "e.csv", "--out",
                        dir / "x.csv"})
                      .code == 0);
        }
        CHECK(call({"recalibrate", "--method", "magic", "--recal", dir / "p.csv", "--eval", dir / "e.csv", "--out",
                    dir / "x.csv"})
                  .code == 2);
    }
    SUBCASE("fairness and landscape") {
        CHECK(call({"fairness", "--preds", dir / "p.csv", "--out", dir / "fair.txt"}).code == 0);
        CHECK(text::read_file(dir / "fair.txt").find("group_mce[c0]") != std::string::npos);
        text::write_file_atomic(dir / "emb.csv", [&] {
            std::string s = "id,f0,f1\n";
            for (int i = 0; i < 400; ++i) {
                s += "s" + std::to_string(i) + "," + std::to_string(i) + ",0\n";
            }
            return s;
        }());
        CHECK(call({"landscape", "--preds", dir / "p.csv", "--features", dir / "f.csv", "--embed", dir / "emb.csv",
                    "--gamma", "0.1", "--out", dir / "land.csv"})
                  .code == 0);
        CHECK(count_lines(text::read_file(dir / "land.csv")) == 401);
    }
    SUBCASE("reports are stable unless stamped") {
        const std::vector<std::string> base{"metrics", "--preds", dir / "p.csv", "--features", dir / "f.csv",
                                            "--gamma", "0.1"};
        auto a = base, b = base;
        a.insert(a.end(), {"--out", dir / "a.txt"});
        b.insert(b.end(), {"--out", dir / "b.txt", "--threads", "3"});
        REQUIRE(call(a).code == 0);
        REQUIRE(call(b).code == 0);
        CHECK(text::read_file(dir / "a.txt") == text::read_file(dir / "b.txt"));
        b.push_back("--stamp");
        REQUIRE(call(b).code == 0);
        CHECK(text::read_file(dir / "b.txt") != text::read_file(dir / "a.txt"));
    }
}
