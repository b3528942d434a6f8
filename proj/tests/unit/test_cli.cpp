#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>

#include <json.hpp>

#include "tcsim/app/cli.hpp"
#include "tcsim/io.hpp"
#include "test_support.hpp"

namespace {

struct RunResult {
    int code = 0;
    std::string out;
    std::string err;
    [[nodiscard]] nlohmann::json json() const { return nlohmann::json::parse(out); }
};

/// Runs `tcsim` in-process against a private workspace.
class Cli : public ::testing::Test {
protected:
    test_support::TempDir dir{"cli"};

    RunResult run(std::vector<std::string> args, bool fixture_config = true) {
        std::vector<std::string> full{"tcsim", "--workspace", (dir.path() / "ws").string()};
        if (fixture_config) {
            full.push_back("--config");
            full.push_back((test_support::fixture_dir() / "fixture.conf").string());
        }
        full.insert(full.end(), args.begin(), args.end());
        std::vector<const char*> argv;
        for (const auto& a : full) argv.push_back(a.c_str());
        std::ostringstream out, err;
        RunResult r;
        r.code = tcsim::app::run(static_cast<int>(argv.size()), argv.data(), out, err);
        r.out = out.str();
        r.err = err.str();
        return r;
    }

    RunResult ingest_fixture() { return run({"ingest", (test_support::fixture_dir() / "corpus.jsonl").string()}); }
    std::string gt(const char* name) { return (test_support::fixture_dir() / name).string(); }
};

}  // namespace

TEST_F(Cli, UsageErrors) {
    EXPECT_EQ(run({"ingest"}).code, tcsim::app::usage_exit_code);
    EXPECT_EQ(run({"cluster-steps", "--k", "many"}).code, tcsim::app::usage_exit_code);
    auto r = run({"frobnicate"});
    EXPECT_EQ(r.code, tcsim::app::usage_exit_code);
    EXPECT_NE(r.err.find("error[usage]"), std::string::npos);
    EXPECT_EQ(run({"--help"}).code, 0);
}

TEST_F(Cli, IngestTwiceIsCached) {
    auto first = ingest_fixture();
    ASSERT_EQ(first.code, 0) << first.err;
    auto j1 = first.json();
    EXPECT_EQ(j1["cases"], 40);
    EXPECT_EQ(j1["steps"], 170);
    EXPECT_EQ(j1["cached"], false);
    auto j2 = ingest_fixture().json();
    EXPECT_EQ(j2["cached"], true);
    EXPECT_EQ(j2["artifact_sha256"], j1["artifact_sha256"]);
}

TEST_F(Cli, ArgumentValidation) {
    ASSERT_EQ(ingest_fixture().code, 0);
    auto k0 = run({"cluster-steps", "--algorithm", "hac", "--k", "0"});
    EXPECT_EQ(k0.code, 7);
    EXPECT_NE(k0.err.find("error[config]"), std::string::npos);
    auto high = run({"similar-cases", "--technique", "overlap", "--threshold", "1.1"});
    EXPECT_EQ(high.code, 4);
    EXPECT_NE(high.err.find("error[validation]"), std::string::npos);
    EXPECT_EQ(run({"similar-cases", "--technique", "telepathy"}).code, 7);
    EXPECT_EQ(run({"cluster-steps", "--algorithm", "hac", "--sweep"}).code, 7);
    EXPECT_EQ(run({"--threads", "0", "ingest", gt("corpus.jsonl")}).code, 7);
}

TEST_F(Cli, MissingCorpusFile) {
    EXPECT_EQ(run({"ingest", (dir.path() / "absent.jsonl").string()}).code, 8);
}

TEST_F(Cli, ExternalEmbeddingsMustCoverEveryStep) {
    auto data = test_support::data_dir() / "external";
    ASSERT_EQ(run({"ingest", (data / "mini_corpus.jsonl").string()}, false).code, 0);
    auto bad = run({"embed", "--backend", "external:mini", "--input", (data / "mini_missing.embx").string()}, false);
    EXPECT_EQ(bad.code, 6);
    for (const char* id : {"M2.2", "M3.1", "M3.2"}) EXPECT_NE(bad.err.find(id), std::string::npos) << bad.err;
    auto good = run({"embed", "--backend", "external:mini", "--input", (data / "mini.embx").string()}, false);
    ASSERT_EQ(good.code, 0) << good.err;
    EXPECT_EQ(good.json()["entries"], 6);
    auto c = run({"cluster-steps", "--backend", "external:mini", "--algorithm", "hac", "--k", "3"}, false);
    ASSERT_EQ(c.code, 0) << c.err;
    EXPECT_EQ(c.json()["clusters"], 3);
}

TEST_F(Cli, SweepEvaluatePlot) {
    ASSERT_EQ(ingest_fixture().code, 0);
    auto sweep = run({"cluster-steps", "--algorithm", "kmeans", "--sweep", "--gt", gt("steps_gt.csv")});
    ASSERT_EQ(sweep.code, 0) << sweep.err;
    auto sj = sweep.json();
    EXPECT_EQ(sj["evaluated"], 17);
    auto eval = run({"evaluate", "--artifact", sj["artifact"].get<std::string>(), "--gt", gt("steps_gt.csv")});
    ASSERT_EQ(eval.code, 0) << eval.err;
    EXPECT_DOUBLE_EQ(eval.json()["f_score"].get<double>(), sj["best_f"].get<double>());

    auto plot = run({"plot", "--sweep", "sweeps/word2vec.kmeans"});
    ASSERT_EQ(plot.code, 0) << plot.err;
    auto pj = plot.json();
    EXPECT_EQ(pj["points"], 17);
    EXPECT_EQ(pj["best_k"], sj["best_k"]);
    auto rows = tcsim::io::read_file(pj["csv"].get<std::string>());
    EXPECT_EQ(std::count(rows.begin(), rows.end(), '\n'), 18);
    EXPECT_TRUE(std::filesystem::exists(pj["svg"].get<std::string>()));

    auto cases = run({"similar-cases", "--technique", "combined", "--sweep", "--gt", gt("cases_gt.csv")});
    ASSERT_EQ(cases.code, 0) << cases.err;
    auto cj = cases.json();
    EXPECT_EQ(cj["threshold"], cj["best_threshold"]);
    auto ce = run({"evaluate", "--artifact", "cases/combined", "--gt", gt("cases_gt.csv")});
    ASSERT_EQ(ce.code, 0) << ce.err;
    EXPECT_DOUBLE_EQ(ce.json()["f_score"].get<double>(), cj["best_f"].get<double>());
    EXPECT_EQ(run({"evaluate", "--artifact", "clusters/none", "--gt", gt("cases_gt.csv")}).code, 9);
}

TEST_F(Cli, OnePointPlot) {
    auto csv = dir.path() / "single.csv";
    tcsim::io::write_file_atomic(csv, "threshold,f_score\n0.5,0.25\n");
    auto r = run({"plot", "--sweep", csv.string(), "--out", (dir.path() / "out" / "single").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    auto j = r.json();
    EXPECT_EQ(j["points"], 1);
    EXPECT_EQ(j["best_threshold"], 0.5);
    EXPECT_TRUE(std::filesystem::exists(dir.path() / "out" / "single.svg"));
}
