#include <gtest/gtest.h>

#include "tcsim/config.hpp"
#include "tcsim/error.hpp"
#include "tcsim/io.hpp"
#include "test_support.hpp"

using namespace tcsim;

namespace {

std::filesystem::path default_conf() { return test_support::source_dir() / "config" / "default.conf"; }

}  // namespace

TEST(DefaultConf, MatchesBuiltInDefaults) {
    auto s = load_settings(default_conf());
    EXPECT_EQ(settings_map(s), settings_map(Settings{}));
}

TEST(DefaultConf, ShippedValues) {
    auto s = load_settings(default_conf());
    EXPECT_EQ(s.threshold_for(Technique::overlap), 0.70);
    EXPECT_EQ(s.threshold_for(Technique::jaccard), 0.60);
    EXPECT_EQ(s.threshold_for(Technique::cosine_counts), 0.85);
    EXPECT_EQ(s.threshold_for(Technique::combined), 0.75);
    EXPECT_EQ(s.threshold_for(Technique::same_steps), 1.0);
    EXPECT_EQ(s.w_name, 0.5);
    EXPECT_EQ(s.dim, 300u);
    EXPECT_EQ(s.window, 2u);
    EXPECT_EQ(s.quorum, 3u);
    EXPECT_EQ(s.k_min, 50u);
    EXPECT_EQ(s.k_max, 15000u);
    EXPECT_EQ(s.k_step, 50u);
    EXPECT_EQ(s.t_min, 0.1);
    EXPECT_EQ(s.t_step, 0.05);
}

TEST(DefaultConf, SerializationRoundTrips) {
    Settings s;
    s.dim = 17;
    s.name_mode = NameMode::pooled_cosine;
    s.threshold_jaccard = 0.45;
    s.lemmatize_verbs = true;
    auto again = parse_settings(serialize_settings(s));
    EXPECT_EQ(settings_map(again), settings_map(s));
}

TEST(SettingsWiring, DerivedConfigs) {
    auto s = parse_settings(
        "seed = 9\nthreads = 4\nword2vec.dim = 12\nword2vec.window = 3\nword2vec.epochs = 2\n"
        "word2vec.learning_rate = 0.05\ncluster.k_min = 5\ncluster.k_max = 40\ncluster.k_step = 5\n"
        "kmeans.max_iter = 7\nkmeans.tol = 0.5\nmatrix.max_items = 99\nmatrix.empty_penalty = 3\n"
        "cases.t_min = 0.2\ncases.t_max = 0.9\ncases.t_step = 0.1\npreprocess.prune_singletons = false\n"
        "preprocess.drop_numbers = false\n");
    auto cbow = s.cbow();
    EXPECT_EQ(cbow.dim, 12u);
    EXPECT_EQ(cbow.window, 3u);
    EXPECT_EQ(cbow.epochs, 2u);
    EXPECT_EQ(cbow.initial_learning_rate, 0.05);
    EXPECT_EQ(cbow.seed, 9u);
    auto k = s.k_grid();
    EXPECT_EQ(k.k_min, 5u);
    EXPECT_EQ(k.k_max, 40u);
    EXPECT_EQ(k.k_step, 5u);
    EXPECT_EQ(s.kmeans().max_iter, 7u);
    EXPECT_EQ(s.kmeans().tol, 0.5);
    auto m = s.matrix();
    EXPECT_EQ(m.max_items, 99u);
    EXPECT_EQ(m.threads, 4u);
    EXPECT_EQ(m.empty_penalty, 3.0);
    auto t = s.t_grid();
    EXPECT_EQ(t.t_min, 0.2);
    EXPECT_EQ(t.t_max, 0.9);
    EXPECT_EQ(t.step, 0.1);
    auto p = s.preprocess();
    EXPECT_FALSE(p.prune_singletons);
    EXPECT_FALSE(p.drop_numbers);
    EXPECT_EQ(p.stopword_list, default_stopwords());
}

TEST(SettingsWiring, FilesResolveAgainstConfigDirectory) {
    auto s = load_settings(test_support::fixture_dir() / "fixture.conf");
    EXPECT_EQ(s.misspelling_file, test_support::fixture_dir() / "misspellings.csv");
    auto p = s.preprocess();
    EXPECT_FALSE(p.misspelling_map.empty());
    EXPECT_EQ(s.k_min, 10u);
    EXPECT_EQ(s.k_max, 170u);
    EXPECT_EQ(s.k_step, 10u);
}

TEST(SettingsWiring, ThresholdChangesTheReport) {
    // A lower threshold for a technique flags at least as many pairs.
    ScoreTable scores({"a", "b", "c"});
    scores.set(0, 1, 0.65);
    scores.set(0, 2, 0.2);
    scores.set(1, 2, 0.9);
    auto strict = parse_settings("cases.threshold.overlap = 0.95\n");
    auto loose = parse_settings("cases.threshold.overlap = 0.6\n");
    auto r1 = report(scores, Technique::overlap, strict.threshold_for(Technique::overlap));
    auto r2 = report(scores, Technique::overlap, loose.threshold_for(Technique::overlap));
    EXPECT_EQ(r1.pairs.size(), 0u);
    EXPECT_EQ(r2.pairs.size(), 2u);
}

TEST(SettingsErrors, UnknownKeysAndBadValues) {
    auto expect_line = [](const std::string& text, const std::string& needle) {
        try {
            parse_settings(text);
            FAIL() << "expected a config error for " << text;
        } catch (const ConfigError& e) {
            EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
        }
    };
    expect_line("seed = 1\nword2vec.dimension = 5\n", "line 2");
    expect_line("word2vec.dim = many\n", "line 1");
    expect_line("word2vec.dim = -3\n", "line 1");
    expect_line("matrix.relaxed_wmd = maybe\n", "line 1");
    expect_line("no equals sign\n", "line 1");
    EXPECT_THROW(parse_settings("cases.name_mode = telepathy\n"), ConfigError);
    EXPECT_NO_THROW(parse_settings("# only a comment\n\n   \nseed = 3   # trailing\n"));
    EXPECT_EQ(parse_settings("seed = 3   # trailing\n").seed, 3u);
}

TEST(SettingsErrors, MissingFile) {
    EXPECT_THROW(load_settings("/nonexistent/tcsim.conf"), IoError);
}
