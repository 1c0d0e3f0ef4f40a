#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "oodsim/correlation/analysis.hpp"
#include "support.hpp"

using namespace oodsim;
using namespace oodsim::testing;

namespace {

const std::string kData = OODSIM_DATA_DIR;

PerformanceTable reference_perf() { return load_performance_table(kData + "/reference_performance.csv"); }
SimilarityReport reference_sims() { return load_similarity_report(kData + "/reference_similarity.csv"); }

PerformanceTable perf_from(const std::vector<std::tuple<std::string, std::string, double>>& rows) {
    PerformanceTable t;
    for (const auto& [a, b, s] : rows) t.rows.push_back({a, b, s, Measure::Accuracy});
    return t;
}

SimilarityReport sims_from(const std::vector<std::tuple<std::string, std::string, Metric, double>>& rows) {
    SimilarityReport r;
    for (const auto& [a, b, m, v] : rows) r.records.push_back({a, b, m, v, 0, 0});
    return r;
}

} // namespace

TEST(Fixtures, Shapes) {
    const auto perf = reference_perf();
    EXPECT_EQ(perf.rows.size(), 36u);
    EXPECT_EQ(perf.train_names().size(), 12u);
    const auto sims = reference_sims();
    EXPECT_EQ(sims.records.size(), 144u);
    EXPECT_EQ(sims.metrics().size(), 4u);
    EXPECT_NO_THROW(check_aligned(perf, sims));
}

TEST(IdOodGap, ThreeExceptionsOnFixture) {
    std::set<std::string> flagged;
    for (const auto& g : id_ood_gap(reference_perf()))
        if (g.is_exception) flagged.insert(g.train);
    EXPECT_EQ(flagged, (std::set<std::string>{"CS", "News", "WNLI"}));
}

TEST(IdOodGap, CsRowDetails) {
    for (const auto& g : id_ood_gap(reference_perf()))
        if (g.train == "CS") {
            EXPECT_DOUBLE_EQ(g.id_score, 0.49);
            EXPECT_DOUBLE_EQ(*g.max_ood_score, 0.84);
            EXPECT_EQ(g.max_ood_test, "QASC");
            EXPECT_TRUE(g.strictly_exceeded);
            EXPECT_FALSE(g.tie);
        }
}

TEST(IdOodGap, SmallCases) {
    auto g = id_ood_gap(perf_from({{"A", "A", 0.9}, {"A", "B", 0.1}}));
    EXPECT_FALSE(g[0].is_exception);
    g = id_ood_gap(perf_from({{"A", "A", 0.7}, {"A", "B", 0.7}}));
    EXPECT_TRUE(g[0].is_exception);
    EXPECT_TRUE(g[0].tie);
    EXPECT_FALSE(g[0].strictly_exceeded);
    EXPECT_THROW(id_ood_gap(perf_from({{"A", "B", 0.7}})), DataError);
}

TEST(Correlate, ReferenceTablesMatchBruteForceOracles) {
    const auto perf = reference_perf();
    const auto sims = reference_sims();
    const auto kendall = correlate(perf, sims, CorrelationMethod::KendallTau);
    const auto pear = correlate(perf, sims, CorrelationMethod::Pearson);
    EXPECT_EQ(kendall.entries.size(), 48u);
    for (const auto& train : perf.train_names())
        for (auto m : kAllMetrics) {
            std::vector<std::pair<std::string, double>> rows;
            for (const auto& r : perf.rows)
                if (r.train == train) rows.emplace_back(r.test, r.score);
            std::vector<double> xs, ys;
            for (const auto& [test, score] : rows) {
                xs.push_back(score);
                ys.push_back(*sims.value(train, test, m));
            }
            const auto* k = kendall.find(train, m, CorrelationMethod::KendallTau);
            ASSERT_NE(k, nullptr);
            EXPECT_EQ(k->n, 3u);
            EXPECT_EQ(k->coefficient, kendall_oracle(xs, ys)) << train << " " << to_string(m);
            const auto* p = pear.find(train, m, CorrelationMethod::Pearson);
            ASSERT_TRUE(p->coefficient);
            EXPECT_NEAR(*p->coefficient, *pearson_oracle(xs, ys), 1e-9) << train << " " << to_string(m);
        }
}

TEST(Correlate, ImdbWstnKendallByPairCounting) {
    // IMDb row of the fixtures: tests IMDb, SST2, Yelp
    const auto perf = reference_perf();
    const auto sims = reference_sims();
    double x[3], y[3];
    const char* tests[] = {"IMDb", "SST2", "Yelp"};
    for (int i = 0; i < 3; ++i) {
        for (const auto& r : perf.rows)
            if (r.train == "IMDb" && r.test == tests[i]) x[i] = r.score;
        y[i] = *sims.value("IMDb", tests[i], Metric::Wstn);
    }
    int concordant = 0, discordant = 0;
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j) {
            const double s = (x[i] - x[j]) * (y[i] - y[j]);
            concordant += s > 0;
            discordant += s < 0;
        }
    const auto report = correlate(perf, sims, CorrelationMethod::KendallTau);
    EXPECT_EQ(*report.find("IMDb", Metric::Wstn, CorrelationMethod::KendallTau)->coefficient,
              (concordant - discordant) / 3.0);
}

TEST(Correlate, OrientationAndIdentity) {
    const auto perf = perf_from({{"A", "A", 0.9}, {"A", "B", 0.5}, {"A", "C", 0.2}});
    const auto sims = sims_from({{"A", "A", Metric::Cosine, 0.9},
                                 {"A", "B", Metric::Cosine, 0.5},
                                 {"A", "C", Metric::Cosine, 0.2},
                                 {"A", "A", Metric::Wstn, -0.9 + 1},
                                 {"A", "B", Metric::Wstn, -0.5 + 1},
                                 {"A", "C", Metric::Wstn, -0.2 + 1}});
    for (auto method : {CorrelationMethod::KendallTau, CorrelationMethod::Pearson, CorrelationMethod::Spearman}) {
        const auto r = correlate(perf, sims, method);
        EXPECT_NEAR(*r.find("A", Metric::Cosine, method)->coefficient, 1.0, 1e-12);
        EXPECT_NEAR(*r.find("A", Metric::Cosine, method)->agreement, 1.0, 1e-12);
        EXPECT_NEAR(*r.find("A", Metric::Wstn, method)->coefficient, -1.0, 1e-12);
        EXPECT_NEAR(*r.find("A", Metric::Wstn, method)->agreement, 1.0, 1e-12);
    }
}

TEST(Correlate, RowOrderInvariant) {
    auto perf = reference_perf();
    auto sims = reference_sims();
    const auto base = correlate(perf, sims, CorrelationMethod::KendallTau);
    Rng rng(4);
    for (int t = 0; t < 5; ++t) {
        for (std::size_t i = perf.rows.size(); i > 1; --i) std::swap(perf.rows[i - 1], perf.rows[rng.below(i)]);
        for (std::size_t i = sims.records.size(); i > 1; --i) std::swap(sims.records[i - 1], sims.records[rng.below(i)]);
        EXPECT_EQ(correlate(perf, sims, CorrelationMethod::KendallTau), base);
    }
}

TEST(Correlate, MisalignedInputsRejected) {
    const auto perf = perf_from({{"A", "A", 0.9}, {"A", "B", 0.5}});
    EXPECT_THROW(correlate(perf, sims_from({{"A", "A", Metric::Cosine, 0.9}}), CorrelationMethod::Pearson), DataError);
    EXPECT_THROW(correlate(perf,
                           sims_from({{"A", "A", Metric::Cosine, 0.9},
                                      {"A", "B", Metric::Cosine, 0.5},
                                      {"A", "C", Metric::Cosine, 0.5}}),
                           CorrelationMethod::Pearson),
                 DataError);
}

TEST(Correlate, ExcludingIdRowsLeavesTwoPoints) {
    const auto r = correlate(reference_perf(), reference_sims(), CorrelationMethod::Pearson, {false});
    for (const auto& e : r.entries) EXPECT_EQ(e.n, 2u);
}

TEST(Correlate, ConstantColumnIsUndefined) {
    const auto perf = perf_from({{"A", "A", 0.5}, {"A", "B", 0.5}, {"A", "C", 0.5}});
    const auto sims = sims_from({{"A", "A", Metric::Cosine, 0.9}, {"A", "B", Metric::Cosine, 0.5}, {"A", "C", Metric::Cosine, 0.1}});
    const auto r = correlate(perf, sims, CorrelationMethod::KendallTau);
    EXPECT_FALSE(r.entries[0].coefficient);
    EXPECT_EQ(consistency_count(r, CorrelationMethod::KendallTau, 0.0).at(Metric::Cosine), 0);
}

TEST(ConsistencyCount, Bounds) {
    const auto perf = perf_from({{"A", "A", 0.9}, {"A", "B", 0.5}, {"B", "B", 0.9}, {"B", "A", 0.1}});
    const auto sims = sims_from({{"A", "A", Metric::Cosine, 0.9},
                                 {"A", "B", Metric::Cosine, 0.5},
                                 {"B", "B", Metric::Cosine, 0.9},
                                 {"B", "A", Metric::Cosine, 0.1}});
    const auto r = correlate(perf, sims, CorrelationMethod::Pearson);
    EXPECT_EQ(consistency_count(r, CorrelationMethod::Pearson, 1.0).at(Metric::Cosine), 2);
    EXPECT_EQ(consistency_count(r, CorrelationMethod::Pearson, 1.1).at(Metric::Cosine), 0);
}

TEST(ConsistencyCount, FixtureCountsAtDefaultThreshold) {
    const auto perf = reference_perf();
    const auto sims = reference_sims();
    const auto k = consistency_count(correlate(perf, sims, CorrelationMethod::KendallTau), CorrelationMethod::KendallTau);
    EXPECT_EQ(k, (std::map<Metric, int>{{Metric::Cosine, 8}, {Metric::Mauve, 7}, {Metric::Wstn, 10}, {Metric::JSD, 6}}));
    const auto p = consistency_count(correlate(perf, sims, CorrelationMethod::Pearson), CorrelationMethod::Pearson);
    EXPECT_EQ(p, (std::map<Metric, int>{{Metric::Cosine, 9}, {Metric::Mauve, 6}, {Metric::Wstn, 9}, {Metric::JSD, 7}}));
}

TEST(PerformanceCsv, ParseErrorsAndRoundTrip) {
    EXPECT_THROW(parse_performance_csv("train,test\nA,B\n"), DataError);
    EXPECT_THROW(parse_performance_csv("train,test,score\nA,B,x\n"), DataError);
    EXPECT_THROW(parse_performance_csv("train,test,score\nA,B,1.5\n"), DataError);
    EXPECT_THROW(parse_performance_csv("train,test,score\nA,B,0.5\nA,B,0.6\n"), DataError);
    const auto t = reference_perf();
    const auto back = parse_performance_csv(performance_csv(t));
    EXPECT_EQ(back.rows, t.rows);
}

TEST(SimilarityReport, CsvAndJsonRoundTrip) {
    const auto r = reference_sims();
    EXPECT_EQ(parse_similarity_csv(similarity_csv(r)), r);
    EXPECT_EQ(similarity_from_json(to_json(r)).records, r.records);
    EXPECT_THROW(parse_similarity_csv("train,test,metric,value\nA,B,Cosine,2\n"), DataError);
    EXPECT_THROW(parse_similarity_csv("train,test,metric,value\nA,B,Bleu,0.2\n"), DataError);
    EXPECT_THROW(parse_similarity_csv("train,test,metric,value\nA,B,Wstn,0.2\nA,B,Wstn,0.3\n"), DataError);
}
