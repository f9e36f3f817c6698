#include <doctest.h>

#include <sstream>

#include "oracles.hpp"
#include "pnd/eval.hpp"
#include "pnd/rng.hpp"

using namespace pnd;
using test::Labels;

TEST_CASE("published confusion counts") {
    // 60 pumped coins, 18,144 others; 9 caught with no false alarms.
    Labels y(60 + 18135);
    std::vector<double> s(y.size(), 0.0);
    for (std::size_t i = 0; i < 60; ++i) {
        y[i] = true;
        s[i] = i < 9 ? 0.9 : 0.1;
    }
    auto cm = confusion(y, s, 0.5);
    CHECK(cm == ConfusionMatrix{9, 0, 51, 18135});
    auto m = precision_recall_f1(cm);
    CHECK(*m.precision == 1.0);
    CHECK(m.recall == 0.15);
    CHECK(*m.f1 == doctest::Approx(0.26087).epsilon(1e-5));
}

TEST_CASE("confusion and metric edge cases") {
    Labels y{true, false, true, false};
    std::vector<double> s{0.3, 0.3, 0.2, 0.0};
    CHECK(confusion(y, s, 0.0) == ConfusionMatrix{2, 2, 0, 0});
    CHECK(confusion(y, s, 0.3) == ConfusionMatrix{1, 1, 1, 1});  // score == threshold predicts true
    auto none = precision_recall_f1(confusion(y, s, 0.31));
    CHECK_FALSE(none.precision.has_value());
    CHECK_FALSE(none.f1.has_value());
    CHECK(none.recall == 0.0);

    auto even = precision_recall_f1({3, 3, 3, 10});
    CHECK(*even.precision == 0.5);
    CHECK(even.recall == 0.5);
    CHECK(*even.f1 == 0.5);
    CHECK(*precision_recall_f1({0, 2, 4, 0}).f1 == 0.0);

    std::vector<double> short_scores{0.1};
    CHECK_THROWS_AS(confusion(y, short_scores, 0.5), std::invalid_argument);
}

TEST_CASE("roc_auc equals the pairwise oracle") {
    Rng rng(12);
    for (int trial = 0; trial < 300; ++trial) {
        std::size_t n = 2 + rng.below(11);
        Labels y(n);
        std::vector<double> s(n);
        y[0] = true;
        y[1] = false;
        for (std::size_t i = 2; i < n; ++i) y[i] = rng.uniform() < 0.5;
        for (auto& v : s) v = static_cast<double>(rng.below(5)) / 4;  // plenty of ties
        CHECK(std::abs(roc_auc(y, s) - test::oracle_auc(y, s)) <= 1e-12);
    }
    Labels y{true, true, false, false};
    CHECK(roc_auc(y, std::vector<double>{0.9, 0.8, 0.1, 0.2}) == 1.0);
    CHECK(roc_auc(y, std::vector<double>{0.1, 0.2, 0.9, 0.8}) == 0.0);
    CHECK(roc_auc(y, std::vector<double>{0.5, 0.5, 0.5, 0.5}) == 0.5);
    Labels all{true, true};
    CHECK_THROWS_AS(roc_auc(all, std::vector<double>{0.1, 0.2}), std::invalid_argument);
}

TEST_CASE("threshold sweep matches direct counting") {
    Rng rng(13);
    Labels y(500);
    std::vector<double> s(500);
    for (std::size_t i = 0; i < 500; ++i) {
        y[i] = rng.uniform() < 0.1;
        s[i] = y[i] ? rng.uniform(0.2, 1.0) : rng.uniform(0.0, 0.6);
        if (i % 50 == 0) s[i] = 0.3;  // exactly on a grid point
    }
    auto curve = threshold_sweep(y, s, 0.01);
    REQUIRE(curve.points.size() == 101);
    CHECK(curve.points.front().threshold == 0.0);
    CHECK(curve.points.back().threshold == 1.0);
    double prev_recall = 2;
    for (std::size_t k = 0; k < curve.points.size(); ++k) {
        const auto& p = curve.points[k];
        CHECK(p.threshold == doctest::Approx(k / 100.0).epsilon(1e-15));
        std::uint64_t tp = 0, fp = 0;
        for (std::size_t i = 0; i < 500; ++i)
            if (s[i] >= p.threshold) (y[i] ? tp : fp) += 1;
        CHECK(p.cm.tp == tp);
        CHECK(p.cm.fp == fp);
        CHECK(p.cm.total() == 500);
        CHECK(p.recall <= prev_recall);
        prev_recall = p.recall;
    }
    CHECK(curve.points[30].cm == confusion(y, s, 0.3));
    CHECK(threshold_sweep(y, s, 0.25).points.size() == 5);
    CHECK_THROWS_AS(threshold_sweep(y, s, 0.0), std::invalid_argument);
}

TEST_CASE("threshold report layout") {
    Labels y{true, false};
    std::vector<double> s{0.6, 0.2};
    std::ostringstream out;
    write_threshold_report(out, threshold_sweep(y, s, 0.5), roc_auc(y, s));
    CHECK(out.str() ==
          "threshold,precision,recall,f1\n"
          "0,0.5,1,0.6666666666666666\n"
          "0.5,1,1,1\n"
          "1,,0,\n"
          "auc,1\n");
}

TEST_CASE("pearson_correlation") {
    std::vector<double> x{1, 2, 3, 4, 5};
    std::vector<double> up{3, 5, 7, 9, 11}, down{10, 8, 6, 4, 2};
    CHECK(pearson_correlation(x, up) == doctest::Approx(1.0));
    CHECK(pearson_correlation(x, down) == doctest::Approx(-1.0));

    Rng rng(14);
    std::vector<double> a(40), b(40);
    for (std::size_t i = 0; i < 40; ++i) {
        a[i] = rng.normal();
        b[i] = a[i] * 0.5 + rng.normal();
    }
    // n*sum(ab) - sum(a)sum(b) over the root of the variance products.
    double sa = 0, sb = 0, sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < 40; ++i) {
        sa += a[i];
        sb += b[i];
        sab += a[i] * b[i];
        saa += a[i] * a[i];
        sbb += b[i] * b[i];
    }
    double r = (40 * sab - sa * sb) / std::sqrt((40 * saa - sa * sa) * (40 * sbb - sb * sb));
    CHECK(pearson_correlation(a, b) == doctest::Approx(r).epsilon(1e-12));

    std::vector<double> flat{2, 2, 2, 2, 2};
    CHECK_THROWS_AS(pearson_correlation(x, flat), std::invalid_argument);
    CHECK_THROWS_AS(pearson_correlation(std::vector<double>{1}, std::vector<double>{1}), std::invalid_argument);
}
