#include "advdist/dataset.hpp"
#include "advdist/error.hpp"
#include "advdist/rng.hpp"
#include "advdist/textio.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <set>

using namespace advdist;

namespace {

Dataset random_dataset(std::size_t rows, std::size_t cols, std::uint64_t seed, bool labels = true) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    std::vector<std::vector<double>> data(rows, std::vector<double>(cols));
    std::vector<ClassId> y(rows);
    for (std::size_t i = 0; i < rows; ++i) {
        for (auto& v : data[i]) v = u(gen);
        y[i] = static_cast<ClassId>(gen() % 2);
    }
    if (!labels) return Dataset::from_rows(data);
    return Dataset::from_rows(data, y, 2);
}

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an advdist::Error");
    return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("load_csv parses features and maps labels") {
    const auto d = parse_csv("f0,f1,label\n0.1,0.2,a\n0.3,0.4,b\n", std::string("label"));
    CHECK(d.rows() == 2);
    CHECK(d.cols() == 2);
    CHECK(d.labels() == std::vector<ClassId>{0, 1});
    CHECK(d.class_names() == std::vector<std::string>{"a", "b"});
    CHECK(d.at(1, 0) == 0.3);
    CHECK(d.feature_names() == std::vector<std::string>{"f0", "f1"});
}

TEST_CASE("load_csv without a label column keeps every column as a feature") {
    const auto d = parse_csv("f0,f1,label\n0.1,0.2,1\n0.3,0.4,0\n");
    CHECK_FALSE(d.has_labels());
    CHECK(d.cols() == 3);
    CHECK(d.at(0, 2) == 1.0);
}

TEST_CASE("load_csv reports the offending row and column") {
    try {
        (void)parse_csv("f0,f1,label\n0.1,x,a\n", std::string("label"));
        FAIL("no exception");
    } catch (const ParseError& e) {
        CHECK(e.row() == 1);
        CHECK(e.column() == "f1");
        CHECK(e.code() == ErrorCode::ParseError);
    }
}

TEST_CASE("load_csv contract errors") {
    CHECK(code_of([] { (void)parse_csv("a,b\n1,2\n3\n"); }) == ErrorCode::RaggedRow);
    CHECK(code_of([] { (void)load_csv("/nonexistent/advdist.csv"); }) == ErrorCode::MissingFile);
    CHECK(code_of([] { (void)parse_csv("a,b\n1,nan\n"); }) == ErrorCode::ParseError);
    CHECK(code_of([] { (void)parse_csv("a,b\n1,2\n", std::string("zzz")); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("integer label tokens sort numerically so separate files agree") {
    const auto a = parse_csv("x,y\n1,10\n2,2\n", std::string("y"));
    const auto b = parse_csv("x,y\n1,2\n2,10\n", std::string("y"));
    CHECK(a.class_names() == std::vector<std::string>{"2", "10"});
    CHECK(a.class_names() == b.class_names());
    CHECK(a.labels() == std::vector<ClassId>{1, 0});
}

TEST_CASE("csv round trip is bit exact") {
    SUBCASE("decimal inputs with at most 15 significant digits") {
        std::mt19937_64 gen(7);
        std::string text = "a,b,c,label\n";
        std::vector<double> expect;
        for (int i = 0; i < 200; ++i) {
            for (int j = 0; j < 3; ++j) {
                const long long mant = static_cast<long long>(gen() % 1000000000000000ULL);
                const int exp = static_cast<int>(gen() % 20) - 10;
                const std::string tok = std::to_string(mant) + "e" + std::to_string(exp);
                text += tok + ",";
                expect.push_back(std::stod(tok));
            }
            text += (i % 3 == 0 ? "x\n" : "y\n");
        }
        const auto d = parse_csv(text, std::string("label"));
        const auto back = parse_csv(to_csv(d), std::string("label"));
        REQUIRE(back.rows() == d.rows());
        for (std::size_t k = 0; k < expect.size(); ++k) {
            CHECK(back.data()[k] == expect[k]);
        }
        CHECK(back.labels() == d.labels());
        CHECK(back.class_names() == d.class_names());
    }
    SUBCASE("arbitrary doubles via a file") {
        testing::TempDir dir("csv");
        const auto d = random_dataset(50, 4, 3);
        save_csv(d, dir / "d.csv");
        const auto back = load_csv(dir / "d.csv", std::string("label"));
        CHECK(std::equal(d.data().begin(), d.data().end(), back.data().begin(), back.data().end()));
        CHECK(back.labels() == d.labels());
    }
}

TEST_CASE("feature_ranges") {
    SUBCASE("singleton") {
        const auto r = feature_ranges(Dataset::from_rows({{1.0, -2.0}}));
        CHECK(r == FeatureRanges{{1.0, 1.0}, {-2.0, -2.0}});
    }
    SUBCASE("min and max") {
        const auto r = feature_ranges(Dataset::from_rows({{0.0}, {5.0}, {-3.0}}));
        CHECK(r[0] == Range{-3.0, 5.0});
    }
    SUBCASE("matches a linear scan") {
        const auto d = random_dataset(1000, 6, 11, false);
        const auto r = feature_ranges(d);
        for (std::size_t j = 0; j < d.cols(); ++j) {
            double lo = std::numeric_limits<double>::infinity();
            double hi = -lo;
            for (std::size_t i = 0; i < d.rows(); ++i) {
                lo = d.at(i, j) < lo ? d.at(i, j) : lo;
                hi = d.at(i, j) > hi ? d.at(i, j) : hi;
            }
            CHECK(r[j].min == lo);
            CHECK(r[j].max == hi);
        }
    }
    SUBCASE("empty") {
        CHECK(code_of([] { (void)feature_ranges(Dataset{}); }) == ErrorCode::EmptyDataset);
    }
}

TEST_CASE("bias_split") {
    const auto d = random_dataset(400, 2, 5);
    const auto pred = parse_predicate("label==1 && f0>0", d.feature_names());
    auto matches = [&](const Dataset& s) {
        std::size_t n = 0;
        for (std::size_t i = 0; i < s.rows(); ++i) n += pred(s.row(i), s.label(i)) ? 1 : 0;
        return n;
    };

    SUBCASE("full exclusion") {
        const auto split = bias_split(d, pred, 0.0, 9);
        CHECK(matches(split.train) == 0);
        CHECK(split.train.rows() + split.test.rows() + split.dropped == d.rows());
    }
    SUBCASE("identity fraction keeps every training row") {
        const auto split = bias_split(d, pred, 1.0, 9);
        CHECK(split.dropped == 0);
        CHECK(split.train.rows() + split.test.rows() == d.rows());
        CHECK(split.test.rows() == 200);
        // Test split does not depend on the fraction.
        CHECK(split.test.fingerprint() == bias_split(d, pred, 0.0, 9).test.fingerprint());
    }
    SUBCASE("exact retained count over 100 matching rows") {
        std::vector<std::vector<double>> rows;
        std::vector<ClassId> y;
        for (int i = 0; i < 150; ++i) {
            rows.push_back({i < 100 ? 1.0 : -1.0, static_cast<double>(i)});
            y.push_back(1);
        }
        const auto m = Dataset::from_rows(rows, y, 2);
        const auto p = parse_predicate("label==1 && f0>0", m.feature_names());
        std::size_t oracle = 0;
        for (std::size_t i = 0; i < m.rows(); ++i) oracle += p(m.row(i), m.label(i)) ? 1 : 0;
        REQUIRE(oracle == 100);
        const auto a = bias_split(m, p, 0.2, 4, 0.0);
        const auto b = bias_split(m, p, 0.2, 4, 0.0);
        std::size_t kept = 0;
        for (std::size_t i = 0; i < a.train.rows(); ++i) kept += p(a.train.row(i), a.train.label(i)) ? 1 : 0;
        CHECK(kept == 20);
        CHECK(a.dropped == 80);
        CHECK(a.train.fingerprint() == b.train.fingerprint());
    }
    SUBCASE("count is preserved for every fraction") {
        for (double f : {0.0, 0.1, 0.33, 0.5, 0.9, 1.0}) {
            const auto split = bias_split(d, pred, f, 21, 0.3);
            CHECK(split.train.rows() + split.test.rows() + split.dropped == d.rows());
        }
    }
    SUBCASE("needs labels") {
        const auto u = d.without_labels();
        CHECK(code_of([&] { (void)bias_split(u, pred, 0.5, 1); }) == ErrorCode::NoLabels);
    }
}

TEST_CASE("predicate grammar") {
    const std::vector<std::string> names{"alpha", "beta"};
    const double x[] = {0.5, -1.0};
    CHECK(parse_predicate("alpha>0.4 && beta<=-1", names)(x, 0));
    CHECK_FALSE(parse_predicate("f1 != -1", names)(x, 0));
    CHECK(parse_predicate("label == 2", names)(x, 2));
    CHECK(code_of([&] { (void)parse_predicate("gamma>0", names); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([&] { (void)parse_predicate("alpha>>0", names); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("subset_sample") {
    const auto d = random_dataset(30, 3, 8);
    SUBCASE("full sample is a permutation") {
        const auto s = subset_sample(d, d.rows(), 3);
        std::multiset<std::vector<double>> a, b;
        for (std::size_t i = 0; i < d.rows(); ++i) {
            a.insert({d.row(i).begin(), d.row(i).end()});
            b.insert({s.row(i).begin(), s.row(i).end()});
        }
        CHECK(a == b);
    }
    SUBCASE("deterministic and distinct") {
        CHECK(sample_indices(30, 12, 5) == sample_indices(30, 12, 5));
        const auto idx = sample_indices(30, 12, 5);
        CHECK(std::set<std::size_t>(idx.begin(), idx.end()).size() == 12);
        CHECK(sample_indices(30, 12, 5) != sample_indices(30, 12, 6));
    }
    SUBCASE("too large") {
        CHECK(code_of([&] { (void)subset_sample(d, 31, 1); }) == ErrorCode::SubsetTooLarge);
    }
    SUBCASE("uniform frequencies over 10^4 single draws") {
        std::map<std::size_t, int> freq;
        for (std::uint64_t s = 0; s < 10000; ++s) ++freq[sample_indices(4, 1, s).front()];
        REQUIRE(freq.size() == 4);
        for (auto [row, n] : freq) {
            CHECK(std::abs(n / 10000.0 - 0.25) / 0.25 < 0.05);
        }
    }
    SUBCASE("ranges of a subset stay inside the parent's ranges") {
        const auto full = feature_ranges(d);
        for (std::uint64_t s = 0; s < 20; ++s) {
            const auto sub = feature_ranges(subset_sample(d, 1 + s % d.rows(), s));
            for (std::size_t j = 0; j < d.cols(); ++j) {
                CHECK(sub[j].min >= full[j].min);
                CHECK(sub[j].max <= full[j].max);
            }
        }
    }
}

TEST_CASE("dataset invariants are enforced") {
    CHECK(code_of([] { (void)Dataset::from_rows({{1.0, std::nan("")}}); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] {
              (void)Dataset(2, 1, {1.0, 2.0}, std::vector<ClassId>{0, 3}, {"x"}, {"a", "b"});
          }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { (void)Dataset::from_rows({{1.0}, {2.0}}, std::vector<ClassId>{0, -1}); }) ==
          ErrorCode::InvalidArgument);
    CHECK(code_of([] { (void)Dataset::from_rows({{1.0}, {2.0}}, std::vector<ClassId>{0}, 2); }) ==
          ErrorCode::InvalidArgument);
}

TEST_CASE("stream seeds and rng") {
    CHECK(stream_seed(1, {2, 3}) == stream_seed(1, {2, 3}));
    CHECK(stream_seed(1, {2, 3}) != stream_seed(1, {3, 2}));
    CHECK(stream_seed(1, {2}) != stream_seed(2, {2}));
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
    Rng r(3);
    for (int i = 0; i < 1000; ++i) {
        const double u = r.uniform();
        CHECK((u >= 0.0 && u < 1.0));
        CHECK(r.index(7) < 7);
    }
}

TEST_CASE("textio doubles round trip") {
    std::mt19937_64 gen(1);
    for (int i = 0; i < 1000; ++i) {
        const double v = std::bit_cast<double>(gen());
        if (!std::isfinite(v)) continue;
        CHECK(textio::parse_double(textio::format_double(v)) == v);
    }
    CHECK(textio::format_double(std::numeric_limits<double>::infinity()) == "inf");
    CHECK(std::isinf(*textio::parse_double("inf")));
    CHECK_FALSE(textio::parse_double("1.0x").has_value());
    CHECK(textio::lines("a\r\nb\n") == std::vector<std::string>{"a", "b"});
}
