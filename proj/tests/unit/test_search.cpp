#include "advdist/error.hpp"
#include "advdist/gad.hpp"
#include "advdist/reliability.hpp"
#include "advdist/search.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

using namespace advdist;

namespace {

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an advdist::Error");
    return ErrorCode::InvalidArgument;
}

// Discovery rate from scratch over a prefix, in query order.
double sdr_oracle(const std::vector<QueryStep>& steps, std::size_t len) {
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < len; ++k) {
        num += steps[k].is_error ? 1.0 : 0.0;
        den += 1.0 - steps[k].confidence;
    }
    return num / den;
}

std::vector<GadRecord> records_for(const std::vector<double>& gads) {
    std::vector<GadRecord> r;
    for (std::size_t i = 0; i < gads.size(); ++i) r.push_back({i, 0.8, 0.1, 0.0, gads[i], true, false});
    return r;
}

struct RandomPool {
    Dataset features;
    std::vector<Prediction> predictions;
    std::vector<ClassId> truth;
    std::vector<GadRecord> records;
};

// Class-1 predictions whose errors occur with probability 1 - confidence.
RandomPool calibrated_pool(std::size_t n, std::mt19937_64& gen) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    RandomPool p;
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < n; ++i) {
        rows.push_back({u(gen), u(gen)});
        const double c = 0.55 + 0.45 * u(gen);
        const ClassId label = u(gen) < 0.15 ? 0 : 1;
        p.predictions.push_back({label, c});
        p.truth.push_back(u(gen) < c ? label : 1 - label);
        p.records.push_back({i, c, u(gen), 0.0, u(gen) - 0.5, true, false});
    }
    p.features = Dataset::from_rows(rows);
    return p;
}

}  // namespace

TEST_CASE("sdr arithmetic") {
    SUBCASE("ten queries at 0.8 with four errors") {
        std::vector<Prediction> q(10, {1, 0.8});
        std::vector<ClassId> t(10, 1);
        for (int k : {0, 3, 5, 9}) t[static_cast<std::size_t>(k)] = 0;
        const double s = sdr(q, t);
        double den = 0.0;
        for (int i = 0; i < 10; ++i) den += 1.0 - 0.8;
        CHECK(s == 4.0 / den);
        CHECK(std::fabs(s - 2.0) <= 4 * std::numeric_limits<double>::epsilon());
        // Dyadic confidences make the decimal value exact.
        std::vector<Prediction> d(10, {1, 0.75});
        std::vector<ClassId> dt(10, 1);
        for (std::size_t k = 0; k < 5; ++k) dt[k] = 0;
        CHECK(sdr(d, dt) == 2.0);
    }
    SUBCASE("zero errors") {
        std::vector<Prediction> q(5, {1, 0.9});
        std::vector<ClassId> t(5, 1);
        CHECK(sdr(q, t) == 0.0);
    }
    SUBCASE("mixed confidences") {
        const std::vector<Prediction> q{{1, 0.7}, {1, 0.9}, {1, 0.95}};
        const std::vector<ClassId> t{0, 1, 0};
        const double s = sdr(q, t);
        CHECK(s == 2.0 / ((1.0 - 0.7) + (1.0 - 0.9) + (1.0 - 0.95)));
        CHECK(s == doctest::Approx(2.0 / 0.45).epsilon(1e-15));
        CHECK(std::fabs(s - 4.444444444444444) < 1e-14);
    }
    SUBCASE("single wrong label at 0.8") {
        SearchTrace trace(5);
        trace.record(0, 0.8, 1, 0);
        CHECK(trace.current_sdr() == 1.0 / (1.0 - 0.8));
        CHECK(std::fabs(trace.current_sdr() - 5.0) <= 4 * std::numeric_limits<double>::epsilon() * 5.0);
        SearchTrace dyadic(5);
        dyadic.record(0, 0.8125, 1, 0);
        dyadic.record(1, 0.9375, 1, 1);
        CHECK(dyadic.current_sdr() == 4.0);
    }
    SUBCASE("degenerate confidence") {
        std::vector<Prediction> q(3, {1, 1.0});
        std::vector<ClassId> t{1, 0, 1};
        CHECK(code_of([&] { (void)sdr(q, t); }) == ErrorCode::DegenerateConfidence);
        SearchTrace trace(3);
        trace.record(0, 1.0, 1, 0);
        CHECK(std::isnan(trace.current_sdr()));
        CHECK(code_of([&] { (void)sdr(trace.steps()); }) == ErrorCode::DegenerateConfidence);
    }
}

TEST_CASE("search trace invariants") {
    SearchTrace t(3);
    t.record(4, 0.9, 1, 1);
    CHECK(code_of([&] { t.record(4, 0.8, 1, 0); }) == ErrorCode::InvalidArgument);
    t.record(2, 0.7, 1, 0);
    t.record(9, 0.8, 1, 1);
    CHECK(code_of([&] { t.record(5, 0.8, 1, 1); }) == ErrorCode::InvalidArgument);
    CHECK(t.queried() == std::vector<std::size_t>{4, 2, 9});
    CHECK(t.errors() == std::vector<std::size_t>{2});
    CHECK(t.sdr_curve().size() == 3);
    CHECK(t.contains(9));
    CHECK_FALSE(t.contains(3));
}

TEST_CASE("eligibility filter") {
    const std::vector<Prediction> p{{1, 0.65}, {1, 0.650001}, {0, 0.99}, {1, 1.0}, {1, 0.5}};
    PoolView pool{nullptr, p, 1};
    CHECK(eligible_indices(pool) == std::vector<std::size_t>{1, 3});
    const std::vector<std::size_t> rows{3, 0, 3, 2};
    CHECK(eligible_indices(pool, rows) == std::vector<std::size_t>{3});
    pool.class_of_interest = 0;
    CHECK(eligible_indices(pool) == std::vector<std::size_t>{2});
}

TEST_CASE("gad_search ordering") {
    const std::vector<Prediction> p(4, {1, 0.8});
    const PoolView pool{nullptr, p, 1};
    const GroundTruthOracle oracle(std::vector<ClassId>{1, 0, 1, 0});
    const auto recs = records_for({0.5, -0.2, 0.1, -0.7});

    SUBCASE("argmin order") {
        const auto t = gad_search(pool, recs, oracle, 3);
        CHECK(t.queried() == std::vector<std::size_t>{3, 1, 2});
        CHECK(t.errors_found() == 2);
    }
    SUBCASE("exhaustion queries everything once") {
        const auto t = gad_search(pool, recs, oracle, 4);
        const auto q = t.queried();
        CHECK(std::set<std::size_t>(q.begin(), q.end()).size() == 4);
    }
    SUBCASE("budget above the pool") {
        CHECK(code_of([&] { (void)gad_search(pool, recs, oracle, 5); }) == ErrorCode::BudgetExceedsPool);
    }
    SUBCASE("ties break by index, unflipped records go last") {
        auto r = records_for({0.0, -1.0, 0.0, -1.0});
        r[3].gad = INFINITY;
        r[3].flipped = false;
        CHECK(gad_search(pool, r, oracle, 4).queried() == std::vector<std::size_t>{1, 0, 2, 3});
    }
    SUBCASE("ineligible rows are skipped") {
        std::vector<Prediction> q = p;
        q[3] = {1, 0.6};
        q[1] = {0, 0.9};
        const PoolView v{nullptr, q, 1};
        CHECK(gad_search(v, recs, oracle, 2).queried() == std::vector<std::size_t>{2, 0});
    }
}

TEST_CASE("least_confidence_search ordering") {
    const std::vector<Prediction> p{{1, 0.9}, {1, 0.7}, {1, 0.8}};
    const GroundTruthOracle oracle(std::vector<ClassId>{1, 1, 1});
    CHECK(least_confidence_search({nullptr, p, 1}, oracle, 2).queried() == std::vector<std::size_t>{1, 2});
    const std::vector<Prediction> same(4, {1, 0.8});
    CHECK(least_confidence_search({nullptr, same, 1}, GroundTruthOracle({1, 1, 1, 1}), 4).queried() ==
          std::vector<std::size_t>{0, 1, 2, 3});
}

TEST_CASE("search properties on random pools") {
    std::mt19937_64 gen(21);
    for (int rep = 0; rep < 20; ++rep) {
        const auto p = calibrated_pool(300, gen);
        const PoolView pool{&p.features, p.predictions, 1};
        const GroundTruthOracle oracle(p.truth);
        const std::size_t budget = 40;
        const std::vector<SearchTrace> traces{
            gad_search(pool, p.records, oracle, budget), random_search(pool, oracle, budget, 7),
            least_confidence_search(pool, oracle, budget), metamodel_search(pool, oracle, budget, 7)};
        for (const auto& t : traces) {
            REQUIRE(t.size() == budget);
            const auto q = t.queried();
            CHECK(std::set<std::size_t>(q.begin(), q.end()).size() == budget);
            for (std::size_t k = 0; k < t.size(); ++k) {
                const auto& s = t.steps()[k];
                CHECK(is_eligible(p.predictions[s.index], 1));
                CHECK(s.label == p.truth[s.index]);
                CHECK(s.is_error == (s.label != s.predicted));
                CHECK(s.sdr == sdr_oracle(t.steps(), k + 1));
            }
            CHECK(t.current_sdr() == static_cast<double>(t.errors().size()) / [&] {
                double den = 0.0;
                for (const auto& s : t.steps()) den += 1.0 - s.confidence;
                return den;
            }());
        }
        CHECK(random_search(pool, oracle, budget, 7) == traces[1]);
        CHECK(metamodel_search(pool, oracle, budget, 7) == traces[3]);
        CHECK(random_search(pool, oracle, budget, 8) != traces[1]);
    }
}

TEST_CASE("gad_search is invariant to row permutation") {
    std::mt19937_64 gen(5);
    const auto p = calibrated_pool(200, gen);
    const auto base = gad_search({nullptr, p.predictions, 1}, p.records, GroundTruthOracle(p.truth), 30);

    std::vector<std::size_t> perm(200);  // new row i holds old row perm[i]
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), gen);
    std::vector<std::size_t> inverse(200);
    std::vector<Prediction> preds(200);
    std::vector<ClassId> truth(200);
    std::vector<GadRecord> recs(200);
    for (std::size_t i = 0; i < 200; ++i) {
        inverse[perm[i]] = i;
        preds[i] = p.predictions[perm[i]];
        truth[i] = p.truth[perm[i]];
        recs[i] = p.records[perm[i]];
        recs[i].index = i;
    }
    const auto moved = gad_search({nullptr, preds, 1}, recs, GroundTruthOracle(truth), 30);
    for (std::size_t k = 0; k < 30; ++k) {
        CHECK(moved.steps()[k].index == inverse[base.steps()[k].index]);
        CHECK(moved.steps()[k].sdr == base.steps()[k].sdr);
    }
}

TEST_CASE("random_search is equivariant under row permutation") {
    std::mt19937_64 gen(6);
    const auto p = calibrated_pool(150, gen);
    const PoolView pool{nullptr, p.predictions, 1};
    const auto eligible = eligible_indices(pool);
    const auto base = random_search(pool, GroundTruthOracle(p.truth), 25, 99);

    std::vector<std::size_t> perm(150);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), gen);
    std::vector<Prediction> preds(150);
    std::vector<ClassId> truth(150);
    std::vector<std::size_t> inverse(150);
    for (std::size_t i = 0; i < 150; ++i) {
        preds[i] = p.predictions[perm[i]];
        truth[i] = p.truth[perm[i]];
        inverse[perm[i]] = i;
    }
    const PoolView moved_pool{nullptr, preds, 1};
    const auto moved_eligible = eligible_indices(moved_pool);
    const auto moved = random_search(moved_pool, GroundTruthOracle(truth), 25, 99);
    // Same seed draws the same candidate ranks; the rows behind those ranks follow the permutation.
    for (std::size_t k = 0; k < 25; ++k) {
        const auto rank = static_cast<std::size_t>(
            std::lower_bound(eligible.begin(), eligible.end(), base.steps()[k].index) - eligible.begin());
        CHECK(moved.steps()[k].index == moved_eligible[rank]);
    }
    // A permutation that keeps the eligible rows in order maps the trace row for row.
    std::vector<std::size_t> order(150);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_partition(order.begin(), order.end(), [&](std::size_t i) { return !is_eligible(p.predictions[i], 1); });
    std::vector<Prediction> preds2(150);
    std::vector<ClassId> truth2(150);
    std::vector<std::size_t> inv2(150);
    for (std::size_t i = 0; i < 150; ++i) {
        preds2[i] = p.predictions[order[i]];
        truth2[i] = p.truth[order[i]];
        inv2[order[i]] = i;
    }
    const auto moved2 = random_search({nullptr, preds2, 1}, GroundTruthOracle(truth2), 25, 99);
    for (std::size_t k = 0; k < 25; ++k) {
        CHECK(moved2.steps()[k].index == inv2[base.steps()[k].index]);
        CHECK(moved2.steps()[k].label == base.steps()[k].label);
    }
}

TEST_CASE("label-blind searches have SDR near one on a calibrated pool") {
    std::mt19937_64 gen(2024);
    double gad = 0.0, rnd = 0.0, lc = 0.0;
    const int reps = 2000;
    for (int r = 0; r < reps; ++r) {
        const auto p = calibrated_pool(250, gen);
        const PoolView pool{nullptr, p.predictions, 1};
        const GroundTruthOracle oracle(p.truth);
        gad += gad_search(pool, p.records, oracle, 50).current_sdr();
        rnd += random_search(pool, oracle, 50, static_cast<std::uint64_t>(r)).current_sdr();
        lc += least_confidence_search(pool, oracle, 50).current_sdr();
    }
    CHECK(std::fabs(gad / reps - 1.0) <= 0.15);
    CHECK(std::fabs(rnd / reps - 1.0) <= 0.15);
    CHECK(std::fabs(lc / reps - 1.0) <= 0.15);
}

TEST_CASE("metamodel_search") {
    SUBCASE("no errors degenerates to least confidence") {
        std::mt19937_64 gen(3);
        auto p = calibrated_pool(200, gen);
        for (std::size_t i = 0; i < p.truth.size(); ++i) p.truth[i] = p.predictions[i].label;
        const PoolView pool{&p.features, p.predictions, 1};
        const GroundTruthOracle oracle(p.truth);
        const auto n = eligible_indices(pool).size();
        CHECK(metamodel_search(pool, oracle, n, 1).queried() == least_confidence_search(pool, oracle, n).queried());
    }
    SUBCASE("errors concentrated at high f0 are found after the first hit") {
        std::mt19937_64 gen(17);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        std::vector<std::vector<double>> rows;
        std::vector<Prediction> preds;
        std::vector<ClassId> truth;
        for (int i = 0; i < 1000; ++i) {
            rows.push_back({u(gen)});
            preds.push_back({1, 0.66 + 0.33 * u(gen)});
            truth.push_back(rows.back()[0] > 0.9 ? 0 : 1);
        }
        const auto features = Dataset::from_rows(rows);
        const PoolView pool{&features, preds, 1};
        const auto t = metamodel_search(pool, GroundTruthOracle(truth), 50, 4);
        const auto& steps = t.steps();
        const auto first = std::find_if(steps.begin(), steps.end(), [](const QueryStep& s) { return s.is_error; });
        REQUIRE(first != steps.end());
        std::size_t after = 0, inside = 0;
        for (auto it = first + 1; it != steps.end(); ++it) {
            ++after;
            inside += features.at(it->index, 0) > 0.9 ? 1 : 0;
        }
        REQUIRE(after > 0);
        CHECK(static_cast<double>(inside) / static_cast<double>(after) >= 0.8);
    }
}

TEST_CASE("strategies pick by name") {
    CHECK(parse_search_method("least_confidence") == SearchMethod::LeastConfidence);
    CHECK(std::string(search_method_name(SearchMethod::Metamodel)) == "metamodel");
    CHECK(code_of([] { (void)parse_search_method("bandit"); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("trace json lines") {
    SearchTrace t(4);
    t.record(7, 0.8, 1, 0);
    t.record(2, 0.95, 1, 1);
    const auto text = trace_to_jsonl(t);
    CHECK(text.substr(0, text.find('\n')) ==
          R"({"step":1,"index":7,"confidence":0.8,"predicted":1,"label":0,"is_error":true,"sdr":5.000000000000001})");
    CHECK(trace_from_jsonl(text, 4) == t);
    SearchTrace d(1);
    d.record(0, 1.0, 1, 1);
    CHECK(trace_to_jsonl(d).find("\"sdr\":null") != std::string::npos);
    CHECK(code_of([] { (void)trace_from_jsonl(R"({"step":2,"index":1,"confidence":0.8,"predicted":1,"label":1})", 3); }) ==
          ErrorCode::ParseError);
}

TEST_CASE("reliability diagram") {
    SUBCASE("constant 0.9 with half correct") {
        std::vector<Prediction> p(100, {1, 0.9});
        std::vector<ClassId> t(100, 1);
        for (std::size_t i = 0; i < 50; ++i) t[i] = 0;
        const auto d = reliability(p, t);
        CHECK(d.bins.size() == 7);
        CHECK(d.total == 100);
        int occupied = 0;
        for (const auto& b : d.bins) {
            if (b.count == 0) {
                CHECK(std::isnan(b.gap));
                continue;
            }
            ++occupied;
            CHECK(b.observed == 0.5);
            CHECK(b.gap == doctest::Approx(0.4).epsilon(1e-12));
            CHECK(b.lower < 0.9);
            CHECK(b.upper >= 0.9);
        }
        CHECK(occupied == 1);
        CHECK(d.ece() == doctest::Approx(0.4));
    }
    SUBCASE("calibrated predictions have small gaps and ECE matches a flat loop") {
        std::mt19937_64 gen(8);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        std::vector<Prediction> p;
        std::vector<ClassId> t;
        for (int i = 0; i < 200000; ++i) {
            const double c = 0.5 + 0.5 * u(gen);
            const ClassId label = i % 2;
            p.push_back({label, c});
            t.push_back(u(gen) < c ? label : 1 - label);
        }
        const auto d = reliability(p, t);
        std::size_t counted = 0;
        for (const auto& b : d.bins) {
            counted += b.count;
            REQUIRE(b.count > 0);
            const double se = std::sqrt(b.expected * (1.0 - b.expected) / static_cast<double>(b.count));
            CHECK(std::fabs(b.gap) < 3.0 * se);
            CHECK(b.gap == b.expected - b.observed);
        }
        CHECK(counted == d.total);

        const double w = 0.05, lo = 0.65;
        std::vector<double> n(7, 0.0), hit(7, 0.0), conf(7, 0.0);
        double total = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            if (!(p[i].confidence > lo)) continue;
            for (std::size_t k = 0; k < 7; ++k) {
                if (p[i].confidence <= lo + w * static_cast<double>(k + 1) || k == 6) {
                    n[k] += 1;
                    hit[k] += p[i].label == t[i] ? 1 : 0;
                    conf[k] += p[i].confidence;
                    break;
                }
            }
            total += 1;
        }
        double ece = 0.0;
        for (std::size_t k = 0; k < 7; ++k) ece += n[k] / total * std::fabs(conf[k] / n[k] - hit[k] / n[k]);
        CHECK(d.total == static_cast<std::size_t>(total));
        CHECK(d.ece() == doctest::Approx(ece).epsilon(1e-12));

        const auto only = reliability(p, t, 0.05, 0.65, 1);
        CHECK(only.total < d.total);
        CHECK(only.total > 0);
    }
    SUBCASE("contract") {
        const std::vector<Prediction> none;
        const std::vector<ClassId> nt;
        CHECK(code_of([&] { (void)reliability(none, nt); }) == ErrorCode::EmptyInput);
        const std::vector<Prediction> one{{1, 0.9}};
        CHECK(code_of([&] { (void)reliability(one, nt); }) == ErrorCode::DimensionMismatch);
        const auto csv = reliability_to_csv(reliability(one, std::vector<ClassId>{1}));
        CHECK(csv.rfind("lower,upper,count,observed,expected,gap\n", 0) == 0);
    }
}
