#include "adkit/ensemble.hpp"
#include "adkit/errors.hpp"
#include "adkit/eval.hpp"
#include "adkit/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

using namespace adkit;
namespace ens = adkit::ens;

namespace {

ens::MemberScores member(std::string id, std::vector<double> val_normal,
                         std::vector<double> raw) {
    ens::MemberScores m;
    m.id = std::move(id);
    m.stats = ens::fit_normalization(val_normal);
    m.raw = std::move(raw);
    m.normalized = ens::normalize(m.raw, m.stats);
    return m;
}

} // namespace

TEST_CASE("normalization stats capture the validation-normal extremes") {
    const auto stats = ens::fit_normalization(std::vector<double>{2.0, 4.0, 6.0});
    CHECK(stats.min_n == 2.0);
    CHECK(stats.max_n == 6.0);
    CHECK(stats.source_count == 3);

    CHECK_THROWS_AS(ens::fit_normalization(std::vector<double>{5.0, 5.0, 5.0}),
                    DegenerateRangeError);
    CHECK_THROWS_AS(ens::fit_normalization(std::vector<double>{3.0}), ValidationError);
    CHECK_THROWS_AS(ens::fit_normalization(std::vector<double>{}), ValidationError);
    CHECK_THROWS_AS(
        ens::fit_normalization(std::vector<double>{1.0, std::numeric_limits<double>::infinity()}),
        ValidationError);
    CHECK_THROWS_AS(
        ens::fit_normalization(std::vector<double>{1.0, std::numeric_limits<double>::quiet_NaN()}),
        ValidationError);
}

TEST_CASE("normalization maps the reference range to the unit interval") {
    const auto stats = ens::fit_normalization(std::vector<double>{2.0, 4.0, 6.0});
    const auto out = ens::normalize(std::vector<double>{2.0, 6.0, 7.0, 4.0, 0.0}, stats);
    CHECK(out[0] == 0.0);  // the minimum maps to exactly 0
    CHECK(out[1] == 1.0);  // the maximum maps to exactly 1
    CHECK(out[2] == 1.25); // beyond the range stays beyond, unclipped
    CHECK(out[3] == 0.5);
    CHECK(out[4] == -0.5); // below the range goes negative, unclipped
}

TEST_CASE("averaging is the unweighted mean of normalized member scores") {
    // One member is the identity on its own normalized scores.
    const auto solo = ens::average_ensemble({member("a", {0.0, 1.0}, {0.3, 0.9})});
    CHECK(solo.combined == solo.members[0].normalized);

    // Two members: exact mean of 0.25 and 0.75 is 0.5.
    const auto pair = ens::average_ensemble({member("a", {0.0, 1.0}, {0.25}),
                                             member("b", {0.0, 1.0}, {0.75})});
    CHECK(pair.combined == std::vector<double>{0.5});

    // Three members at 0, 0.5, 1 average to exactly 0.5.
    const auto trio = ens::average_ensemble({member("a", {0.0, 1.0}, {0.0}),
                                             member("b", {0.0, 1.0}, {0.5}),
                                             member("c", {0.0, 1.0}, {1.0})});
    CHECK(trio.combined == std::vector<double>{0.5});

    const auto mixed = ens::average_ensemble({member("a", {0.0, 1.0}, {0.2}),
                                              member("b", {0.0, 1.0}, {0.8})});
    CHECK(mixed.combined[0] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("combining rejects mismatched or non-finite members by name") {
    CHECK_THROWS_AS(ens::average_ensemble({}), ValidationError);

    auto a = member("alpha", {0.0, 1.0}, {0.1, 0.2});
    auto b = member("beta", {0.0, 1.0}, {0.3});
    bool thrown = false;
    try {
        ens::average_ensemble({a, b});
    } catch (const ValidationError& e) {
        thrown = true;
        CHECK(std::string(e.what()).find("beta") != std::string::npos);
    }
    CHECK(thrown);

    auto c = member("gamma", {0.0, 1.0}, {0.1, 0.2});
    c.normalized[1] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(ens::average_ensemble({a, c}), ValidationError);
}

TEST_CASE("normalized scores are invariant to affine member rescaling") {
    Rng rng(600);
    std::vector<double> val(20), test(30);
    for (auto& v : val) v = rng.uniform(0.0, 5.0);
    for (auto& v : test) v = rng.uniform(-1.0, 8.0);

    const double scale = 3.7, shift = -2.2;
    auto val2 = val, test2 = test;
    for (auto& v : val2) v = scale * v + shift;
    for (auto& v : test2) v = scale * v + shift;

    const auto n1 = ens::normalize(test, ens::fit_normalization(val));
    const auto n2 = ens::normalize(test2, ens::fit_normalization(val2));
    for (std::size_t i = 0; i < test.size(); ++i)
        CHECK(n2[i] == doctest::Approx(n1[i]).epsilon(1e-9));

    // Order (and therefore any rank statistic) is preserved exactly.
    std::vector<std::size_t> o1(test.size()), o2(test.size());
    for (std::size_t i = 0; i < test.size(); ++i) o1[i] = o2[i] = i;
    std::sort(o1.begin(), o1.end(), [&](auto x, auto y) { return n1[x] < n1[y]; });
    std::sort(o2.begin(), o2.end(), [&](auto x, auto y) { return n2[x] < n2[y]; });
    CHECK(o1 == o2);
}

TEST_CASE("ensemble AUC is invariant to affine rescaling of any member") {
    Rng rng(601);
    const std::size_t n_normal = 15, n_abnormal = 12;
    std::vector<std::vector<double>> val(2), test_n(2), test_a(2);
    for (int m = 0; m < 2; ++m) {
        val[m].resize(20);
        test_n[m].resize(n_normal);
        test_a[m].resize(n_abnormal);
        for (auto& v : val[m]) v = rng.uniform(0.0, 1.0);
        for (auto& v : test_n[m]) v = rng.uniform(0.0, 1.2);
        for (auto& v : test_a[m]) v = rng.uniform(0.3, 1.6);
    }

    auto build = [&](double scale1, double shift1) {
        std::vector<ens::MemberScores> members;
        for (int m = 0; m < 2; ++m) {
            const double s = m == 1 ? scale1 : 1.0;
            const double b = m == 1 ? shift1 : 0.0;
            auto v = val[m];
            std::vector<double> t;
            t.insert(t.end(), test_n[m].begin(), test_n[m].end());
            t.insert(t.end(), test_a[m].begin(), test_a[m].end());
            for (auto& x : v) x = s * x + b;
            for (auto& x : t) x = s * x + b;
            members.push_back(member(m == 0 ? "a" : "b", v, t));
        }
        return ens::average_ensemble(std::move(members));
    };

    const auto plain = build(1.0, 0.0);
    const auto scaled = build(11.0, 4.5);
    auto auc_of = [&](const ens::EnsembleScores& e) {
        const std::vector<double> nrm(e.combined.begin(), e.combined.begin() + n_normal);
        const std::vector<double> abn(e.combined.begin() + n_normal, e.combined.end());
        return eval::roc_auc(nrm, abn).auc;
    };
    CHECK(auc_of(scaled) == doctest::Approx(auc_of(plain)).epsilon(1e-9));
    for (std::size_t i = 0; i < plain.combined.size(); ++i)
        CHECK(scaled.combined[i] == doctest::Approx(plain.combined[i]).epsilon(1e-9));
}

TEST_CASE("member order does not matter beyond rounding") {
    Rng rng(602);
    std::vector<ens::MemberScores> members;
    for (int m = 0; m < 3; ++m) {
        std::vector<double> v(10), t(25);
        for (auto& x : v) x = rng.uniform(0.0, 1.0 + m);
        for (auto& x : t) x = rng.uniform(0.0, 1.5 + m);
        members.push_back(member("m" + std::to_string(m), v, t));
    }
    const auto forward = ens::average_ensemble(members);
    std::reverse(members.begin(), members.end());
    const auto reversed = ens::average_ensemble(members);
    for (std::size_t i = 0; i < forward.combined.size(); ++i)
        CHECK(reversed.combined[i] ==
              doctest::Approx(forward.combined[i]).epsilon(1e-12));
}

TEST_CASE("the combined score stays within the members' normalized envelope") {
    Rng rng(603);
    std::vector<ens::MemberScores> members;
    for (int m = 0; m < 4; ++m) {
        std::vector<double> v(12), t(40);
        for (auto& x : v) x = rng.uniform(0.0, 2.0);
        for (auto& x : t) x = rng.uniform(-0.5, 3.0);
        members.push_back(member("m" + std::to_string(m), v, t));
    }
    const auto out = ens::average_ensemble(members);
    for (std::size_t i = 0; i < out.combined.size(); ++i) {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (const auto& m : out.members) {
            lo = std::min(lo, m.normalized[i]);
            hi = std::max(hi, m.normalized[i]);
        }
        CHECK(out.combined[i] >= lo - 1e-12);
        CHECK(out.combined[i] <= hi + 1e-12);
    }
}
