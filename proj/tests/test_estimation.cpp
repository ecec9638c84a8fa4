#include <doctest.h>

#include <cmath>

#include "ctbn/estimation.hpp"
#include "ctbn/random.hpp"
#include "ctbn/sampler.hpp"
#include "oracles.hpp"

using namespace ctbn;

namespace {

// One-context three-state family with hand-set statistics.
FamilyStats stats_3(double t0, double t1, double t2) {
    FamilyStats s(0, {}, 1, 3);
    s.dwell_time = {t0, t1, t2};
    return s;
}

FamilyStats random_stats(Rng& rng, std::int64_t contexts, int k) {
    FamilyStats s(0, {}, contexts, k);
    for (auto& t : s.dwell_time) t = rng.exponential(0.5);
    for (std::int64_t u = 0; u < contexts; ++u)
        for (int x = 0; x < k; ++x)
            for (int xp = 0; xp < k; ++xp)
                if (xp != x)
                    s.jump_counts[size_t((u * k + x) * k + xp)] = rng.uniform_int(6);
    return s;
}

}  // namespace

TEST_SUITE("estimation") {

TEST_CASE("mle rate is M over T") {
    FamilyStats s(0, {}, 1, 2);
    s.dwell_time = {2.0, 1.0};
    s.jump_counts[size_t(0 * 2 + 1)] = 4;  // M[x0,x1] = 4
    s.jump_counts[size_t((0 + 1) * 2 + 0)] = 3;
    MleResult r = mle(s);
    CHECK(r.cim.exit_rate(0, 0) == doctest::Approx(2.0));
    CHECK_FALSE(r.any_degenerate());
}

TEST_CASE("binary jump row is forced to one") {
    FamilyStats s(0, {}, 1, 2);
    s.dwell_time = {1.0, 1.0};
    s.jump_counts[size_t(0 * 2 + 1)] = 7;
    s.jump_counts[size_t(1 * 2 + 0)] = 2;
    MleResult r = mle(s);
    CHECK(r.cim.jump_prob(0, 0, 1) == doctest::Approx(1.0));
}

TEST_CASE("zero dwell time flags the rate as undefined and emits 0") {
    FamilyStats s = stats_3(0.0, 1.0, 2.0);
    MleResult r = mle(s);
    CHECK(r.cim.exit_rate(0, 0) == 0.0);
    CHECK(r.rate_undefined[0] == 1);
    CHECK(r.jump_undefined[0] == 1);  // no departures observed either
    // the fallback jump row is uniform
    CHECK(r.cim.jump_prob(0, 0, 1) == doctest::Approx(0.5));
    CHECK(r.cim.jump_prob(0, 0, 2) == doctest::Approx(0.5));
}

TEST_CASE("posterior update is additive in counts and times") {
    FamilyStats s(0, {}, 1, 2);
    s.dwell_time = {2.5, 0.0};
    s.jump_counts[size_t(0 * 2 + 1)] = 3;
    FamilyPrior prior = make_family_prior(PriorPattern{1.0, 1.0}, s);
    FamilyPosterior post = posterior(prior, s);
    CHECK(post.alpha_exit(0, 0) == doctest::Approx(4.0));
    CHECK(post.tau_at(0, 0) == doctest::Approx(3.5));
}

TEST_CASE("posterior of zero statistics equals the prior") {
    FamilyStats s(0, {}, 2, 3);
    FamilyPrior prior = make_family_prior(PriorPattern{2.0, 0.5}, s);
    FamilyPosterior post = posterior(prior, s);
    CHECK(post.tau == prior.tau);
    CHECK(post.alpha_jump == prior.alpha_jump);
}

TEST_CASE("posterior mean of the rate matches quadrature: (alpha + M + 1) / (tau + T)") {
    Rng rng(3);
    for (int trial = 0; trial < 5; ++trial) {
        double alpha = 0.5 + rng.uniform01() * 2.0;
        double tau = 0.5 + rng.uniform01();
        double m = static_cast<double>(rng.uniform_int(6));
        double t = rng.uniform01() * 4.0;
        double closed_form = (alpha + m + 1.0) / (tau + t);
        double quad = oracle::rate_posterior_mean_quadrature(alpha, tau, m, t);
        CHECK(quad == doctest::Approx(closed_form).epsilon(1e-6));
    }
}

TEST_CASE("expected_params approaches the MLE as the prior vanishes") {
    Rng rng(9);
    FamilyStats s = random_stats(rng, 2, 3);
    MleResult ml = mle(s);
    Cim bayes = expected_params(PriorPattern{1e-12, 1e-12}, s);
    for (std::int64_t u = 0; u < s.n_contexts; ++u)
        for (int x = 0; x < s.n_states; ++x) {
            if (s.dwell(u, x) <= 0.0 || s.m_total(u, x) == 0) continue;  // degenerate cells differ
            CHECK(bayes.exit_rate(u, x) ==
                  doctest::Approx(ml.cim.exit_rate(u, x)).epsilon(1e-6));
            for (int xp = 0; xp < s.n_states; ++xp)
                if (xp != x && s.jumps(u, x, xp) > 0)
                    CHECK(bayes.jump_prob(u, x, xp) ==
                          doctest::Approx(ml.cim.jump_prob(u, x, xp)).epsilon(1e-6));
        }
}

TEST_CASE("prior-only expected rate is alpha over tau") {
    FamilyStats s(0, {}, 1, 3);  // zero statistics
    FamilyPrior prior = make_family_prior(PriorPattern{2.0, 1.0}, s);
    Cim c = expected_params(prior, s);
    CHECK(c.exit_rate(0, 0) == doctest::Approx(2.0));
}

TEST_CASE("expected_params jump rows sum to one and pass Cim validation rules") {
    Rng rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        int k = 2 + static_cast<int>(rng.uniform_int(3));
        FamilyStats s = random_stats(rng, 3, k);
        Cim c = expected_params(PriorPattern{0.7, 1.3}, s);
        for (std::int64_t u = 0; u < s.n_contexts; ++u)
            for (int x = 0; x < k; ++x) {
                CHECK(c.exit_rate(u, x) > 0.0);
                double row = 0.0;
                for (int xp = 0; xp < k; ++xp) {
                    if (xp == x)
                        CHECK(c.jump_prob(u, x, xp) == 0.0);
                    else
                        row += c.jump_prob(u, x, xp);
                }
                CHECK(std::abs(row - 1.0) <= 1e-12);
            }
    }
}

TEST_CASE("sequential updating equals batch updating") {
    // Exactly representable statistics make the identity hold bitwise.
    FamilyStats s1(0, {}, 1, 2), s2(0, {}, 1, 2);
    s1.dwell_time = {0.5, 1.25};
    s1.jump_counts = {0, 3, 2, 0};
    s2.dwell_time = {2.0, 0.75};
    s2.jump_counts = {0, 1, 5, 0};

    FamilyPrior prior = make_family_prior(PriorPattern{1.0, 1.0}, s1);
    FamilyPosterior sequential = posterior(posterior(prior, s1), s2);
    FamilyPosterior batch = posterior(prior, s1 + s2);
    CHECK(sequential.tau == batch.tau);
    CHECK(sequential.alpha_jump == batch.alpha_jump);

    // On arbitrary float statistics the identity holds to rounding.
    Rng rng(31);
    FamilyStats r1 = random_stats(rng, 2, 3), r2 = random_stats(rng, 2, 3);
    FamilyPrior p2 = make_family_prior(PriorPattern{1.0, 1.0}, r1);
    FamilyPosterior seq = posterior(posterior(p2, r1), r2);
    FamilyPosterior bat = posterior(p2, r1 + r2);
    for (size_t i = 0; i < seq.tau.size(); ++i)
        CHECK(seq.tau[i] == doctest::Approx(bat.tau[i]).epsilon(1e-15));
}

TEST_CASE("expected rate converges to the generating rate") {
    // Single binary process at a known rate; 1e4 transitions pin the
    // Bayesian point estimate within 5%.
    Universe u({{"X", {"x0", "x1"}}});
    CtbnModel m;
    m.universe = u;
    m.graph = empty_graph(u);
    Cim cim(1, 2);
    double q_star = 1.3;
    cim.exit_rate(0, 0) = q_star;
    cim.exit_rate(0, 1) = q_star;
    fill_uniform_jump_row(cim, 0, 0);
    fill_uniform_jump_row(cim, 0, 1);
    m.cims.push_back(cim);
    m.initial.push_back({0.5, 0.5});

    Trajectory t = sample_trajectory(m, 12000.0, 2026);
    REQUIRE(t.events.size() >= 10000);
    t.events.resize(10000);
    t.end_time = t.events.back().time;
    Dataset d{u, {t}};
    Cim fitted = expected_params(PriorPattern{}, family_stats(d, 0, {}));
    CHECK(std::abs(fitted.exit_rate(0, 0) - q_star) / q_star <= 0.05);
    CHECK(std::abs(fitted.exit_rate(0, 1) - q_star) / q_star <= 0.05);
}

TEST_CASE("posterior rejects a shape mismatch") {
    FamilyStats s(0, {}, 2, 2);
    FamilyPrior prior = make_family_prior(PriorPattern{}, 1, 2);
    CHECK_THROWS_AS(posterior(prior, s), std::invalid_argument);
}

}  // TEST_SUITE
