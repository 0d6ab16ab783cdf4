#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <cstring>
#include <random>

#include "polling/approximator.hpp"
#include "polling/error.hpp"
#include "polling/experiments.hpp"
#include "polling/parallel.hpp"
#include "support.hpp"

using namespace polling;
using polling::oracle::rel_close;

namespace {

SystemSpec single_queue(Discipline d, double rho) {
    SystemSpec s;
    s.discipline = d;
    s.rho = rho;
    QueueSpec q;
    q.mean_service = 1.0;
    q.scv_service = 1.0;
    q.mean_interarrival_at_saturation = 1.0;
    q.scv_interarrival = 1.0;
    q.mean_switchover = 1.0;
    q.scv_switchover = 0.0;
    s.queues = {q};
    return s;
}

// Same rational system as tests/oracles/constants_oracle.py.
SystemSpec oracle_system(Discipline d) {
    SystemSpec s;
    s.discipline = d;
    s.rho = 0.5;
    auto q = [](double b, double cb, double a, double ca, double sw, double cs) {
        QueueSpec x;
        x.mean_service = b;
        x.scv_service = cb;
        x.mean_interarrival_at_saturation = a;
        x.scv_interarrival = ca;
        x.mean_switchover = sw;
        x.scv_switchover = cs;
        return x;
    };
    s.queues = {q(0.5, 2.0, 2.5, 2.0, 1.0, 0.5), q(1.0, 0.5, 10.0 / 3.0, 0.5, 0.25, 0.0),
                q(2.0, 1.0, 4.0, 1.0, 1.5, 2.0)};
    return s;
}

// {K0, K1, K2, omega, E[W] at rho = 1/2} from the exact-rational oracle.
constexpr std::array<std::array<double, 5>, 3> kOracleExhaustive{{
    {2.2840909090909092, -0.34090909090909088, 0.89875366568914961, 2.8419354838709676, 4.6766495601173022},
    {2.2840909090909092, -0.46661931818181818, 0.66922195747800584, 2.4866935483870969, 4.4361734787390033},
    {2.2840909090909092, 0.19659090909090909, -0.70447214076246334, 1.7762096774193548, 4.4125366568914952},
}};
constexpr std::array<std::array<double, 5>, 3> kOracleGated{{
    {2.2840909090909092, 0.20909090909090908, 0.33073122529644267, 2.8239130434782607, 4.9426383399209488},
    {2.2840909090909092, 0.35838068181818183, 0.41676753952569168, 3.0592391304347828, 5.1349462697628461},
    {2.2840909090909092, 1.571590909090909, -0.3257905138339921, 3.5298913043478262, 5.9768774703557312},
}};

void expect_oracle(Discipline d, const std::array<std::array<double, 5>, 3>& expected) {
    const auto spec = oracle_system(d);
    const auto dm = derive_moments(spec);
    const auto w = mean_wait_interpolation(spec);
    for (std::size_t i = 0; i < 3; ++i) {
        const auto c = constants_for(dm, i);
        EXPECT_NEAR(c.k0, expected[i][0], 1e-12) << i;
        EXPECT_NEAR(c.k1, expected[i][1], 1e-12) << i;
        EXPECT_NEAR(c.k2, expected[i][2], 1e-12) << i;
        EXPECT_NEAR(ht_numerator(dm, i), expected[i][3], 1e-12) << i;
        EXPECT_NEAR(w.mean_wait[i], expected[i][4], 1e-12) << i;
    }
}

}  // namespace

TEST(Constants, MatchExactOracleExhaustive) { expect_oracle(Discipline::Exhaustive, kOracleExhaustive); }
TEST(Constants, MatchExactOracleGated) { expect_oracle(Discipline::Gated, kOracleGated); }

TEST(Constants, SingleQueueExhaustiveByHand) {
    // Poisson, exp(1) service, deterministic S = 1: K0 = 1/2, K1 = 1/2, omega = 1, K2 = 0.
    const auto dm = derive_moments(single_queue(Discipline::Exhaustive, 0.4));
    const auto c = constants_exhaustive(dm, 0);
    EXPECT_NEAR(c.k0, 0.5, 1e-15);
    EXPECT_NEAR(c.k1, 0.5, 1e-15);
    EXPECT_NEAR(c.k2, 0.0, 1e-15);
    EXPECT_NEAR(ht_numerator(dm, 0), 1.0, 1e-15);
    const auto w = mean_wait_interpolation(single_queue(Discipline::Exhaustive, 0.4));
    EXPECT_NEAR(w.mean_wait[0], (0.5 + 0.5 * 0.4) / 0.6, 1e-14);
}

TEST(Constants, SingleQueueGatedByHand) {
    const auto dm = derive_moments(single_queue(Discipline::Gated, 0.4));
    const auto c = constants_gated(dm, 0);
    EXPECT_NEAR(c.k0, 0.5, 1e-15);
    EXPECT_NEAR(c.k1, 1.5, 1e-15);
    EXPECT_NEAR(c.k2, 0.0, 1e-15);
    EXPECT_NEAR(ht_numerator(dm, 0), 2.0, 1e-15);
}

TEST(Constants, DisciplineSpecificEntryPointsIgnoreSpecDiscipline) {
    const auto exh = derive_moments(oracle_system(Discipline::Exhaustive));
    const auto gat = derive_moments(oracle_system(Discipline::Gated));
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(constants_gated(exh, i).k1, constants_gated(gat, i).k1);
        EXPECT_EQ(constants_exhaustive(gat, i).k2, constants_exhaustive(exh, i).k2);
    }
    EXPECT_THROW(constants_for(exh, 3), Error);
}

TEST(Constants, DoubleSumMatchesNaiveOracle) {
    std::mt19937_64 rng(31);
    for (int t = 0; t < 200; ++t) {
        const auto spec = oracle::random_spec(rng, {});
        const auto dm = derive_moments(spec);
        const std::size_t n = spec.size();
        for (std::size_t i = 0; i < n; ++i) {
            double naive = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                for (std::size_t k = 0; k <= j; ++k) {
                    const auto& qk = spec.queue(i + k);
                    const auto& qj = spec.queue(i + j);
                    naive += qk.load_share() * qj.scv_switchover * qj.mean_switchover * qj.mean_switchover;
                }
            }
            naive /= dm.es_total;
            EXPECT_TRUE(rel_close(switchover_variance_term(dm, i), naive, 1e-12)) << t << ' ' << i;
        }
    }
}

TEST(Interpolation, ValueAtZeroIsResidualSwitchover) {
    std::mt19937_64 rng(41);
    for (Discipline d : {Discipline::Exhaustive, Discipline::Gated}) {
        for (int t = 0; t < 100; ++t) {
            auto spec = oracle::random_spec(rng, {1, 6, false, d});
            spec.rho = 0.0;
            const auto dm = derive_moments(spec);
            const auto w = mean_wait_interpolation(spec);
            for (double x : w.mean_wait) EXPECT_TRUE(rel_close(x, dm.es_res, 1e-12));
        }
    }
}

TEST(Interpolation, SlopeAtZeroMatchesLightTrafficExpansion) {
    std::mt19937_64 rng(42);
    for (Discipline d : {Discipline::Exhaustive, Discipline::Gated}) {
        for (int t = 0; t < 200; ++t) {
            const auto spec = oracle::random_spec(rng, {1, 6, false, d});
            const auto dm = derive_moments(spec);
            for (std::size_t i = 0; i < spec.size(); ++i) {
                const auto c = constants_for(dm, i);
                const double oracle = oracle::lt_slope_oracle(spec, i);
                EXPECT_TRUE(rel_close(c.k0 + c.k1, oracle, 1e-9)) << t << ' ' << i << ' ' << c.k0 + c.k1 << ' ' << oracle;
            }
        }
    }
}

TEST(Interpolation, HeavyTrafficScaledDelayIsOmega) {
    std::mt19937_64 rng(43);
    for (Discipline d : {Discipline::Exhaustive, Discipline::Gated}) {
        for (int t = 0; t < 100; ++t) {
            auto spec = oracle::random_spec(rng, {2, 6, false, d});
            spec.rho = 1.0 - 1e-8;
            const auto dm = derive_moments(spec);
            const auto w = mean_wait_interpolation(spec);
            for (std::size_t i = 0; i < spec.size(); ++i) {
                EXPECT_TRUE(rel_close((1.0 - spec.rho) * w.mean_wait[i], ht_numerator(dm, i), 1e-6));
            }
        }
    }
}

TEST(Interpolation, SymmetricPoissonHasNoQuadraticTerm) {
    for (Discipline d : {Discipline::Exhaustive, Discipline::Gated}) {
        for (int n : {1, 2, 3, 5, 8}) {
            const auto dm = derive_moments(oracle::symmetric_spec(n, d, 0.5, 0.7, 2.0, 0.3));
            for (int i = 0; i < n; ++i) EXPECT_NEAR(constants_for(dm, i).k2, 0.0, 1e-12) << n;
        }
    }
}

TEST(Interpolation, SymmetricPoissonEqualsClosedForm) {
    for (Discipline d : {Discipline::Exhaustive, Discipline::Gated}) {
        for (int n : {1, 2, 3, 5}) {
            for (double rho : {0.0, 0.1, 0.5, 0.9, 0.99}) {
                const auto spec = oracle::symmetric_spec(n, d, rho, 1.3, 0.5, 0.8);
                const auto w = mean_wait_interpolation(spec);
                const double expected = oracle::symmetric_closed_form(spec);
                for (double x : w.mean_wait) EXPECT_TRUE(rel_close(x, expected, 1e-10)) << n << ' ' << rho;
            }
        }
    }
}

TEST(Interpolation, VacationModel) {
    // M/G/1 with multiple vacations: rho/(1-rho) E[B^res] + E[S^res] (+ rho E[S]/(1-rho) when gated).
    for (double rho : {0.1, 0.3, 0.7, 0.95}) {
        SystemSpec s = single_queue(Discipline::Exhaustive, rho);
        s.queues[0].mean_service = 0.8;
        s.queues[0].scv_service = 0.4;
        s.queues[0].mean_interarrival_at_saturation = 0.8;
        s.queues[0].scv_switchover = 1.5;
        s.queues[0].mean_switchover = 2.0;
        const double eb_res = 1.4 * 0.8 / 2.0;
        const double es_res = (1.5 * 4.0 + 4.0) / 4.0;
        EXPECT_NEAR(mean_wait_interpolation(s).mean_wait[0], rho / (1 - rho) * eb_res + es_res, 1e-12);
        s.discipline = Discipline::Gated;
        EXPECT_NEAR(mean_wait_interpolation(s).mean_wait[0], rho / (1 - rho) * (eb_res + 2.0) + es_res, 1e-12);
    }
}

TEST(Interpolation, LargeSwitchoverLimit) {
    const auto base = oracle_system(Discipline::Exhaustive);
    for (Discipline d : {Discipline::Exhaustive, Discipline::Gated}) {
        for (double rho : {0.3, 0.9}) {
            SystemSpec s = base;
            s.discipline = d;
            s.rho = rho;
            double es = 0.0;
            for (auto& q : s.queues) {
                q.mean_switchover *= 1e6;
                q.scv_switchover = 0.0;
                es += q.mean_switchover;
            }
            const auto w = mean_wait_interpolation(s);
            const double sign = d == Discipline::Exhaustive ? -1.0 : 1.0;
            for (std::size_t i = 0; i < 3; ++i) {
                const double limit = (1.0 + sign * rho * s.queues[i].load_share()) / (2.0 * (1.0 - rho));
                EXPECT_TRUE(rel_close(w.mean_wait[i] / es, limit, 1e-3));
            }
        }
    }
}

TEST(Interpolation, QueueLengthByLittle) {
    const auto spec = oracle_system(Discipline::Exhaustive);
    const auto w = mean_wait_interpolation(spec);
    for (std::size_t i = 0; i < 3; ++i) {
        const auto& q = spec.queues[i];
        EXPECT_NEAR(w.mean_queue_length[i], (w.mean_wait[i] + q.mean_service) * spec.rho / q.mean_interarrival_at_saturation,
                    1e-14);
    }
}

TEST(Interpolation, NegativeWaitIsReportedNotClamped) {
    // Low interarrival SCV with a zero density term drives K1 below zero; a tiny
    // residual switch-over then lets the numerator go negative at moderate load.
    SystemSpec s;
    s.rho = 0.3;
    QueueSpec a;
    a.mean_service = 10.0;
    a.scv_service = 0.0;
    a.mean_interarrival_at_saturation = 10.0 / 0.95;
    a.scv_interarrival = 0.0;
    a.mean_switchover = 1e-3;
    a.scv_switchover = 0.0;
    QueueSpec b = a;
    b.mean_service = 0.01;
    b.mean_interarrival_at_saturation = 0.01 / 0.05;
    s.queues = {a, b};
    const auto w = mean_wait_lt_only(s);
    bool any_negative = false;
    for (double x : w.mean_wait) any_negative = any_negative || x < 0.0;
    EXPECT_EQ(w.has_negative_wait(), any_negative);
    WaitingTimeResult forced;
    forced.mean_wait = {1.0, -0.5};
    EXPECT_TRUE(forced.has_negative_wait());
}

TEST(LtOnly, DiffersFromInterpolationByKnownTerms) {
    std::mt19937_64 rng(44);
    for (int t = 0; t < 100; ++t) {
        const auto spec = oracle::random_spec(rng, {});
        const auto lt = mean_wait_lt_only(spec);
        const auto in = mean_wait_interpolation(spec);
        const double r = spec.rho;
        for (std::size_t i = 0; i < spec.size(); ++i) {
            const auto& c = in.constants[i];
            const double expected = in.mean_wait[i] - (c.k0 * r + c.k2 * r * r) / (1.0 - r);
            EXPECT_NEAR(lt.mean_wait[i], expected, 1e-9 * std::max(1.0, std::abs(expected)));
        }
    }
}

TEST(LtOnly, AgreesWithInterpolationAtZeroLoad) {
    auto spec = oracle_system(Discipline::Gated);
    spec.rho = 0.0;
    EXPECT_EQ(mean_wait_lt_only(spec).mean_wait, mean_wait_interpolation(spec).mean_wait);
}

TEST(HtOnly, IsOmegaOverOneMinusRho) {
    const auto spec = oracle_system(Discipline::Exhaustive);
    const auto w = mean_wait_ht_only(spec);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(w.mean_wait[i], kOracleExhaustive[i][3] / 0.5, 1e-12);
}

TEST(HtOnly, SingleExhaustiveQueueLimit) {
    // A vacation queue has omega = E[B^res]; the general weight would be 0/0.
    const auto dm = derive_moments(single_queue(Discipline::Exhaustive, 0.5));
    EXPECT_NEAR(ht_numerator(dm, 0), 1.0, 1e-15);
}

TEST(LargeS, Formula) {
    const auto spec = oracle_system(Discipline::Gated);
    const auto w = mean_wait_large_s(spec);
    EXPECT_NEAR(w.mean_wait[1], 2.75 * (1.0 + 0.15) / (2.0 * 0.5), 1e-12);
}

TEST(Pcl, PoissonResidualVanishes) {
    std::mt19937_64 rng(45);
    for (Discipline d : {Discipline::Exhaustive, Discipline::Gated}) {
        for (int t = 0; t < 100; ++t) {
            const auto base = oracle::random_spec(rng, {1, 6, true, d});
            for (double rho : {0.1, 0.3, 0.5, 0.7, 0.9, 0.99}) {
                const auto spec = scale_to_load(base, rho);
                EXPECT_LE(std::abs(pcl_residual(spec)), 1e-9 * pcl_rhs(spec)) << t << ' ' << rho;
            }
        }
    }
}

TEST(Pcl, NonPoissonResidualIsGenerallyNonzero) {
    EXPECT_GT(std::abs(pcl_residual(showcase_system(0.7))), 1e-3);
}

TEST(PclBased, SatisfiesConservationLawExactly) {
    std::mt19937_64 rng(46);
    for (int t = 0; t < 50; ++t) {
        const auto spec = oracle::random_spec(rng, {});
        const auto w = mean_wait_pcl_based(spec);
        double lhs = 0.0;
        for (std::size_t i = 0; i < spec.size(); ++i) lhs += spec.rho * spec.queues[i].load_share() * w.mean_wait[i];
        EXPECT_TRUE(rel_close(lhs, pcl_rhs(spec), 1e-12));
    }
}

TEST(PclBased, ZeroLoadGivesResidualSwitchover) {
    auto spec = oracle_system(Discipline::Exhaustive);
    spec.rho = 0.0;
    for (double x : mean_wait_pcl_based(spec).mean_wait) EXPECT_DOUBLE_EQ(x, derive_moments(spec).es_res);
}

TEST(Exactness, Classification) {
    EXPECT_EQ(classify_exactness(oracle::symmetric_spec(3, Discipline::Exhaustive, 0.5, 1.0, 1.0, 0.2)),
              ExactnessClass::SymmetricPoisson);
    EXPECT_EQ(classify_exactness(oracle::symmetric_spec(4, Discipline::Gated, 0.5, 1.0, 1.0, 0.2)),
              ExactnessClass::SymmetricPoisson);
    EXPECT_EQ(classify_exactness(oracle_system(Discipline::Exhaustive)), ExactnessClass::None);

    // Two queues, I = 5, C_S^2 = C_B^2 = 1, E[S]/E[B] = 5: rho = 2.6 - 2.5 = 0.1.
    SystemSpec two;
    two.rho = 0.1;
    QueueSpec a;
    a.mean_service = 1.0;
    a.scv_service = 1.0;
    a.mean_interarrival_at_saturation = 1.2;
    a.scv_interarrival = 1.0;
    a.mean_switchover = 5.0;
    a.scv_switchover = 1.0;
    QueueSpec b = a;
    b.mean_interarrival_at_saturation = 6.0;
    two.queues = {a, b};
    EXPECT_EQ(classify_exactness(two), ExactnessClass::TwoQueueConstraint);
    two.rho = 0.3;
    EXPECT_EQ(classify_exactness(two), ExactnessClass::None);
    two.rho = 0.1;
    two.discipline = Discipline::Gated;
    EXPECT_EQ(classify_exactness(two), ExactnessClass::None);
}

TEST(Exactness, NonPoissonNeverExact) {
    auto spec = oracle::symmetric_spec(3, Discipline::Exhaustive, 0.5, 1.0, 1.0, 0.2);
    for (auto& q : spec.queues) q.scv_interarrival = 2.0;
    EXPECT_EQ(classify_exactness(spec), ExactnessClass::None);
}

TEST(Methods, NamesRoundTrip) {
    for (Method m : kAllMethods) EXPECT_EQ(parse_method(to_string(m)), m);
    EXPECT_EQ(parse_method("ht"), Method::HTOnly);
    EXPECT_FALSE(parse_method("bogus").has_value());
}

TEST(Methods, DispatchMatchesDirectCalls) {
    const auto spec = oracle_system(Discipline::Exhaustive);
    EXPECT_EQ(mean_wait(spec, Method::HTOnly).mean_wait, mean_wait_ht_only(spec).mean_wait);
    EXPECT_EQ(mean_wait(spec, Method::PCLBased).mean_wait, mean_wait_pcl_based(spec).mean_wait);
}

TEST(EvaluateGrid, ParallelMatchesSerialBitwise) {
    const auto spec = showcase_system(0.5);
    std::vector<double> rhos;
    for (int k = 0; k < 99; ++k) rhos.push_back(0.01 * k);
    const std::vector<Method> methods(std::begin(kAllMethods), std::end(kAllMethods));
    set_thread_count(4);
    const auto par = evaluate_grid(spec, rhos, methods);
    set_thread_count(0);
    const auto ser = evaluate_grid_serial(spec, rhos, methods);
    ASSERT_EQ(par.size(), rhos.size() * methods.size() * 3);
    ASSERT_EQ(par.size(), ser.size());
    for (std::size_t k = 0; k < par.size(); ++k) {
        EXPECT_EQ(par[k].rho, ser[k].rho);
        EXPECT_EQ(par[k].queue, ser[k].queue);
        EXPECT_EQ(par[k].method, ser[k].method);
        EXPECT_EQ(std::memcmp(&par[k].mean_wait, &ser[k].mean_wait, sizeof(double)), 0);
    }
}

TEST(EvaluateGrid, RowOrderAndValues) {
    const auto spec = showcase_system(0.5);
    const std::vector<double> rhos{0.2, 0.7};
    const std::vector<Method> methods{Method::Interpolation, Method::HTOnly};
    const auto g = evaluate_grid(spec, rhos, methods);
    ASSERT_EQ(g.size(), 12u);
    EXPECT_EQ(g[0].rho, 0.2);
    EXPECT_EQ(g[3].method, Method::HTOnly);
    EXPECT_EQ(g[7].queue, 1u);
    EXPECT_EQ(g[6].mean_wait, mean_wait_interpolation(showcase_system(0.7)).mean_wait[0]);
}
