#include "avlab/unit_interval.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace avlab;

namespace {

Nats w(std::initializer_list<unsigned long> xs) {
    Nats v;
    for (auto x : xs) v.push_back(Nat(x));
    return v;
}

OrderFn sqrt_log() { return OrderFn::mul(parse_order_fn("sqrt id"), parse_order_fn("log2 id")); }

bool overlap(const DyadInterval& a, const DyadInterval& b) { return !(a.hi() < b.lo() || b.hi() < a.lo()); }

}  // namespace

TEST(LogPoly, ExactArithmetic) {
    auto l12 = LogPoly::log2_of(12);
    ASSERT_TRUE(l12);
    EXPECT_EQ(*l12, LogPoly(2) + *LogPoly::log2_of(3));
    EXPECT_EQ(*LogPoly::log2_of(make_rat(1, 8)), LogPoly(-3));
    LogPoly l3 = *LogPoly::log2_of(3);
    EXPECT_EQ(l3 * l3 - l3 * l3, LogPoly(0));
    EXPECT_EQ((l3 + 1).sign(), 1);
    EXPECT_EQ((l3 - 2).sign(), -1);  // log2 3 < 2
    EXPECT_TRUE(l3.eval(40).width_le(40));
    EXPECT_THROW(LogPoly::log2_of(0), domain_error);
}

// s(n) = n, j = sqrt(n) log2 n, eps = 1/10: h(n) = 2^{2n+1} and the identities
// hold as exact forms.
TEST(GMAlgebra, WorkedExampleIdentities) {
    GMAlgebra A = gm_algebra(sqrt_log(), OrderFn::identity(), make_rat(1, 10), 60);
    ASSERT_EQ(A.rows.size(), 61u);
    EXPECT_EQ(A.rows[0].logK.sym, LogPoly(0));
    EXPECT_EQ(A.rows[0].logL.sym, LogPoly(0));
    for (auto& r : A.rows) {
        ASSERT_TRUE(r.exact) << r.n;
        ASSERT_TRUE(r.hkl_identity) << r.n;
        ASSERT_TRUE(r.criterion_identity) << r.n;
        ASSERT_EQ(r.h, pow2(2 * r.n + 1));
        ASSERT_EQ(r.logH.sym, LogPoly(Rat(Nat(static_cast<unsigned long>(r.n * r.n)))));
    }
    EXPECT_EQ(A.below_one, std::vector<std::size_t>{1});
    BoundFamily h = A.h_family();
    EXPECT_EQ(h.at(3), 128);
}

// log2 l(n) within [2(1-eps) log2(n+1), 2(1-eps)(log2(n+1) + log2 e)].
TEST(GMAlgebra, EllBracket) {
    Rat eps = make_rat(1, 10);
    GMAlgebra A = gm_algebra(sqrt_log(), OrderFn::identity(), eps, 60);
    const long wp = 60;
    DyadInterval c = DyadInterval::of(2 * (1 - eps), wp);
    DyadInterval log2e = iv_reciprocal(ln2_interval(wp), wp);
    for (std::size_t n = 1; n <= 60; ++n) {
        DyadInterval lg = iv_log2(DyadInterval(Dyadic(Nat(static_cast<unsigned long>(n + 1)))), wp);
        DyadInterval lo = c * lg, hi = c * (lg + log2e);
        DyadInterval l = A.rows[n].logl.sym->eval(wp);
        ASSERT_LE(lo.hi(), l.lo()) << n;
        ASSERT_LE(l.hi(), hi.lo()) << n;
    }
}

TEST(GMAlgebra, StarLogMatchesClosedFormAndTurnsNegative) {
    Rat eps = make_rat(1, 10);
    OrderFn j = sqrt_log(), s = OrderFn::identity();
    GMAlgebra A = gm_algebra(j, s, eps, 100);
    LevelLog lv = LevelLog::from_s(s);
    for (std::size_t n = 2; n <= 100; ++n) {
        Nat nn(static_cast<unsigned long>(n));
        Rat coef = (1 - eps) - make_rat(n - 1, n) * make_rat(n - 1, n);
        DyadInterval closed = DyadInterval::of(coef, 60) * j.eval_raw(nn * nn, 60);
        ASSERT_TRUE(overlap(closed, A.rows[n].star_log.iv)) << n;
        ASSERT_TRUE(overlap(closed, star_log_ratio(gm_g(j, s, eps), gm_f(j), lv, n, 60).iv)) << n;
        ASSERT_EQ(A.rows[n].star_log.iv.hi() < Dyadic(0), n >= 20) << n;
    }
    ASSERT_TRUE(A.star_threshold);
    EXPECT_EQ(*A.star_threshold, 20u);
}

TEST(GMAlgebra, RejectsBadParameters) {
    EXPECT_THROW(gm_algebra(sqrt_log(), OrderFn::identity(), 0, 5), precondition_error);
    EXPECT_THROW(gm_algebra(sqrt_log(), OrderFn::identity(), 1, 5), precondition_error);
    // s = 3/2 makes log2 h(0) = 3/2
    EXPECT_THROW(gm_algebra(sqrt_log(), OrderFn::constant(make_rat(3, 2)), make_rat(1, 10), 5), condition_error);
}

// f = g, s = 1, h = 2: the log ratio is 1 - f(n)/n.
TEST(StarCondition, EqualFunctionsOnBinary) {
    OrderFn f = OrderFn::sub(OrderFn::identity(), parse_order_fn("floor log2 affine 1 1 id"));
    StarReport r = star_condition(f, f, OrderFn::constant(1), 64);
    for (std::size_t n = 1; n <= 64; ++n) {
        Nat nn(static_cast<unsigned long>(n));
        Rat fn = *f.exact_at(nn);
        Rat want = 1 - fn / Rat(nn);
        ASSERT_TRUE(overlap(r.log_ratio[n - 1], DyadInterval::of(want, 60))) << n;
    }
    EXPECT_LE(r.sup.hi(), Dyadic(2));
    StarReport shorter = star_condition(f, f, OrderFn::constant(1), 10);
    EXPECT_LE(shorter.sup.lo(), r.sup.hi());
    EXPECT_GE(r.sup.hi(), shorter.sup.lo());
}

TEST(Budget, ConstantAndSaturatedTablesPass) {
    BudgetParams P;
    P.h = {4, 4, 4};
    P.k = [](std::size_t, long) { return DyadInterval(Dyadic(2)); };
    P.L = [](std::size_t, long) { return DyadInterval(Dyadic(1)); };
    std::map<Nats, Rat> ones{{{}, 1}};
    for (unsigned long a = 0; a < 4; ++a) ones[w({a})] = 1;
    EXPECT_TRUE(supermartingale_budget_check(ones, P).pass);
    std::map<Nats, Rat> two_heavy{{{}, 1}, {w({0}), 2}, {w({1}), 2}};
    EXPECT_TRUE(supermartingale_budget_check(two_heavy, P).pass);
    std::map<Nats, Rat> three_heavy{{{}, 1}, {w({0}), make_rat(4, 3)}, {w({1}), make_rat(4, 3)}, {w({2}), make_rat(4, 3)}};
    BudgetReport r = supermartingale_budget_check(three_heavy, P);
    EXPECT_FALSE(r.pass);
    EXPECT_EQ(r.sigma, Nats{});
    EXPECT_EQ(r.heavy, 3u);
    std::map<Nats, Rat> greedy{{{}, 1}, {w({0}), 3}, {w({1}), 2}};
    EXPECT_THROW(supermartingale_budget_check(greedy, P), precondition_error);
}

// With the parameters of the worked example, every supermartingale that starts
// at or below L(0) respects the heavy-children budget at the root.
TEST(Budget, WorkedExampleParameters) {
    GMAlgebra A = gm_algebra(sqrt_log(), OrderFn::identity(), make_rat(1, 10), 3);
    BudgetParams P = BudgetParams::from(A);
    std::mt19937_64 rng(4);
    Nat H0 = P.h[0];
    for (int t = 0; t < 200; ++t) {
        std::map<Nats, Rat> d{{{}, 1}};
        Rat left = Rat(H0);
        for (unsigned long a = 0; a < H0 && sgn(left) > 0; ++a) {
            Rat v = std::min(left, make_rat(rng() % 9, 4));
            d[w({a})] = v;
            left -= v;
        }
        ASSERT_TRUE(supermartingale_budget_check(d, P).pass);
    }
}

TEST(PiH, Examples) {
    BoundFamily two = BoundFamily::constant(2);
    EXPECT_EQ(pi_h_interval(w({1}), two), (RatInterval{make_rat(1, 2), 1}));
    BoundFamily three = BoundFamily::table({3}, [](std::size_t) { return Nat(2); });
    EXPECT_EQ(pi_h_interval(w({2}), three), (RatInterval{make_rat(2, 3), 1}));
    EXPECT_EQ(pi_h_interval({}, three), (RatInterval{0, 1}));
    EXPECT_THROW(pi_h_interval(w({3}), three), domain_error);
}

// Lengths are mu_h exactly and children tile their parent, to depth 4.
TEST(PiH, ChildrenPartitionParents) {
    std::mt19937_64 rng(6);
    for (int t = 0; t < 20; ++t) {
        std::vector<Nat> tab;
        for (int i = 0; i < 4; ++i) tab.push_back(Nat(2 + rng() % 3));
        BoundFamily h = BoundFamily::table(tab, [](std::size_t) { return Nat(2); });
        std::vector<Nats> level{{}};
        for (std::size_t d = 0; d < 4; ++d) {
            std::vector<Nats> next;
            for (auto& s : level) {
                RatInterval I = pi_h_interval(s, h);
                Rat mu = 1;
                for (std::size_t i = 0; i < s.size(); ++i) mu /= Rat(h.at(i));
                ASSERT_EQ(I.length(), mu);
                Rat at = I.lo;
                for (Nat a = 0; a < h.at(d); ++a) {
                    Nats c = s;
                    c.push_back(a);
                    RatInterval J = pi_h_interval(c, h);
                    ASSERT_EQ(J.lo, at);
                    at = J.hi;
                    next.push_back(c);
                }
                ASSERT_EQ(at, I.hi);
            }
            level = std::move(next);
        }
    }
}

TEST(Bin, ExpansionsAndInverse) {
    EXPECT_EQ(bin(make_rat(1, 2), 3), "100");
    EXPECT_EQ(bin(1, 3), "111");
    EXPECT_EQ(bin(make_rat(1, 3), 6), "010101");
    EXPECT_EQ(unbin("011"), make_rat(3, 8));
    for (unsigned long v = 0; v < 256; ++v) {
        Rat x = make_rat(v, 256);
        ASSERT_EQ(unbin(bin(x, 8)), x);
    }
    EXPECT_THROW(bin(2, 3), domain_error);
}

TEST(IntervalToCylinders, Examples) {
    EXPECT_EQ(interval_to_cylinders({0, 1}), (std::pair<Bits, Bits>{"", ""}));
    EXPECT_EQ(interval_to_cylinders({make_rat(1, 4), make_rat(1, 2)}), (std::pair<Bits, Bits>{"01", "10"}));
    EXPECT_THROW(interval_to_cylinders({0, make_rat(1, 3)}), domain_error);
}

// I within the union of the two cylinder images, for random intervals of
// dyadic length.
TEST(IntervalToCylinders, ContainmentOnRandomIntervals) {
    std::mt19937_64 rng(12);
    for (int t = 0; t < 1000; ++t) {
        std::size_t n = rng() % 12;
        Rat len = make_rat(1, pow2(n));
        Rat lo = make_rat(Nat(static_cast<unsigned long>(rng() % 100000)), 100000) * (1 - len);
        RatInterval I{lo, lo + len};
        auto [s, u] = interval_to_cylinders(I);
        ASSERT_EQ(s.size(), n);
        ASSERT_EQ(u.size(), n);
        Rat a = unbin(s), b = unbin(u);
        Rat lo_cover = std::min(a, b), hi_cover = std::max(a, b) + len;
        ASSERT_TRUE(b == a || b == a + len);
        ASSERT_LE(lo_cover, I.lo);
        ASSERT_LE(I.hi, hi_cover);
    }
}

TEST(Pullback, ThirdsOnBinary) {
    OrderFn f = OrderFn::sub(OrderFn::identity(), parse_order_fn("floor log2 affine 1 1 id"));
    PullbackResult r = interval_pullback({make_rat(1, 3), make_rat(2, 3)}, BoundFamily::constant(2), f, f, 8);
    EXPECT_EQ(r.n, 2u);
    EXPECT_EQ(r.k, 1);
    EXPECT_EQ(r.words, (std::vector<Nats>{w({0, 1}), w({1, 0})}));
    EXPECT_TRUE(r.holds);
    PullbackResult cell = interval_pullback({make_rat(1, 4), make_rat(1, 2)}, BoundFamily::constant(2), f, f, 8);
    EXPECT_EQ(cell.words, (std::vector<Nats>{w({0, 1, 0}), w({0, 1, 1})}));
}

TEST(Pullback, AtMostKPlusTwoCells) {
    std::mt19937_64 rng(14);
    OrderFn f = OrderFn::sub(OrderFn::identity(), parse_order_fn("floor log2 affine 1 1 id"));
    BoundFamily h = BoundFamily::table({3, 2, 5}, [](std::size_t) { return Nat(3); });
    for (int t = 0; t < 1000; ++t) {
        Rat a = make_rat(Nat(static_cast<unsigned long>(rng() % 9999)), 10000);
        Rat b = a + make_rat(Nat(static_cast<unsigned long>(1 + rng() % 9999)), 10000) * (1 - a);
        PullbackResult r = interval_pullback({a, b}, h, f, f, 4, 16);
        ASSERT_LE(Nat(static_cast<unsigned long>(r.words.size())), r.k + 2);
        Nat H = h.level_size(r.n);
        ASSERT_LT(Rat(1) / Rat(H), b - a);
        ASSERT_GE(Rat(1) / Rat(h.level_size(r.n - 1)), b - a);
    }
}
