#include "avlab/order_fn.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace avlab;

namespace {

OrderFn P(const std::string& s) { return parse_order_fn(s); }

// floor(log2 n) for n >= 1 by shifting.
unsigned long ilog2(unsigned long n) {
    unsigned long r = 0;
    while (n >>= 1) ++r;
    return r;
}

}  // namespace

TEST(Eval, PointValues) {
    EXPECT_EQ(eval_at(OrderFn::identity(), 7, 20), DyadInterval(7));
    EXPECT_EQ(eval_at(P("logpow k=1 a=2"), 4, 20), DyadInterval(16));
    // n - sqrt(n) log2 n vanishes at 16
    OrderFn f = OrderFn::sub(OrderFn::identity(), OrderFn::mul(P("sqrt id"), P("log2 id")));
    EXPECT_EQ(eval_at(f, 16, 20), DyadInterval(0));
    EXPECT_THROW(eval_at(P("log2 id"), 0, 10), domain_error);
}

TEST(Eval, WidthAndContainmentAgainstIntegerOracle) {
    // sqrt(n): the bracket straddles the integer square root; log2: floor log2.
    for (unsigned long n = 1; n < 3000; ++n) {
        DyadInterval s = eval_at(P("sqrt id"), n, 30);
        ASSERT_TRUE(s.width_le(30));
        Nat r;
        mpz_sqrt(r.get_mpz_t(), Nat(n).get_mpz_t());
        ASSERT_LE(Dyadic(r), s.hi());
        ASSERT_LT(s.lo(), Dyadic(r + 1));
        DyadInterval l = eval_at(P("log2 id"), n, 30);
        ASSERT_LE(Dyadic(Nat(ilog2(n))), l.hi());
        ASSERT_LT(l.lo(), Dyadic(Nat(ilog2(n) + 1)));
    }
}

TEST(Eval, FloorOfPowersOfTwo) {
    for (unsigned long n = 0; n < 200; ++n) ASSERT_EQ(floor_at(P("exp2 id"), n), pow2(n));
    EXPECT_EQ(floor_at(P("sqrt id"), 99), 9);
    EXPECT_EQ(floor_at(P("sqrt id"), 100), 10);
}

TEST(Inverse, Examples) {
    EXPECT_EQ(generalized_inverse(OrderFn::identity(), 5), 5);
    EXPECT_EQ(generalized_inverse(OrderFn::affine(make_rat(1, 2), 0, OrderFn::identity()), 3), 6);
    EXPECT_EQ(generalized_inverse(P("sqrt id"), 3), 9);
}

TEST(Inverse, HalfSlopeIsCeiling) {
    OrderFn f = OrderFn::affine(make_rat(1, 2), 0, OrderFn::identity());
    for (unsigned long n = 0; n < 500; ++n) ASSERT_EQ(generalized_inverse(f, n), 2 * n);
    OrderFn g = OrderFn::affine(make_rat(2, 3), 0, OrderFn::identity());
    for (unsigned long n = 0; n < 500; ++n) ASSERT_EQ(generalized_inverse(g, n), rat_ceil(make_rat(3 * n, 2)));
}

// p^-(n) > m iff p(m) < n, over random nondecreasing tables.
TEST(Inverse, GaloisConnectionOnTables) {
    std::mt19937_64 rng(3);
    for (int t = 0; t < 200; ++t) {
        std::vector<Rat> vals;
        Rat v = 0;
        for (int i = 0; i < 12; ++i) {
            v += make_rat(Nat(static_cast<unsigned long>(rng() % 5)), 2);
            vals.push_back(v);
        }
        OrderFn p = OrderFn::table(vals, OrderFn::affine(1, v + 1, OrderFn::identity()));
        for (unsigned long n = 0; n < 10; ++n) {
            Nat inv = generalized_inverse(p, n);
            for (unsigned long m = 0; m < 14; ++m) {
                bool lhs = inv > m;
                bool rhs = compare_at(p, m, Rat(n)) < 0;
                ASSERT_EQ(lhs, rhs) << "n=" << n << " m=" << m;
            }
        }
    }
}

TEST(Inverse, AdjunctionOnSymbolicFunctions) {
    for (auto e : {"sqrt id", "logpow k=1 a=2", "mul id log2 affine 1 2 id", "affine 3/2 1 id", "exp2 id"}) {
        OrderFn f = P(e);
        for (unsigned long x = 0; x < 200; x += 7) {
            Nat m = generalized_inverse(f, x);
            ASSERT_GE(compare_at(f, m, x), 0) << e;
            if (m > 0) {
                ASSERT_LT(compare_at(f, m - 1, x), 0) << e;
            }
        }
        for (unsigned long m = 2; m < 60; ++m) {
            Rat fm = eval_at(f, m, 40).lo().rat();
            ASSERT_LE(generalized_inverse(f, fm), m) << e;
        }
    }
}

TEST(PiecewiseLinear, Interpolates) {
    EXPECT_EQ(pl_extend_eval(OrderFn::identity(), make_rat(5, 2), 10), DyadInterval(Dyadic(Nat(5), -1)));
    EXPECT_EQ(pl_extend_eval(P("mul id id"), make_rat(3, 2), 10), DyadInterval(Dyadic(Nat(5), -1)));
    for (unsigned long n = 1; n < 50; ++n)
        ASSERT_EQ(pl_extend_eval(P("logpow k=1 a=2"), n, 20), eval_at(P("logpow k=1 a=2"), n, 20));
}

TEST(Convexity, Examples) {
    EXPECT_TRUE(check_convex(OrderFn::identity(), 100).pass);
    CheckResult two = check_convex(P("affine 2 0 id"), 100);
    EXPECT_FALSE(two.pass);
    EXPECT_EQ(two.at, 0);
    OrderFn f = OrderFn::sub(OrderFn::identity(), P("floor log2 affine 1 1 id"));
    EXPECT_TRUE(check_convex(f, 10000).pass);
}

TEST(Subidentical, Examples) {
    EXPECT_TRUE(check_subidentical(P("affine 1/2 0 id"), 100, 10).pass);
    EXPECT_FALSE(check_subidentical(OrderFn::identity(), 100, 10).pass);
    OrderFn f = OrderFn::sub(OrderFn::identity(), P("log2 affine 1 1 id"));
    EXPECT_TRUE(check_subidentical(f, 4096, 10).pass);
}

TEST(Dominates, Examples) {
    EXPECT_TRUE(dominates_upto(P("sqrt id"), P("sqrt id"), 100).pass);
    EXPECT_TRUE(dominates_upto(OrderFn::identity(), P("mul id log2 affine 1 2 id"), 200).pass);
    CheckResult r = dominates_upto(P("affine 2 0 id"), OrderFn::identity(), 100);
    EXPECT_FALSE(r.pass);
    EXPECT_EQ(r.at, 1);
}

TEST(Monotonicity, ConstructedFunctionsAreNondecreasing) {
    std::vector<std::string> exprs = {"id", "sqrt id", "logpow k=1 a=2", "logpow k=2 a=3/2", "log2 affine 1 1 id",
                                      "exp2 log2 affine 1 1 id", "max sqrt id log2 affine 1 1 id", "floor pow 2/3 id",
                                      "ceil affine 1/3 0 id", "compose sqrt id mul id id", "geom 2", "inv sqrt id",
                                      "table [1 1 2 3 5 8] affine 1 4 id", "add id sqrt id"};
    for (auto& e : exprs) {
        OrderFn f = P(e);
        ASSERT_TRUE(f.props().mono) << e;
        for (unsigned long n = 0; n < 1000; ++n) ASSERT_LE(compare_fns(f, n, f, n + 1), 0) << e << " at " << n;
    }
}

TEST(Monotonicity, CertificatesRecordHowTheyWereObtained) {
    EXPECT_EQ(monotonicity_certificate(P("sqrt id")).kind, MonoCert::Structural);
    OrderFn bumpy = OrderFn::table({Rat(3), Rat(1)}, P("affine 1 4 id"));
    EXPECT_FALSE(bumpy.props().mono);
    MonoCert c = monotonicity_certificate(bumpy, 100);
    EXPECT_EQ(c.kind, MonoCert::Failed);
    EXPECT_EQ(c.horizon, 0);
    OrderFn seam = OrderFn::table({Rat(1), Rat(2)}, P("affine 1 4 id"));
    EXPECT_TRUE(seam.props().mono);
}

TEST(Table, RejectsBoundedTails) {
    EXPECT_THROW(OrderFn::table({Rat(1)}, OrderFn::constant(3)), precondition_error);
    EXPECT_THROW(P("table [1 2] const 3"), parse_error);
}

TEST(Parser, ErrorsCarryPositions) {
    try {
        P("add id bogus");
        FAIL();
    } catch (const parse_error& e) {
        EXPECT_EQ(e.pos, 7u);
    }
    EXPECT_THROW(P("(("), parse_error);
    EXPECT_THROW(P("id id"), parse_error);
    EXPECT_EQ(P("logpow k=2 a=3/2").str(), OrderFn::log_power_product(2, make_rat(3, 2)).str());
}
