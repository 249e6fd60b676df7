#include "avlab/numerics.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace avlab;

namespace {

// ln(x) for rational x > 0 from 2 atanh((x-1)/(x+1)) with a geometric tail
// bound; brackets of width about 2^-bits.
std::pair<Rat, Rat> ln_bracket(const Rat& x, int bits) {
    Rat t = (x - 1) / (x + 1);
    Rat t2 = t * t, pw = t, s = 0;
    Rat eps = make_rat(1, pow2(bits));
    for (unsigned long k = 0;; ++k) {
        s += pw / Rat(2 * k + 1);
        pw *= t2;
        // |remaining terms| <= |pw| / (1 - t2)
        Rat tail = abs(Rat(pw / (1 - t2)));
        if (tail < eps) {
            Rat lo = 2 * (s - tail), hi = 2 * (s + tail);
            if (lo > hi) std::swap(lo, hi);
            return {lo, hi};
        }
    }
}

// log2 of a rational as a bracket: x = 2^e y with y in [1,2), then ln(y) / ln(2).
std::pair<Rat, Rat> log2_bracket(Rat x, int bits) {
    long e = 0;
    while (x >= 2) x /= 2, ++e;
    while (x < 1) x *= 2, --e;
    auto [a, b] = ln_bracket(x, bits + 8);
    auto [c, d] = ln_bracket(Rat(2), bits + 8);
    // a, b may be negative; c, d > 0
    Rat q[4] = {a / c, a / d, b / c, b / d};
    return {e + *std::min_element(q, q + 4), e + *std::max_element(q, q + 4)};
}

Dyadic random_dyadic(std::mt19937_64& rng) {
    long m = static_cast<long>(rng() % 2001) - 1000;
    long e = static_cast<long>(rng() % 9) - 6;
    return Dyadic(Nat(m), e);
}

DyadInterval random_interval(std::mt19937_64& rng) {
    Dyadic a = random_dyadic(rng), b = random_dyadic(rng);
    return a <= b ? DyadInterval(a, b) : DyadInterval(b, a);
}

// A dyadic point of [lo, hi], endpoints included.
Rat sample(const DyadInterval& iv, std::mt19937_64& rng) {
    switch (rng() % 4) {
        case 0: return iv.lo().rat();
        case 1: return iv.hi().rat();
        default: {
            Rat u = make_rat(Nat(static_cast<unsigned long>(rng() % 1025)), 1024);
            return iv.lo().rat() + u * (iv.hi().rat() - iv.lo().rat());
        }
    }
}

}  // namespace

TEST(Dyadic, CanonicalForm) {
    Dyadic a(Nat(12), 0), b(Nat(3), 2);
    EXPECT_EQ(a, b);
    EXPECT_EQ(a.mant(), 3);
    EXPECT_EQ(a.exp(), 2);
    EXPECT_EQ(Dyadic(0).exp(), 0);
    EXPECT_FALSE(Dyadic::exact(make_rat(1, 3)));
    EXPECT_EQ(Dyadic::from_rat(make_rat(3, 8)).rat(), make_rat(3, 8));
}

TEST(Interval, BasicArithmetic) {
    EXPECT_EQ(DyadInterval(1) + DyadInterval(2), DyadInterval(3));
    EXPECT_EQ(DyadInterval(Dyadic(1), Dyadic(2)) * DyadInterval(Dyadic(-1), Dyadic(1)), DyadInterval(Dyadic(-2), Dyadic(2)));
    DyadInterval third = iv_div(DyadInterval(1), DyadInterval(3), 30);
    EXPECT_TRUE(third.contains(make_rat(1, 3)));
    EXPECT_TRUE(third.width_le(30));
    EXPECT_THROW(iv_div(DyadInterval(1), DyadInterval(Dyadic(-1), Dyadic(1))), domain_error);
    EXPECT_THROW(DyadInterval(Dyadic(2), Dyadic(1)), domain_error);
}

TEST(Interval, ContainmentUnderRandomSamples) {
    std::mt19937_64 rng(11);
    for (int t = 0; t < 10000; ++t) {
        DyadInterval a = random_interval(rng), b = random_interval(rng);
        Rat x = sample(a, rng), y = sample(b, rng);
        ASSERT_TRUE(iv_arith(IvOp::add, a, b).contains(Rat(x + y)));
        ASSERT_TRUE(iv_arith(IvOp::sub, a, b).contains(Rat(x - y)));
        ASSERT_TRUE(iv_arith(IvOp::mul, a, b).contains(Rat(x * y)));
        ASSERT_TRUE(iv_arith(IvOp::neg, a).contains(Rat(-x)));
        ASSERT_TRUE(iv_arith(IvOp::min, a, b).contains(std::min(x, y)));
        ASSERT_TRUE(iv_arith(IvOp::max, a, b).contains(std::max(x, y)));
        if (b.lo().sign() > 0 || b.hi().sign() < 0) {
            ASSERT_TRUE(iv_arith(IvOp::div, a, b, 40).contains(Rat(x / y)));
        }
    }
}

TEST(Log2, ExactPowersAndRanges) {
    DyadInterval e = iv_log2(DyadInterval(8), 10);
    EXPECT_TRUE(e.contains(Rat(3)));
    EXPECT_TRUE(e.width_le(10));
    DyadInterval r = iv_log2(DyadInterval(Dyadic(2), Dyadic(4)), 10);
    EXPECT_TRUE(r.contains(DyadInterval(Dyadic(1), Dyadic(2))));
    EXPECT_THROW(iv_log2(DyadInterval(0)), domain_error);
    EXPECT_THROW(iv_log2(DyadInterval(Dyadic(-1), Dyadic(1))), domain_error);
}

TEST(Log2, AgreesWithSeriesOracle) {
    for (unsigned long q : {3ul, 5ul, 7ul, 10ul, 1000ul}) {
        for (long prec : {20l, 40l}) {
            DyadInterval v = iv_log2(DyadInterval(Dyadic(Nat(q))), prec);
            auto [lo, hi] = log2_bracket(Rat(q), static_cast<int>(prec) + 10);
            EXPECT_LE(v.lo().rat(), lo) << q;
            EXPECT_GE(v.hi().rat(), hi) << q;
            EXPECT_TRUE(v.width_le(prec)) << q;
        }
    }
    DyadInterval l3 = iv_log2(DyadInterval(3), 20);
    EXPECT_GE(l3.lo().rat(), make_rat(1584961, 1000000));
    EXPECT_LE(l3.hi().rat(), make_rat(1584964, 1000000));
}

TEST(Log2, FractionalArguments) {
    std::mt19937_64 rng(5);
    for (int t = 0; t < 200; ++t) {
        Rat x = make_rat(Nat(static_cast<unsigned long>(1 + rng() % 5000)), 64);
        DyadInterval v = iv_log2(DyadInterval(Dyadic::from_rat(x)), 24);
        auto [lo, hi] = log2_bracket(x, 34);
        ASSERT_LE(v.lo().rat(), lo);
        ASSERT_GE(v.hi().rat(), hi);
    }
}

TEST(Exp2, InvertsRationalRoots) {
    // 2^{p/q} bracket: lo^q <= 2^p <= hi^q
    for (long p = -7; p <= 7; ++p)
        for (unsigned long q : {1ul, 2ul, 3ul, 5ul}) {
            Rat y = make_rat(Nat(p), Nat(q));
            DyadInterval v = iv_exp2(DyadInterval::of(y, 60), 30);
            Rat two_p = p >= 0 ? Rat(pow2(p)) : make_rat(1, pow2(-p));
            Rat lo = v.lo().rat(), hi = v.hi().rat(), lq = 1, hq = 1;
            for (unsigned long i = 0; i < q; ++i) {
                lq *= lo;
                hq *= hi;
            }
            EXPECT_LE(lq, two_p) << p << "/" << q;
            EXPECT_GE(hq, two_p) << p << "/" << q;
        }
}

TEST(Pow, RootsAndIdentity) {
    DyadInterval r = iv_pow(DyadInterval(4), make_rat(1, 2), 20);
    EXPECT_TRUE(r.contains(Rat(2)));
    EXPECT_TRUE(r.width_le(20));
    EXPECT_EQ(iv_pow(DyadInterval(7), Rat(0), 20), DyadInterval(1));
    DyadInterval s = iv_pow(DyadInterval(2), make_rat(3, 2), 20);
    EXPECT_LE(s.lo().rat() * s.lo().rat(), Rat(8));
    EXPECT_GE(s.hi().rat() * s.hi().rat(), Rat(8));
    EXPECT_GE(s.lo().rat(), make_rat(2828427, 1000000));
    EXPECT_LE(s.hi().rat(), make_rat(2828428, 1000000));
    EXPECT_THROW(iv_pow(DyadInterval(Dyadic(-2), Dyadic(1)), make_rat(1, 2), 10), domain_error);
}

TEST(Pow, WidthControlOnPoints) {
    for (unsigned long x = 1; x < 60; ++x)
        for (Rat a : {make_rat(1, 3), make_rat(5, 2), make_rat(-2, 7)}) {
            DyadInterval v = iv_pow(DyadInterval(Dyadic(Nat(x))), a, 24);
            ASSERT_TRUE(v.width_le(24)) << x << "^" << a;
        }
}

TEST(RealBracket, ConstantAndGeometric) {
    RealBracket half = RealBracket::constant(make_rat(1, 2));
    EXPECT_EQ(bracket_eval(half, 5), DyadInterval(Dyadic(Nat(1), -1)));
    // sum_{n>=0} 2^-n: partial sum through k+1 plus the exact tail bound
    RealBracket geo([](long k) {
        Dyadic s = Dyadic(2) - Dyadic(Nat(1), -(k + 1));
        return DyadInterval(s, Dyadic(2));
    });
    EXPECT_TRUE(bracket_eval(geo, 8).contains(Rat(2)));
    for (long k = 0; k < 20; ++k) {
        ASSERT_TRUE(geo.at(k).contains(geo.at(k + 1)));
        ASSERT_TRUE(geo.at(k).width_le(k));
    }
}

TEST(RealBracket, RejectsWideRefinements) {
    RealBracket bad([](long) { return DyadInterval(Dyadic(0), Dyadic(1)); });
    EXPECT_THROW(bad.at(3), domain_error);
}

TEST(Ln2, MatchesSeriesOracle) {
    DyadInterval v = ln2_interval(40);
    auto [lo, hi] = ln_bracket(Rat(2), 60);
    EXPECT_LE(v.lo().rat(), lo);
    EXPECT_GE(v.hi().rat(), hi);
    EXPECT_TRUE(v.width_le(40));
}

TEST(CompareReals, DecidesAndEscalates) {
    EXPECT_EQ(compare_reals([](long p) { return iv_log2(DyadInterval(3), p); }, [](long) { return DyadInterval(Dyadic(Nat(3), -1)); }), 1);
    EXPECT_EQ(compare_reals([](long) { return DyadInterval(2); }, [](long) { return DyadInterval(2); }), 0);
    // log2 8 = 3 is a point; log2 3 + log2 (8/3) is not, so equality stays open.
    EXPECT_THROW(compare_reals([](long p) { return iv_log2(DyadInterval(3), p) + iv_log2(DyadInterval::of(make_rat(8, 3), p + 4), p); },
                               [](long) { return DyadInterval(3); }, 16, 64),
                 indeterminate);
}
