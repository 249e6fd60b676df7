#include "avlab/weights.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace avlab;

namespace {

std::vector<Bits> all_strings(std::size_t max_len) {
    std::vector<Bits> out{""};
    for (std::size_t len = 1; len <= max_len; ++len)
        for (unsigned long v = 0; v < (1ul << len); ++v) {
            Bits b(len, '0');
            for (std::size_t i = 0; i < len; ++i)
                if (v >> (len - 1 - i) & 1) b[i] = '1';
            out.push_back(b);
        }
    return out;
}

WeightedSet binary_set(const std::vector<Bits>& ss) {
    WeightedSet S;
    for (auto& s : ss) S.strings.push_back(bits_to_nats(s));
    return S;
}

Rat direct_sum(const std::vector<Bits>& ss) {
    std::set<Bits> u(ss.begin(), ss.end());
    Rat r = 0;
    for (auto& s : u) r += make_rat(1, pow2(s.size()));
    return r;
}

bool prefix_free(const std::vector<Bits>& ss) {
    std::set<Bits> u(ss.begin(), ss.end());
    for (auto& a : u)
        for (auto& b : u)
            if (a != b && compatible(a, b)) return false;
    return true;
}

// Max over all antichains of the 2^{-|s|} weights, by subset enumeration.
Rat brute_pwt(const std::vector<Bits>& ss) {
    std::vector<Bits> u;
    for (auto& s : std::set<Bits>(ss.begin(), ss.end())) u.push_back(s);
    Rat best = 0;
    for (unsigned long mask = 0; mask < (1ul << u.size()); ++mask) {
        std::vector<Bits> pick;
        for (std::size_t i = 0; i < u.size(); ++i)
            if (mask >> i & 1) pick.push_back(u[i]);
        if (prefix_free(pick)) best = std::max(best, direct_sum(pick));
    }
    return best;
}

// Leftmost length-d string incompatible with every earlier code.
std::optional<Bits> leftmost_free(const std::vector<Bits>& codes, std::size_t d) {
    for (unsigned long v = 0; v < (1ul << d); ++v) {
        Bits b(d, '0');
        for (std::size_t i = 0; i < d; ++i)
            if (v >> (d - 1 - i) & 1) b[i] = '1';
        if (std::none_of(codes.begin(), codes.end(), [&](const Bits& c) { return compatible(b, c); })) return b;
    }
    return std::nullopt;
}

}  // namespace

TEST(Dwt, Examples) {
    EXPECT_EQ(dwt(binary_set({}), 20), DyadInterval(0));
    EXPECT_EQ(dwt(binary_set({"0", "1"}), 20), DyadInterval(1));
    EXPECT_EQ(dwt(binary_set({"0", "00", "1"}), 20), DyadInterval(Dyadic(Nat(5), -2)));
}

TEST(Dwt, NonBinaryFamilyUsesPerSymbolMeasure) {
    WeightedSet S;
    S.family = BoundFamily::constant(3);
    S.strings = {{Nat(2)}, {Nat(0), Nat(1)}};
    DyadInterval v = dwt(S, 30);
    EXPECT_TRUE(v.contains(make_rat(1, 3) + make_rat(1, 9)));
    EXPECT_TRUE(v.width_le(30));
}

TEST(Pwt, Examples) {
    EXPECT_EQ(pwt(binary_set({"0", "00", "1"}), 20), DyadInterval(1));
    EXPECT_EQ(pwt(binary_set({"00", "01", "0"}), 20), DyadInterval(Dyadic(Nat(1), -1)));
    EXPECT_EQ(pwt(binary_set({"0", "10", "11"}), 20), dwt(binary_set({"0", "10", "11"}), 20));
    EXPECT_EQ(pwt(binary_set({""}), 20), DyadInterval(1));
}

// Every set of at most 6 strings of length <= 4 drawn at random, plus all small ones.
TEST(Pwt, AgreesWithAntichainEnumeration) {
    auto pool = all_strings(4);
    std::mt19937_64 rng(17);
    for (int t = 0; t < 3000; ++t) {
        std::size_t k = rng() % 7;
        std::vector<Bits> ss;
        for (std::size_t i = 0; i < k; ++i) ss.push_back(pool[rng() % pool.size()]);
        Rat want = brute_pwt(ss), d = direct_sum(ss);
        DyadInterval p = pwt(binary_set(ss), 30);
        ASSERT_EQ(p, DyadInterval(Dyadic::from_rat(want)));
        ASSERT_LE(want, d);
        ASSERT_EQ(want == d, prefix_free(ss));
    }
}

TEST(Pwt, Subadditive) {
    auto pool = all_strings(4);
    std::mt19937_64 rng(23);
    for (int t = 0; t < 1000; ++t) {
        std::vector<Bits> a, b;
        for (std::size_t i = 0; i < rng() % 5; ++i) a.push_back(pool[rng() % pool.size()]);
        for (std::size_t i = 0; i < rng() % 5; ++i) b.push_back(pool[rng() % pool.size()]);
        std::vector<Bits> u = a;
        u.insert(u.end(), b.begin(), b.end());
        Rat pa = brute_pwt(a), pb = brute_pwt(b), pu = pwt(binary_set(u), 30).lo().rat();
        ASSERT_LE(pu, pa + pb);
        bool apart = std::set<Bits>(a.begin(), a.end()).size() + std::set<Bits>(b.begin(), b.end()).size() ==
                     std::set<Bits>(u.begin(), u.end()).size();
        for (auto& x : a)
            for (auto& y : b) apart = apart && !compatible(x, y);
        if (apart) {
            ASSERT_EQ(pu, pa + pb);
        }
    }
}

TEST(Kraft, Examples) {
    KraftResult a = kraft_check({"0", "1"});
    EXPECT_TRUE(a.ok);
    EXPECT_EQ(a.slack, 0);
    KraftResult b = kraft_check({"0", "10", "11"});
    EXPECT_TRUE(b.ok);
    EXPECT_EQ(b.slack, 0);
    KraftResult c = kraft_check({"0", "01"});
    EXPECT_FALSE(c.ok);
    EXPECT_EQ(c.clash, std::make_pair(std::size_t{0}, std::size_t{1}));
    EXPECT_EQ(kraft_check({"00", "1"}).slack, make_rat(1, 4));
}

TEST(KraftChaitin, Examples) {
    EXPECT_EQ(kc_allocate({1, 1}).codes, (std::vector<Bits>{"0", "1"}));
    EXPECT_EQ(kc_allocate({1, 2, 2}).codes, (std::vector<Bits>{"0", "10", "11"}));
    EXPECT_EQ(kc_allocate({2, 1}).codes, (std::vector<Bits>{"00", "1"}));
    try {
        kc_allocate({1, 1, 3});
        FAIL();
    } catch (const allocation_error& e) {
        EXPECT_EQ(e.index, 2u);
    }
}

// Random request streams within budget: each code is the leftmost free string of
// its length, the free list keeps strictly decreasing lengths, and the slack is exact.
TEST(KraftChaitin, LeftmostFitOracleAndExactSlack) {
    std::mt19937_64 rng(5);
    for (int t = 0; t < 400; ++t) {
        KraftChaitin kc;
        std::vector<Bits> codes;
        std::vector<std::size_t> ds;
        Rat used = 0;
        for (int i = 0; i < 40; ++i) {
            std::size_t d = 1 + rng() % 10;
            if (used + make_rat(1, pow2(d)) > 1) continue;
            auto want = leftmost_free(codes, d);
            ASSERT_TRUE(want) << "budget left but no free string";
            Bits got = kc.allocate(d);
            ASSERT_EQ(got, *want);
            codes.push_back(got);
            ds.push_back(d);
            used += make_rat(1, pow2(d));
            auto& fl = kc.free_list();
            for (std::size_t j = 1; j < fl.size(); ++j) ASSERT_GT(fl[j - 1].size(), fl[j].size());
        }
        KraftResult r = kraft_check(codes);
        ASSERT_TRUE(r.ok);
        ASSERT_EQ(r.slack, 1 - used);
        for (std::size_t k = 0; k < codes.size(); ++k) ASSERT_EQ(codes[k].size(), ds[k]);
    }
}

TEST(Gamma, Examples) {
    EXPECT_EQ(gamma_of(0, BoundFamily::constant(2), 20), DyadInterval(1));
    for (std::size_t n = 1; n < 12; ++n) ASSERT_EQ(gamma_of(n, BoundFamily::constant(2), 20), DyadInterval(Dyadic(Nat(1), -1)));
    EXPECT_EQ(gamma_of(1, BoundFamily::constant(4), 20), DyadInterval(Dyadic(Nat(1), -2)));
    // h = (2, 8): mu = 1/16, square root 1/4
    BoundFamily h = BoundFamily::table({2, 8}, [](std::size_t) { return Nat(2); });
    EXPECT_TRUE(gamma_of(2, h, 20).contains(make_rat(1, 4)));
    DyadInterval g3 = gamma_of(2, BoundFamily::table({2, 3}, [](std::size_t) { return Nat(2); }), 30);
    Rat lo = g3.lo().rat(), hi = g3.hi().rat();
    EXPECT_LE(lo * lo, make_rat(1, 6));
    EXPECT_GE(hi * hi, make_rat(1, 6));
}

TEST(Sparse, ZeroStringExample) {
    auto code = sparse_encode("0000", 2, make_rat(1, 2));
    ASSERT_TRUE(code);
    EXPECT_EQ(code->size(), 8u);
    EXPECT_EQ(*code, "00" "000011");
    EXPECT_EQ(sparse_decode(*code, 2, make_rat(1, 2)), "0000");
}

TEST(Sparse, TooManyBlocksIsAbsent) {
    EXPECT_FALSE(sparse_encode("0001", 2, make_rat(1, 2)));
    EXPECT_FALSE(sparse_encode("00011011", 2, make_rat(1, 1)));
    EXPECT_THROW(sparse_encode("0000", 2, make_rat(1, 3)), domain_error);
    EXPECT_THROW(sparse_encode("000", 2, make_rat(1, 2)), precondition_error);
}

// Length is alpha p + 2(q+1)(2^{alpha q} - 1) on every admissible input, and decoding inverts.
TEST(Sparse, RandomRoundTripsAndExactLength) {
    std::mt19937_64 rng(29);
    int admitted = 0;
    for (int t = 0; t < 3000; ++t) {
        std::size_t q = 1 + rng() % 4;
        std::size_t aq = 1 + rng() % q;
        Rat alpha = make_rat(static_cast<unsigned long>(aq), static_cast<unsigned long>(q));
        std::size_t p = q * (1 + rng() % 8);
        // draw blocks from a small palette so many inputs are sparse
        std::size_t palette = 1 + rng() % (1u << aq);
        std::vector<Bits> pal;
        for (std::size_t i = 0; i < palette; ++i) {
            Bits b;
            for (std::size_t j = 0; j < q; ++j) b.push_back(rng() & 1 ? '1' : '0');
            pal.push_back(b);
        }
        Bits sigma;
        std::set<Bits> distinct;
        while (sigma.size() < p) {
            Bits b = pal[rng() % pal.size()];
            distinct.insert(b);
            sigma += b;
        }
        auto code = sparse_encode(sigma, q, alpha);
        ASSERT_EQ(static_cast<bool>(code), distinct.size() < (1u << aq));
        if (!code) continue;
        ++admitted;
        std::size_t expect = aq * (p / q) + 2 * (q + 1) * ((1u << aq) - 1);
        ASSERT_EQ(code->size(), expect);
        ASSERT_EQ(sparse_length(p, q, alpha), expect);
        ASSERT_EQ(sparse_decode(*code, q, alpha), sigma);
    }
    EXPECT_GE(admitted, 1000);
}

TEST(Sparse, DecoderRejectsDamage) {
    auto code = sparse_encode("01010101", 2, make_rat(1, 2));
    ASSERT_TRUE(code);
    Bits bad = *code;
    bad.pop_back();
    EXPECT_THROW(sparse_decode(bad, 2, make_rat(1, 2)), domain_error);
}
