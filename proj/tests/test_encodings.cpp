#include "avlab/encodings.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace avlab;

namespace {

// All bit strings in shortlex order, built by counting.
std::vector<Bits> shortlex_strings(std::size_t max_len) {
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

Nats nats(std::initializer_list<unsigned long> xs) {
    Nats w;
    for (auto x : xs) w.push_back(Nat(x));
    return w;
}

}  // namespace

TEST(Str, SmallValues) {
    EXPECT_EQ(str_decode(0), "");
    EXPECT_EQ(str_decode(1), "0");
    EXPECT_EQ(str_decode(2), "1");
    EXPECT_EQ(str_decode(3), "00");
    EXPECT_EQ(str_encode(""), 0);
    EXPECT_EQ(str_encode("1"), 2);
}

TEST(Str, MatchesShortlexEnumeration) {
    auto all = shortlex_strings(12);
    for (std::size_t n = 0; n < all.size(); ++n) {
        ASSERT_EQ(str_decode(Nat(static_cast<unsigned long>(n))), all[n]) << n;
        ASSERT_EQ(str_encode(all[n]), Nat(static_cast<unsigned long>(n)));
    }
}

TEST(Str, RoundTripAndOrder) {
    Bits prev = str_decode(0);
    for (unsigned long n = 1; n <= 100000; ++n) {
        Bits cur = str_decode(n);
        ASSERT_EQ(str_encode(cur), n);
        ASSERT_TRUE(shortlex_less(prev, cur)) << n;
        prev = cur;
    }
}

TEST(Str, LengthBound) {
    for (auto& s : shortlex_strings(12)) ASSERT_LE(str_encode(s), pow2(s.size() + 1));
}

TEST(Str, RejectsNonBits) { EXPECT_THROW(str_encode("012"), domain_error); }

TEST(Pairing, DisplayedValues) {
    EXPECT_EQ(pair2(0, 0), 0);
    EXPECT_EQ(pair2(1, 1), 5);
    EXPECT_EQ(pair2(2, 0), 3);
}

TEST(Pairing, MatchesFormulaAndInverts) {
    for (unsigned long x = 0; x < 300; ++x)
        for (unsigned long y = 0; y < 300; ++y) {
            Nat z = pair2(x, y);
            ASSERT_EQ(z, pow2(x) * (2 * y + 1) - 1);
            auto [a, b] = unpair2(z);
            ASSERT_EQ(a, x);
            ASSERT_EQ(b, y);
        }
}

TEST(Pairing, SurjectiveOnAnInitialSegment) {
    for (unsigned long z = 0; z < 20000; ++z) {
        auto [a, b] = unpair2(z);
        ASSERT_EQ(pair2(a, b), z);
    }
}

TEST(Pairing, HigherArityNests) {
    std::mt19937_64 rng(7);
    for (int t = 0; t < 10000; ++t) {
        std::size_t k = 1 + rng() % 3;
        Nats xs;
        for (std::size_t i = 0; i < k; ++i) xs.push_back(Nat(static_cast<unsigned long>(rng() % 10)));
        Nat z = pair(xs);
        Nat expect = xs[0];
        for (std::size_t i = 1; i < k; ++i) expect = pow2(to_size(expect)) * (2 * xs[i] + 1) - 1;
        ASSERT_EQ(z, expect);
        ASSERT_EQ(unpair(k, z), xs);
    }
}

TEST(SeqIndex, SmallValues) {
    EXPECT_EQ(seq_index({}), 0);
    EXPECT_EQ(seq_index(nats({0})), 1);
    EXPECT_EQ(seq_index(nats({1})), 2);
    EXPECT_EQ(seq_index(nats({0, 0})), 3);
}

TEST(SeqIndex, RoundTrip) {
    for (unsigned long n = 0; n < 20000; ++n) ASSERT_EQ(seq_index(seq_unindex(n)), n);
}

TEST(SeqIndex, PrefixMonotone) {
    std::vector<Nats> all{{}};
    for (std::size_t len = 1; len <= 3; ++len) {
        std::vector<Nats> next;
        for (auto& w : all)
            if (w.size() == len - 1)
                for (unsigned long v = 0; v < 4; ++v) {
                    Nats c = w;
                    c.push_back(v);
                    next.push_back(c);
                }
        all.insert(all.end(), next.begin(), next.end());
    }
    for (auto& a : all)
        for (auto& b : all)
            if (is_prefix_of(a, b)) {
                ASSERT_LE(seq_index(a), seq_index(b)) << show(a) << " " << show(b);
            }
}

TEST(Shortlex, BinaryAndMixedBounds) {
    BoundFamily two = BoundFamily::constant(2);
    EXPECT_EQ(shortlex_index({}, two), 0);
    EXPECT_EQ(shortlex_index(nats({0}), two), 1);
    EXPECT_EQ(shortlex_index(nats({1}), two), 2);
    EXPECT_EQ(shortlex_index(nats({0, 0}), two), 3);
    BoundFamily h = BoundFamily::table({3}, [](std::size_t) { return Nat(2); });
    EXPECT_EQ(shortlex_index(nats({2}), h), 3);
    EXPECT_EQ(shortlex_index(nats({0, 0}), h), 4);
}

TEST(Shortlex, EnumerationOrder) {
    BoundFamily h = BoundFamily::table({3, 2, 4}, [](std::size_t) { return Nat(3); });
    Nats prev = shortlex_unindex(0, h);
    for (unsigned long n = 1; n < 10000; ++n) {
        Nats cur = shortlex_unindex(n, h);
        ASSERT_TRUE(in_bounds(cur, h));
        ASSERT_TRUE(shortlex_less(prev, cur));
        ASSERT_EQ(shortlex_index(cur, h), n);
        prev = cur;
    }
}

TEST(HToCantor, Examples) {
    BoundFamily two = BoundFamily::constant(2);
    EXPECT_EQ(h_to_cantor({}, two), "");
    EXPECT_EQ(h_to_cantor(nats({0}), two), "0");
    EXPECT_EQ(h_to_cantor(nats({1}), two), "1");
    BoundFamily h = BoundFamily::table({3}, [](std::size_t) { return Nat(3); });
    EXPECT_EQ(h_to_cantor(nats({1}), h), "10");
    EXPECT_EQ(h_to_cantor(nats({2}), h), "11");
}

// The children's images are pairwise incompatible, extend the parent's image,
// and their cylinders add up to the parent's.
TEST(HToCantor, ChildrenPartitionTheParentCylinder) {
    for (unsigned long a = 2; a <= 4; ++a)
        for (unsigned long b = a; b <= 4; ++b) {
            BoundFamily h = BoundFamily::table({Nat(a), Nat(b)}, [b](std::size_t) { return Nat(b); }, true);
            for (unsigned long n = 0;; ++n) {
                Nats w = shortlex_unindex(n, h);
                if (w.size() > 3) break;
                Bits img = h_to_cantor(w, h);
                std::vector<Bits> kids;
                Rat mass = 0;
                for (Nat i = 0; i < h.at(w.size()); ++i) {
                    Nats c = w;
                    c.push_back(i);
                    kids.push_back(h_to_cantor(c, h));
                    ASSERT_TRUE(is_prefix(img, kids.back()));
                    mass += make_rat(1, pow2(kids.back().size()));
                }
                for (std::size_t i = 0; i < kids.size(); ++i)
                    for (std::size_t j = i + 1; j < kids.size(); ++j) ASSERT_FALSE(compatible(kids[i], kids[j]));
                ASSERT_EQ(mass, make_rat(1, pow2(img.size())));
            }
        }
}

TEST(BoundFamily, RejectsBoundsBelowTwo) {
    BoundFamily h([](std::size_t n) { return Nat(static_cast<unsigned long>(n)); });
    EXPECT_THROW(h.at(0), domain_error);
}
