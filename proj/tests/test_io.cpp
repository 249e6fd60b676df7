#include "avlab/io.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>
#include <random>

using namespace avlab;

namespace {

Nats w(std::initializer_list<unsigned long> xs) {
    Nats v;
    for (auto x : xs) v.push_back(Nat(x));
    return v;
}

template <class F>
auto from(const std::string& text, F reader) {
    std::istringstream in(text);
    return reader(in);
}

}  // namespace

TEST(Bits, WhitespaceIgnored) {
    EXPECT_EQ(from("01 1\n\n 0\t1\n", [](std::istream& i) { return read_bits(i); }), "01101");
    EXPECT_EQ(from("", [](std::istream& i) { return read_bits(i); }), "");
}

TEST(Bits, ErrorNamesLineAndColumn) {
    try {
        from("0101\n01x1\n", [](std::istream& i) { return read_bits(i); });
        FAIL();
    } catch (const format_error& e) {
        EXPECT_EQ(e.line, 2u);
        EXPECT_NE(std::string(e.what()).find("column 3"), std::string::npos);
    }
}

TEST(Nats, TokensAcrossLines) {
    Nats v = from("3 1\n\n123456789012345678901234567890\n", [](std::istream& i) { return read_nats(i); });
    ASSERT_EQ(v.size(), 3u);
    EXPECT_EQ(v[2], Nat("123456789012345678901234567890"));
    try {
        from("1\n2\n-3\n", [](std::istream& i) { return read_nats(i); });
        FAIL();
    } catch (const format_error& e) {
        EXPECT_EQ(e.line, 3u);
    }
}

TEST(BadSetFile, EmptyWordAndComments) {
    BoundFamily two = BoundFamily::constant(2);
    BadSet B = from("# header\n0 1\n\n-   # the empty word\n1 1 0\n", [&](std::istream& i) { return read_bad_set(i, two); });
    EXPECT_EQ(B.strings, (std::set<Nats>{{}, w({0, 1}), w({1, 1, 0})}));
    EXPECT_TRUE(from("# nothing\n\n", [&](std::istream& i) { return read_bad_set(i, two); }).strings.empty());
}

TEST(BadSetFile, Errors) {
    BoundFamily two = BoundFamily::constant(2);
    auto line_of = [&](const std::string& text) -> std::size_t {
        try {
            from(text, [&](std::istream& i) { return read_bad_set(i, two); });
        } catch (const format_error& e) {
            return e.line;
        }
        return 0;
    };
    EXPECT_EQ(line_of("0\n0 2\n"), 2u);
    EXPECT_EQ(line_of("0\n\n- 1\n"), 3u);
    EXPECT_EQ(line_of("a\n"), 1u);
    EXPECT_EQ(line_of("0 1\n"), 0u);
}

TEST(Writers, RoundTrip) {
    std::mt19937_64 rng(3);
    BoundFamily h = BoundFamily::constant(3);
    for (int t = 0; t < 200; ++t) {
        Bits b;
        for (std::size_t i = 0, n = rng() % 200; i < n; ++i) b.push_back(rng() & 1 ? '1' : '0');
        std::ostringstream ob;
        write_bits(ob, b, 1 + rng() % 70);
        ASSERT_EQ(from(ob.str(), [](std::istream& i) { return read_bits(i); }), b);
        Nats v;
        for (std::size_t i = 0, n = rng() % 20; i < n; ++i) v.push_back(Nat(static_cast<unsigned long>(rng())));
        std::ostringstream on;
        write_nats(on, v);
        ASSERT_EQ(from(on.str(), [](std::istream& i) { return read_nats(i); }), v);
        std::set<Nats> s;
        for (std::size_t i = 0, n = rng() % 6; i < n; ++i) {
            Nats x;
            for (std::size_t j = 0, m = rng() % 4; j < m; ++j) x.push_back(Nat(rng() % 3));
            s.insert(x);
        }
        std::ostringstream os;
        write_bad_set(os, BadSet(s, h));
        ASSERT_EQ(from(os.str(), [&](std::istream& i) { return read_bad_set(i, h); }).strings, s);
    }
}

TEST(Files, ErrorsCarryThePath) {
    std::string path = testing::TempDir() + "avlab_io_bad.nat";
    {
        std::ofstream out(path);
        out << "1\nx\n";
    }
    try {
        read_file(path, [](std::istream& i) { return read_nats(i); });
        FAIL();
    } catch (const format_error& e) {
        EXPECT_EQ(e.line, 2u);
        EXPECT_EQ(std::string(e.what()).rfind(path + ":2:", 0), 0u);
    }
    std::remove(path.c_str());
    EXPECT_THROW(open_input(path), std::runtime_error);
}
