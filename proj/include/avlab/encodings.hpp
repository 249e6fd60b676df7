#pragma once
// Bijections between strings and naturals: str, pairing, #_inf, shortlex #_h,
// and the finite part of the homeomorphism h^N -> {0,1}^N.

#include "core.hpp"

#include <algorithm>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

namespace avlab {

// Binary strings are std::string over '0'/'1'.
using Bits = std::string;
using Nats = std::vector<Nat>;

inline bool is_bits(const Bits& s) {
    return std::all_of(s.begin(), s.end(), [](char c) { return c == '0' || c == '1'; });
}

inline bool is_prefix(const Bits& a, const Bits& b) {
    return a.size() <= b.size() && std::equal(a.begin(), a.end(), b.begin());
}

inline bool compatible(const Bits& a, const Bits& b) {
    return is_prefix(a, b) || is_prefix(b, a);
}

template <class Seq>
bool is_prefix_of(const Seq& a, const Seq& b) {
    return a.size() <= b.size() && std::equal(a.begin(), a.end(), b.begin());
}

template <class Seq>
bool shortlex_less(const Seq& a, const Seq& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
}

// str: n -> the n-th binary string in shortlex order. The leading 1 of n+1 is
// dropped, the remaining digits read most significant first.
inline Bits str_decode(const Nat& n) {
    if (sgn(n) < 0) throw domain_error("str_decode of negative");
    Nat m = n + 1;
    std::string b = m.get_str(2);
    return b.substr(1);
}

inline Nat str_encode(const Bits& s) {
    if (!is_bits(s)) throw domain_error("str_encode: not a bit string");
    Nat m;
    m.set_str("1" + s, 2);
    return m - 1;
}

inline Nat pair2(const Nat& x, const Nat& y) {
    return pow2(to_size(x)) * (2 * y + 1) - 1;
}

inline std::pair<Nat, Nat> unpair2(const Nat& n) {
    if (sgn(n) < 0) throw domain_error("unpair of negative");
    Nat m = n + 1;
    std::size_t x = trailing_zeros(m);
    Nat odd = m >> x;
    return {Nat(static_cast<unsigned long>(x)), (odd - 1) / 2};
}

// pi^(k) for k = xs.size() >= 1, left-nested: pi^(k+1)(x..) = pi2(pi^(k)(..), x_k).
inline Nat pair(const Nats& xs) {
    if (xs.empty()) return 0;
    Nat acc = xs[0];
    for (std::size_t i = 1; i < xs.size(); ++i) acc = pair2(acc, xs[i]);
    return acc;
}

inline Nats unpair(std::size_t k, Nat n) {
    if (k == 0) throw domain_error("unpair arity 0");
    Nats out(k);
    for (std::size_t i = k - 1; i > 0; --i) {
        auto [a, b] = unpair2(n);
        out[i] = b;
        n = a;
    }
    out[0] = n;
    return out;
}

// #_inf(s) = sum_i 2^(s(0)+...+s(i)+i); exponents strictly increase.
inline Nat seq_index(const Nats& s) {
    Nat acc = 0;
    Nat e = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (sgn(s[i]) < 0) throw domain_error("seq_index: negative entry");
        e += s[i];
        if (i > 0) e += 1;
        mpz_setbit(acc.get_mpz_t(), to_size(e));
    }
    return acc;
}

inline Nats seq_unindex(const Nat& n) {
    if (sgn(n) < 0) throw domain_error("seq_unindex of negative");
    Nats out;
    long prev = -1;
    std::size_t bits = bit_length(n);
    for (std::size_t i = 0; i < bits; ++i) {
        if (mpz_tstbit(n.get_mpz_t(), i)) {
            out.emplace_back(static_cast<unsigned long>(static_cast<long>(i) - prev - 1));
            prev = static_cast<long>(i);
        }
    }
    return out;
}

// Alphabet bounds h(n), cached per level. Copies share the cache.
class BoundFamily {
  public:
    using Rule = std::function<Nat(std::size_t)>;

    BoundFamily() : BoundFamily(constant(2)) {}
    explicit BoundFamily(Rule r, bool nondecreasing = false, std::string name = "h")
        : st_(std::make_shared<State>()) {
        st_->rule = std::move(r);
        st_->nondecreasing = nondecreasing;
        st_->name = std::move(name);
    }

    static BoundFamily constant(const Nat& c) {
        return BoundFamily([c](std::size_t) { return c; }, true, "const " + c.get_str());
    }
    // Explicit prefix, then the tail rule from index table.size() on.
    static BoundFamily table(std::vector<Nat> t, Rule tail, bool nondecreasing = false) {
        std::size_t len = t.size();
        return BoundFamily(
            [t = std::move(t), tail = std::move(tail), len](std::size_t n) {
                return n < len ? t[n] : tail(n);
            },
            nondecreasing, "table");
    }
    static BoundFamily table(std::vector<Nat> t) {
        Nat last = t.empty() ? Nat(2) : t.back();
        return table(std::move(t), [last](std::size_t) { return last; }, false);
    }

    Nat at(std::size_t n) const {
        std::lock_guard<std::mutex> lk(st_->mu);
        while (st_->cache.size() <= n) {
            Nat v = st_->rule(st_->cache.size());
            if (v < 2) throw domain_error("bound family below 2 at level " + std::to_string(st_->cache.size()));
            st_->cache.push_back(std::move(v));
        }
        return st_->cache[n];
    }
    std::size_t small(std::size_t n) const { return to_size(at(n)); }

    // |h^n| = h(0)...h(n-1)
    Nat level_size(std::size_t n) const {
        Nat r = 1;
        for (std::size_t i = 0; i < n; ++i) r *= at(i);
        return r;
    }

    bool declared_nondecreasing() const { return st_->nondecreasing; }
    const std::string& name() const { return st_->name; }

  private:
    struct State {
        Rule rule;
        bool nondecreasing = false;
        std::string name;
        std::mutex mu;
        std::vector<Nat> cache;
    };
    std::shared_ptr<State> st_;
};

inline bool in_bounds(const Nats& w, const BoundFamily& h) {
    for (std::size_t i = 0; i < w.size(); ++i)
        if (sgn(w[i]) < 0 || w[i] >= h.at(i)) return false;
    return true;
}

// #_h: words ordered by length, then lexicographically.
inline Nat shortlex_index(const Nats& w, const BoundFamily& h) {
    if (!in_bounds(w, h)) throw domain_error("shortlex_index: word out of bounds");
    Nat below = 0, level = 1;
    for (std::size_t l = 0; l < w.size(); ++l) {
        below += level;
        level *= h.at(l);
    }
    Nat rank = 0;
    for (std::size_t i = 0; i < w.size(); ++i) rank = rank * h.at(i) + w[i];
    return below + rank;
}

inline Nats shortlex_unindex(Nat n, const BoundFamily& h) {
    if (sgn(n) < 0) throw domain_error("shortlex_unindex of negative");
    std::size_t len = 0;
    Nat level = 1;
    while (n >= level) {
        n -= level;
        level *= h.at(len);
        ++len;
    }
    Nats w(len);
    for (std::size_t i = len; i-- > 0;) {
        Nat hi = h.at(i);
        w[i] = n % hi;
        n /= hi;
    }
    return w;
}

// psi: child i < h-1 appends 1^i 0, the last child appends 1^(h-1).
inline Bits h_to_cantor(const Nats& w, const BoundFamily& h) {
    if (!in_bounds(w, h)) throw domain_error("h_to_cantor: word out of bounds");
    Bits out;
    for (std::size_t i = 0; i < w.size(); ++i) {
        std::size_t hi = h.small(i);
        std::size_t c = to_size(w[i]);
        out.append(c, '1');
        if (c + 1 < hi) out.push_back('0');
    }
    return out;
}

inline std::string show(const Nats& w) {
    std::string s = "<";
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (i) s += ",";
        s += w[i].get_str();
    }
    return s + ">";
}

}  // namespace avlab
