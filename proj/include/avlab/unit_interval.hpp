#pragma once
// Maps between h-bounded words, binary strings and rational subintervals of
// [0,1]. pi^h nests: the children of pi^h(sigma) split it into h(|sigma|)
// equal closed pieces, so a word's rank is read most significant first.

#include "gm_algebra.hpp"
#include "weights.hpp"

#include <set>
#include <utility>
#include <vector>

namespace avlab {

struct RatInterval {
    Rat lo, hi;
    Rat length() const { return hi - lo; }
    bool contains(const RatInterval& o) const { return lo <= o.lo && o.hi <= hi; }
    friend bool operator==(const RatInterval&, const RatInterval&) = default;
    std::string str() const { return "[" + lo.get_str() + ", " + hi.get_str() + "]"; }
};

// Mixed-radix rank of sigma among the words of its length.
inline Nat nested_rank(const Nats& sigma, const BoundFamily& h) {
    if (!in_bounds(sigma, h)) throw domain_error("word " + show(sigma) + " outside the alphabet bound");
    Nat k = 0;
    for (std::size_t i = 0; i < sigma.size(); ++i) k = k * h.at(i) + sigma[i];
    return k;
}

inline Nats nested_unrank(Nat k, std::size_t n, const BoundFamily& h) {
    Nats w(n);
    for (std::size_t i = n; i-- > 0;) {
        w[i] = k % h.at(i);
        k /= h.at(i);
    }
    if (sgn(k) != 0) throw domain_error("rank exceeds the level size");
    return w;
}

inline RatInterval pi_h_interval(const Nats& sigma, const BoundFamily& h) {
    Nat H = h.level_size(sigma.size());
    Nat k = nested_rank(sigma, h);
    return {make_rat(k, H), make_rat(k + 1, H)};
}

// First n binary digits of x in [0,1]; dyadic points take the expansion
// ending in zeros, except 1 = 0.111...
inline Bits bin(const Rat& x, std::size_t n) {
    if (sgn(x) < 0 || x > 1) throw domain_error("bin needs x in [0,1]");
    if (x == 1) return Bits(n, '1');
    Bits out;
    Rat r = x;
    for (std::size_t i = 0; i < n; ++i) {
        r *= 2;
        if (r >= 1) {
            out.push_back('1');
            r -= 1;
        } else {
            out.push_back('0');
        }
    }
    return out;
}

// 0.sigma000...
inline Rat unbin(const Bits& sigma) {
    if (!is_bits(sigma)) throw domain_error("unbin: not a bit string");
    if (sigma.empty()) return 0;
    Nat m;
    m.set_str(sigma, 2);
    return make_rat(m, pow2(sigma.size()));
}

// |I| = -log2 lambda(I) when that is a natural number.
inline std::size_t dyadic_level(const RatInterval& I) {
    Rat len = I.length();
    if (sgn(len) <= 0 || len > 1 || len.get_num() != 1) throw domain_error("interval length is not a power of 1/2: " + I.str());
    const Nat& d = len.get_den();
    std::size_t z = trailing_zeros(d);
    if ((d >> z) != 1) throw domain_error("interval length is not a power of 1/2: " + I.str());
    return z;
}

// sigma, tau of length |I| whose cylinders' images cover I: the grid cell
// holding the left end and its right neighbour.
inline std::pair<Bits, Bits> interval_to_cylinders(const RatInterval& I) {
    if (sgn(I.lo) < 0 || I.hi > 1) throw domain_error("interval outside [0,1]");
    std::size_t n = dyadic_level(I);
    if (n == 0) return {"", ""};
    Nat top = pow2(n) - 1;
    Nat c = rat_floor(I.lo * Rat(pow2(n)));
    if (c > top) c = top;
    Nat d = c < top ? Nat(c + 1) : c;
    auto cell = [n](const Nat& v) {
        Bits b = v.get_str(2);
        return Bits(n - b.size(), '0') + b;
    };
    return {cell(c), cell(d)};
}

struct PullbackResult {
    std::size_t n = 0;        // n_I: 1/|h^n| < lambda(I) <= 1/|h^{n-1}|
    Nat k;                    // k_I: greatest k with k/|h^n| <= lambda(I)
    std::vector<Nats> words;  // level-n words whose cells meet I in more than a point
    DyadInterval weight;      // dwt_g of the words
    DyadInterval alpha;       // 3 * sup of the (*) ratio over 1 <= m <= horizon
    DyadInterval bound;       // alpha * 2^{-f(|I|)}
    std::size_t horizon = 0;
    bool holds = false;
};

inline PullbackResult interval_pullback(const RatInterval& I, const BoundFamily& h, const OrderFn& g, const OrderFn& f,
                                        std::size_t horizon = 0, long prec = 32) {
    if (sgn(I.lo) < 0 || I.hi > 1 || I.hi <= I.lo) throw domain_error("pullback needs a nondegenerate interval in [0,1]");
    PullbackResult r;
    Rat lam = I.length();
    r.n = 1;
    while (Rat(h.level_size(r.n)) * lam <= 1) ++r.n;
    Nat H = h.level_size(r.n);
    r.k = rat_floor(lam * Rat(H));
    Nat first = rat_floor(I.lo * Rat(H));
    Nat last = rat_ceil(I.hi * Rat(H)) - 1;
    for (Nat c = first; c <= last && c < H; ++c) r.words.push_back(nested_unrank(c, r.n, h));
    if (r.words.size() > r.k + 2) throw std::logic_error("pullback produced more than k_I + 2 cells");
    r.weight = dwt(WeightedSet{r.words, h, weight_by_length(g)}, prec);
    r.horizon = std::max(horizon, r.n);
    StarReport st = star_condition(g, f, LevelLog::from_family(h), r.horizon, prec);
    r.alpha = DyadInterval(Dyadic(3)) * st.sup;
    long w = prec + 16;
    DyadInterval len = -iv_log2(DyadInterval::of(lam, w), w);
    DyadInterval fI = len.is_point() && Dyadic(len.lo().floor()) == len.lo() ? f.eval_raw(len.lo().floor(), w) : f.eval_real(len, w);
    r.bound = r.alpha * iv_exp2(-fI, w);
    r.holds = r.weight.hi() <= r.bound.lo();
    return r;
}

}  // namespace avlab
