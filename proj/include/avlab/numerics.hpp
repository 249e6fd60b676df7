#pragma once
// Dyadic rationals, outward-rounded intervals, and refinable real brackets.
// No floating point: irrational functions are bracketed by exact predicates.

#include "core.hpp"

#include <algorithm>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace avlab {

// mant * 2^exp with mant odd, or mant = exp = 0.
class Dyadic {
  public:
    Dyadic() = default;
    Dyadic(long v) : m_(v) { norm(); }
    Dyadic(const Nat& m, long e = 0) : m_(m), e_(e) { norm(); }

    static Dyadic from_rat(const Rat& q) {
        auto d = exact(q);
        if (!d) throw domain_error("not dyadic: " + q.get_str());
        return *d;
    }
    static std::optional<Dyadic> exact(const Rat& q) {
        const Nat& den = q.get_den();
        std::size_t z = trailing_zeros(den);
        if ((den >> z) != 1) return std::nullopt;
        return Dyadic(q.get_num(), -static_cast<long>(z));
    }
    // Largest k/2^prec <= q, and smallest k/2^prec >= q.
    static Dyadic round_down(const Rat& q, long prec) { return Dyadic(rat_floor(q * scale(prec)), -prec); }
    static Dyadic round_up(const Rat& q, long prec) { return Dyadic(rat_ceil(q * scale(prec)), -prec); }

    const Nat& mant() const { return m_; }
    long exp() const { return e_; }
    int sign() const { return sgn(m_); }

    Rat rat() const {
        if (e_ >= 0) return Rat(m_ << e_);
        return make_rat(m_, pow2(static_cast<unsigned long>(-e_)));
    }

    Nat floor() const {
        if (e_ >= 0) return m_ << e_;
        Nat r;
        mpz_fdiv_q_2exp(r.get_mpz_t(), m_.get_mpz_t(), static_cast<unsigned long>(-e_));
        return r;
    }
    Nat ceil() const {
        if (e_ >= 0) return m_ << e_;
        Nat r;
        mpz_cdiv_q_2exp(r.get_mpz_t(), m_.get_mpz_t(), static_cast<unsigned long>(-e_));
        return r;
    }
    bool is_integer() const { return e_ >= 0; }

    Dyadic trunc_down(long prec) const {
        if (e_ >= -prec) return *this;
        Nat r;
        mpz_fdiv_q_2exp(r.get_mpz_t(), m_.get_mpz_t(), static_cast<unsigned long>(-e_ - prec));
        return Dyadic(r, -prec);
    }
    Dyadic trunc_up(long prec) const {
        if (e_ >= -prec) return *this;
        Nat r;
        mpz_cdiv_q_2exp(r.get_mpz_t(), m_.get_mpz_t(), static_cast<unsigned long>(-e_ - prec));
        return Dyadic(r, -prec);
    }

    friend Dyadic operator+(const Dyadic& a, const Dyadic& b) {
        long e = std::min(a.e_, b.e_);
        return Dyadic((a.m_ << (a.e_ - e)) + (b.m_ << (b.e_ - e)), e);
    }
    friend Dyadic operator-(const Dyadic& a) { return Dyadic(-a.m_, a.e_); }
    friend Dyadic operator-(const Dyadic& a, const Dyadic& b) { return a + (-b); }
    friend Dyadic operator*(const Dyadic& a, const Dyadic& b) { return Dyadic(a.m_ * b.m_, a.e_ + b.e_); }
    Dyadic shifted(long k) const { return Dyadic(m_, e_ + k); }

    friend int cmp(const Dyadic& a, const Dyadic& b) {
        if (a.e_ == b.e_) return ::cmp(a.m_, b.m_);
        long e = std::min(a.e_, b.e_);
        Nat x = a.m_ << (a.e_ - e), y = b.m_ << (b.e_ - e);
        return ::cmp(x, y);
    }
    friend bool operator==(const Dyadic& a, const Dyadic& b) { return a.m_ == b.m_ && a.e_ == b.e_; }
    friend bool operator!=(const Dyadic& a, const Dyadic& b) { return !(a == b); }
    friend bool operator<(const Dyadic& a, const Dyadic& b) { return cmp(a, b) < 0; }
    friend bool operator<=(const Dyadic& a, const Dyadic& b) { return cmp(a, b) <= 0; }
    friend bool operator>(const Dyadic& a, const Dyadic& b) { return cmp(a, b) > 0; }
    friend bool operator>=(const Dyadic& a, const Dyadic& b) { return cmp(a, b) >= 0; }

    std::string str() const { return rat().get_str(); }
    // Fixed-point decimal rendering rounded toward -inf (down=true) or +inf.
    std::string decimal(int digits, bool down = true) const {
        Rat q = rat();
        Nat p10 = 1;
        for (int i = 0; i < digits; ++i) p10 *= 10;
        Nat k = down ? rat_floor(q * p10) : rat_ceil(q * p10);
        bool neg = sgn(k) < 0;
        if (neg) k = -k;
        std::string s = k.get_str();
        if (static_cast<int>(s.size()) <= digits) s = std::string(digits - s.size() + 1, '0') + s;
        if (digits > 0) s.insert(s.size() - digits, ".");
        return (neg ? "-" : "") + s;
    }

  private:
    static Nat scale(long prec) { return prec >= 0 ? pow2(prec) : Nat(1); }
    void norm() {
        if (sgn(m_) == 0) {
            e_ = 0;
            return;
        }
        std::size_t z = mpz_scan1(m_.get_mpz_t(), 0);
        if (z) {
            m_ >>= z;
            e_ += static_cast<long>(z);
        }
    }
    Nat m_ = 0;
    long e_ = 0;
};

inline std::ostream& operator<<(std::ostream& os, const Dyadic& d) { return os << d.str(); }

class DyadInterval {
  public:
    DyadInterval() = default;
    DyadInterval(const Dyadic& p) : lo_(p), hi_(p) {}
    DyadInterval(long v) : lo_(v), hi_(v) {}
    DyadInterval(const Dyadic& lo, const Dyadic& hi) : lo_(lo), hi_(hi) {
        if (hi_ < lo_) throw domain_error("interval with hi < lo");
    }
    static DyadInterval around(const Rat& q, long prec) {
        return {Dyadic::round_down(q, prec), Dyadic::round_up(q, prec)};
    }
    static DyadInterval of(const Rat& q, long prec) {
        if (auto d = Dyadic::exact(q)) return *d;
        return around(q, prec);
    }

    const Dyadic& lo() const { return lo_; }
    const Dyadic& hi() const { return hi_; }
    Dyadic width() const { return hi_ - lo_; }
    bool is_point() const { return lo_ == hi_; }
    bool contains(const Dyadic& x) const { return lo_ <= x && x <= hi_; }
    bool contains(const Rat& x) const { return lo_.rat() <= x && x <= hi_.rat(); }
    bool contains(const DyadInterval& o) const { return lo_ <= o.lo_ && o.hi_ <= hi_; }
    bool width_le(long k) const { return width() <= Dyadic(1).shifted(-k); }
    friend bool operator==(const DyadInterval& a, const DyadInterval& b) { return a.lo_ == b.lo_ && a.hi_ == b.hi_; }
    std::string str() const { return "[" + lo_.str() + ", " + hi_.str() + "]"; }
    std::string decimal(int digits) const {
        return "[" + lo_.decimal(digits, true) + ", " + hi_.decimal(digits, false) + "]";
    }

  private:
    Dyadic lo_, hi_;
};

inline std::ostream& operator<<(std::ostream& os, const DyadInterval& d) { return os << d.str(); }

inline std::optional<DyadInterval> intersect(const DyadInterval& a, const DyadInterval& b) {
    Dyadic lo = std::max(a.lo(), b.lo()), hi = std::min(a.hi(), b.hi());
    if (hi < lo) return std::nullopt;
    return DyadInterval(lo, hi);
}
inline DyadInterval hull(const DyadInterval& a, const DyadInterval& b) {
    return {std::min(a.lo(), b.lo()), std::max(a.hi(), b.hi())};
}

// Working precision used when an operation must round (division, roots).
inline constexpr long default_prec = 64;
inline constexpr long precision_cap = 256;

inline DyadInterval operator+(const DyadInterval& a, const DyadInterval& b) { return {a.lo() + b.lo(), a.hi() + b.hi()}; }
inline DyadInterval operator-(const DyadInterval& a) { return {-a.hi(), -a.lo()}; }
inline DyadInterval operator-(const DyadInterval& a, const DyadInterval& b) { return a + (-b); }
inline DyadInterval operator*(const DyadInterval& a, const DyadInterval& b) {
    Dyadic p[4] = {a.lo() * b.lo(), a.lo() * b.hi(), a.hi() * b.lo(), a.hi() * b.hi()};
    return {*std::min_element(p, p + 4), *std::max_element(p, p + 4)};
}

inline DyadInterval iv_reciprocal(const DyadInterval& b, long prec = default_prec) {
    if (b.lo().sign() <= 0 && b.hi().sign() >= 0) throw domain_error("division by an interval containing 0");
    Rat l = 1 / b.hi().rat(), h = 1 / b.lo().rat();
    return {Dyadic::exact(l) ? Dyadic::from_rat(l) : Dyadic::round_down(l, prec),
            Dyadic::exact(h) ? Dyadic::from_rat(h) : Dyadic::round_up(h, prec)};
}

inline DyadInterval iv_div(const DyadInterval& a, const DyadInterval& b, long prec = default_prec) {
    if (b.lo().sign() <= 0 && b.hi().sign() >= 0) throw domain_error("division by an interval containing 0");
    Rat bl = b.lo().rat(), bh = b.hi().rat();
    Rat q[4] = {a.lo().rat() / bl, a.lo().rat() / bh, a.hi().rat() / bl, a.hi().rat() / bh};
    Rat lo = *std::min_element(q, q + 4), hi = *std::max_element(q, q + 4);
    auto dl = Dyadic::exact(lo), dh = Dyadic::exact(hi);
    return {dl ? *dl : Dyadic::round_down(lo, prec), dh ? *dh : Dyadic::round_up(hi, prec)};
}

inline DyadInterval iv_min(const DyadInterval& a, const DyadInterval& b) {
    return {std::min(a.lo(), b.lo()), std::min(a.hi(), b.hi())};
}
inline DyadInterval iv_max(const DyadInterval& a, const DyadInterval& b) {
    return {std::max(a.lo(), b.lo()), std::max(a.hi(), b.hi())};
}

enum class IvOp { add, sub, mul, div, neg, min, max };

inline DyadInterval iv_arith(IvOp op, const DyadInterval& a, const DyadInterval& b = DyadInterval(),
                             long prec = default_prec) {
    switch (op) {
        case IvOp::add: return a + b;
        case IvOp::sub: return a - b;
        case IvOp::mul: return a * b;
        case IvOp::div: return iv_div(a, b, prec);
        case IvOp::neg: return -a;
        case IvOp::min: return iv_min(a, b);
        case IvOp::max: return iv_max(a, b);
    }
    throw domain_error("unknown interval op");
}

inline DyadInterval iv_floor(const DyadInterval& a) { return {Dyadic(a.lo().floor()), Dyadic(a.hi().floor())}; }
inline DyadInterval iv_ceil(const DyadInterval& a) { return {Dyadic(a.lo().ceil()), Dyadic(a.hi().ceil())}; }

namespace detail {

// log2(z) for 1 <= z < 2 by repeated squaring; rounding down yields a lower
// bound, rounding up an upper bound.
inline Dyadic log2_unit(Dyadic z, long bits, long work, bool upper) {
    Dyadic acc = 0;
    const Dyadic two = 2;
    for (long i = 1; i <= bits; ++i) {
        z = z * z;
        z = upper ? z.trunc_up(work) : z.trunc_down(work);
        if (z >= two) {
            acc = acc + Dyadic(1).shifted(-i);
            z = z.shifted(-1);
        }
    }
    if (upper) acc = acc + Dyadic(1).shifted(-bits);
    return acc;
}

inline long floor_log2(const Dyadic& x) {
    return static_cast<long>(bit_length(x.mant())) - 1 + x.exp();
}

}  // namespace detail

inline DyadInterval iv_log2(const DyadInterval& a, long prec = default_prec) {
    if (a.lo().sign() <= 0) throw domain_error("log2 of a nonpositive interval");
    auto point_log = [&](const Dyadic& x, bool upper) -> Dyadic {
        if (x.mant() == 1) return Dyadic(x.exp());
        long e = detail::floor_log2(x);
        Dyadic z = x.shifted(-e);
        return Dyadic(e) + detail::log2_unit(z, prec + 2, prec + 8, upper);
    };
    return {point_log(a.lo(), false), point_log(a.hi(), true)};
}

namespace detail {

// Square root of a nonnegative dyadic, rounded to 2^-prec.
inline DyadInterval sqrt_point(const Dyadic& x, long prec) {
    if (x.sign() < 0) throw domain_error("sqrt of negative");
    if (x.sign() == 0) return Dyadic(0);
    // x * 4^prec as integer (floor / ceil), then isqrt.
    Dyadic scaled = x.shifted(2 * prec);
    Nat lo_i = scaled.floor(), hi_i = scaled.ceil();
    Nat r1, r2;
    mpz_sqrt(r1.get_mpz_t(), lo_i.get_mpz_t());
    mpz_sqrt(r2.get_mpz_t(), hi_i.get_mpz_t());
    if (r2 * r2 < hi_i) r2 += 1;
    return {Dyadic(r1, -prec), Dyadic(r2, -prec)};
}

}  // namespace detail

// 2^y with outward rounding.
inline DyadInterval iv_exp2(const DyadInterval& y, long prec = default_prec) {
    auto point = [&](const Dyadic& v, bool upper) -> Dyadic {
        Nat n = v.floor();
        Dyadic f = v - Dyadic(n);
        if (!n.fits_slong_p()) throw domain_error("exp2 exponent too large");
        long ni = n.get_si();
        long work = prec + 16 + std::max(0L, ni);
        long bits = work;
        Dyadic ft = upper ? f.trunc_up(bits) : f.trunc_down(bits);
        // r_i = 2^(2^-i), bracketed by repeated square roots.
        DyadInterval r = Dyadic(2), acc = Dyadic(1);
        for (long i = 1; i <= bits && ft.sign() != 0; ++i) {
            DyadInterval lo = detail::sqrt_point(r.lo(), work), hi = detail::sqrt_point(r.hi(), work);
            r = DyadInterval(lo.lo(), hi.hi());
            Dyadic bit = Dyadic(1).shifted(-i);
            if (ft >= bit) {
                ft = ft - bit;
                acc = acc * r;
                acc = DyadInterval(acc.lo().trunc_down(work), acc.hi().trunc_up(work));
            }
        }
        Dyadic out = upper ? acc.hi() : acc.lo();
        return out.shifted(ni);
    };
    Dyadic lo = point(y.lo(), false), hi = point(y.hi(), true);
    lo = lo.trunc_down(prec + 4);
    hi = hi.trunc_up(prec + 4);
    return {lo, hi};
}

namespace detail {

inline Dyadic ipow(const Dyadic& x, unsigned long p) {
    Dyadic r = 1, b = x;
    while (p) {
        if (p & 1) r = r * b;
        b = b * b;
        p >>= 1;
    }
    return r;
}

inline DyadInterval ipow(const DyadInterval& a, unsigned long p) {
    if (p == 0) return Dyadic(1);
    Dyadic l = ipow(a.lo(), p), h = ipow(a.hi(), p);
    if (p % 2 == 1 || a.lo().sign() >= 0) return {l, h};
    if (a.hi().sign() <= 0) return {h, l};
    return {Dyadic(0), std::max(l, h)};
}

// Exact q-th root of a nonnegative dyadic when one exists.
inline std::optional<Dyadic> exact_root(const Dyadic& x, unsigned long q) {
    if (x.sign() == 0) return Dyadic(0);
    if (x.sign() < 0) return std::nullopt;
    long e = x.exp();
    if (e % static_cast<long>(q) != 0) return std::nullopt;
    Nat r;
    if (!mpz_root(r.get_mpz_t(), x.mant().get_mpz_t(), q)) return std::nullopt;
    return Dyadic(r, e / static_cast<long>(q));
}

// q-th root of a nonnegative dyadic, bracketed to 2^-prec by bisection.
inline DyadInterval root_point(const Dyadic& x, unsigned long q, long prec) {
    if (auto r = exact_root(x, q)) return *r;
    Nat scaled_lo = x.shifted(static_cast<long>(q) * prec).floor();
    Nat r;
    mpz_root(r.get_mpz_t(), scaled_lo.get_mpz_t(), q);
    return {Dyadic(r, -prec), Dyadic(r + 1, -prec)};
}

}  // namespace detail

// a^r for rational r; outward rounded.
inline DyadInterval iv_pow(const DyadInterval& a, const Rat& r, long prec = default_prec) {
    if (sgn(r) == 0) return Dyadic(1);
    Nat p = r.get_num(), q = r.get_den();
    bool neg = sgn(p) < 0;
    if (neg) p = -p;
    if (q != 1 && a.lo().sign() < 0) throw domain_error("negative base with fractional exponent");
    if (!p.fits_ulong_p() || !q.fits_ulong_p()) throw domain_error("exponent too large");
    unsigned long pu = p.get_ui(), qu = q.get_ui();
    DyadInterval out;
    if (qu == 1) {
        out = detail::ipow(a, pu);
    } else if (qu <= 4096 && pu <= 4096) {
        long work = prec + 8;
        DyadInterval lo = detail::root_point(detail::ipow(a.lo(), pu), qu, work);
        DyadInterval hi = detail::root_point(detail::ipow(a.hi(), pu), qu, work);
        out = DyadInterval(lo.lo(), hi.hi());
    } else {
        if (a.lo().sign() == 0) {
            DyadInterval hi = iv_exp2(iv_log2(DyadInterval(a.hi()), prec + 8) * DyadInterval::of(make_rat(p, q), prec + 8), prec + 8);
            out = DyadInterval(Dyadic(0), hi.hi());
        } else {
            out = iv_exp2(iv_log2(a, prec + 8) * DyadInterval::of(make_rat(p, q), prec + 8), prec + 8);
        }
    }
    if (neg) out = iv_reciprocal(out, prec + 4);
    return out;
}

// Real numbers given by nested brackets of width <= 2^-k.
class RealBracket {
  public:
    using Refine = std::function<DyadInterval(long k)>;

    RealBracket() : RealBracket([](long) { return DyadInterval(0); }) {}
    explicit RealBracket(Refine r) : st_(std::make_shared<State>()) { st_->refine = std::move(r); }

    static RealBracket constant(const Rat& q) {
        return RealBracket([q](long k) { return DyadInterval::of(q, k + 1); });
    }

    DyadInterval at(long k) const {
        std::lock_guard<std::mutex> lk(st_->mu);
        auto& c = st_->cache;
        while (static_cast<long>(c.size()) <= k) {
            long j = static_cast<long>(c.size());
            DyadInterval b = st_->refine(j);
            if (!b.width_le(j)) throw domain_error("bracket refinement wider than 2^-" + std::to_string(j));
            if (!c.empty()) {
                auto m = intersect(b, c.back());
                if (!m) throw domain_error("bracket refinements are disjoint");
                b = *m;
            }
            c.push_back(b);
        }
        return c[k];
    }

  private:
    struct State {
        Refine refine;
        std::mutex mu;
        std::vector<DyadInterval> cache;
    };
    std::shared_ptr<State> st_;
};

inline DyadInterval bracket_eval(const RealBracket& r, long k) { return r.at(k); }

// ln 2 = sum_{j>=1} 1/(j 2^j); the tail past J is below 1/((J+1) 2^J).
inline DyadInterval ln2_interval(long prec) {
    long J = prec + 4;
    long work = prec + 16;
    Dyadic lo = 0, hi = 0;
    for (long j = 1; j <= J; ++j) {
        Rat t = make_rat(1, Nat(j) * pow2(j));
        lo = lo + Dyadic::round_down(t, work);
        hi = hi + Dyadic::round_up(t, work);
    }
    hi = hi + Dyadic::round_up(make_rat(1, Nat(J + 1) * pow2(J)), work);
    return {lo, hi};
}

// Decide a < b, a > b, or exact equality, escalating precision of both sides.
// Returns -1, 0, 1; throws indeterminate at the cap.
template <class F, class G>
int compare_reals(F&& a, G&& b, long start = 32, long cap = precision_cap) {
    for (long p = start;; p *= 2) {
        if (p > cap) p = cap;
        DyadInterval x = a(p), y = b(p);
        if (x.hi() < y.lo()) return -1;
        if (y.hi() < x.lo()) return 1;
        if (x.is_point() && y.is_point() && x.lo() == y.lo()) return 0;
        if (p >= cap) throw indeterminate("comparison unresolved at precision cap");
    }
}

}  // namespace avlab
