#pragma once
// Exponent algebra behind the choice of h from j: K, L, H and their ratios
// k, l, h as powers of two, the (*)(g,f) regularity ratio, and the
// supermartingale budget bound on heavy children.

#include "order_fn.hpp"
#include "encodings.hpp"

#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace avlab {

// sum_i r_i * prod_j log2(p_ij) over odd primes p_ij. The logs are treated as
// independent indeterminates, so two equal forms denote equal reals.
class LogPoly {
  public:
    using Mono = std::vector<Nat>;  // sorted, with repetition

    LogPoly() = default;
    LogPoly(const Rat& c) {
        if (sgn(c) != 0) t_[{}] = c;
    }
    LogPoly(long c) : LogPoly(Rat(c)) {}

    // log2 q for q > 0; absent when a cofactor resists trial division.
    static std::optional<LogPoly> log2_of(const Rat& q) {
        if (sgn(q) <= 0) throw domain_error("log2 of a nonpositive rational");
        LogPoly out;
        auto add = [&](Nat m, long sign) -> bool {
            std::size_t z = trailing_zeros(m);
            m >>= z;
            out = out + LogPoly(Rat(sign * static_cast<long>(z)));
            for (unsigned long p = 3; m > 1 && p < 100000; p += 2) {
                long e = 0;
                while (m % p == 0) {
                    m /= p;
                    ++e;
                }
                if (e) out = out + LogPoly::atom(Nat(p)) * LogPoly(Rat(sign * e));
            }
            if (m > 1) {
                if (mpz_probab_prime_p(m.get_mpz_t(), 30) == 0) return false;
                out = out + LogPoly::atom(m) * LogPoly(Rat(sign));
            }
            return true;
        };
        if (!add(q.get_num(), 1) || !add(q.get_den(), -1)) return std::nullopt;
        return out;
    }

    bool is_zero() const { return t_.empty(); }
    bool is_const() const { return t_.empty() || (t_.size() == 1 && t_.begin()->first.empty()); }
    Rat constant() const {
        auto it = t_.find({});
        return it == t_.end() ? Rat(0) : it->second;
    }

    friend LogPoly operator+(const LogPoly& a, const LogPoly& b) {
        LogPoly r = a;
        for (auto& [m, c] : b.t_) r.bump(m, c);
        return r;
    }
    friend LogPoly operator-(const LogPoly& a) {
        LogPoly r = a;
        for (auto& kv : r.t_) kv.second = -kv.second;
        return r;
    }
    friend LogPoly operator-(const LogPoly& a, const LogPoly& b) { return a + (-b); }
    friend LogPoly operator*(const LogPoly& a, const LogPoly& b) {
        LogPoly r;
        for (auto& [m1, c1] : a.t_)
            for (auto& [m2, c2] : b.t_) {
                Mono m = m1;
                m.insert(m.end(), m2.begin(), m2.end());
                std::sort(m.begin(), m.end());
                r.bump(m, c1 * c2);
            }
        return r;
    }
    friend bool operator==(const LogPoly& a, const LogPoly& b) { return (a - b).is_zero(); }

    DyadInterval eval(long w) const {
        DyadInterval s = Dyadic(0);
        for (auto& [m, c] : t_) {
            DyadInterval term = DyadInterval::of(c, w);
            for (auto& p : m) term = term * iv_log2(DyadInterval(Dyadic(p)), w);
            s = s + term;
        }
        return s;
    }

    // Exact when constant; otherwise by precision escalation (nonzero forms
    // are nonzero reals only if the logs are independent, so a zero-width
    // escape is reported as indeterminate rather than guessed).
    int sign() const {
        if (is_const()) return sgn(constant());
        return compare_reals([&](long p) { return eval(p); }, [](long) { return DyadInterval(Dyadic(0)); });
    }

    std::string str() const {
        if (t_.empty()) return "0";
        std::ostringstream os;
        bool first = true;
        for (auto& [m, c] : t_) {
            if (!first) os << " + ";
            first = false;
            os << c.get_str();
            for (auto& p : m) os << "*lg" << p.get_str();
        }
        return os.str();
    }

  private:
    static LogPoly atom(const Nat& p) {
        LogPoly r;
        r.t_[{p}] = 1;
        return r;
    }
    void bump(const Mono& m, const Rat& c) {
        Rat& v = t_[m];
        v += c;
        if (sgn(v) == 0) t_.erase(m);
    }
    std::map<Mono, Rat> t_;
};

namespace detail {

inline std::optional<Rat> exact_rational_root(const Rat& q, const Rat& alpha) {
    // q^(p/r) with an exact r-th root of numerator and denominator.
    if (alpha.get_den() != 1 && sgn(q) < 0) return std::nullopt;
    unsigned long r = alpha.get_den().get_ui();
    long p = alpha.get_num().get_si();
    Nat a, b;
    if (!mpz_root(a.get_mpz_t(), Nat(abs(q.get_num())).get_mpz_t(), r)) return std::nullopt;
    if (!mpz_root(b.get_mpz_t(), q.get_den().get_mpz_t(), r)) return std::nullopt;
    if (sgn(q) < 0) a = -a;
    Rat root = make_rat(a, b);
    if (p < 0 && sgn(root) == 0) return std::nullopt;
    Rat out = 1;
    Rat base = p < 0 ? 1 / root : root;
    for (long i = 0; i < std::abs(p); ++i) out *= base;
    return out;
}

inline std::optional<Nat> as_natural(const std::optional<LogPoly>& v) {
    if (!v || !v->is_const()) return std::nullopt;
    Rat c = v->constant();
    if (c.get_den() != 1 || sgn(c) < 0) return std::nullopt;
    return c.get_num();
}

}  // namespace detail

// f(n) as an exact form, when every node on the way stays exact.
inline std::optional<LogPoly> symbolic_at(const OrderFn& f, const Nat& n) {
    const auto& k = f.children();
    auto constant_of = [](const std::optional<LogPoly>& v) -> std::optional<Rat> {
        if (!v || !v->is_const()) return std::nullopt;
        return v->constant();
    };
    switch (f.kind()) {
        case FnKind::Const: return LogPoly(f.param());
        case FnKind::Identity: return LogPoly(Rat(n));
        case FnKind::Affine: {
            auto v = symbolic_at(k[0], n);
            if (!v) return std::nullopt;
            return LogPoly(f.param()) * *v + LogPoly(f.param_b());
        }
        case FnKind::Add:
        case FnKind::Mul: {
            auto a = symbolic_at(k[0], n), b = symbolic_at(k[1], n);
            if (!a || !b) return std::nullopt;
            return f.kind() == FnKind::Add ? *a + *b : *a * *b;
        }
        case FnKind::Compose: {
            auto m = detail::as_natural(symbolic_at(k[1], n));
            if (!m) return std::nullopt;
            return symbolic_at(k[0], *m);
        }
        case FnKind::Max:
        case FnKind::Min: {
            auto a = constant_of(symbolic_at(k[0], n)), b = constant_of(symbolic_at(k[1], n));
            if (!a || !b) return std::nullopt;
            return LogPoly(f.kind() == FnKind::Max ? std::max(*a, *b) : std::min(*a, *b));
        }
        case FnKind::Pow: {
            auto v = symbolic_at(k[0], n);
            if (!v) return std::nullopt;
            if (v->is_const()) {
                auto r = detail::exact_rational_root(v->constant(), f.param());
                if (r) return LogPoly(*r);
                return std::nullopt;
            }
            if (f.param().get_den() != 1 || sgn(f.param()) < 0 || f.param() > 64) return std::nullopt;
            LogPoly out(1);
            for (long i = 0; i < f.param().get_num().get_si(); ++i) out = out * *v;
            return out;
        }
        case FnKind::Log2: {
            auto c = constant_of(symbolic_at(k[0], n));
            if (!c || sgn(*c) <= 0) return std::nullopt;
            return LogPoly::log2_of(*c);
        }
        case FnKind::Exp2: {
            auto c = constant_of(symbolic_at(k[0], n));
            if (!c || c->get_den() != 1 || abs(c->get_num()) > 1 << 20) return std::nullopt;
            long e = c->get_num().get_si();
            return LogPoly(e >= 0 ? Rat(pow2(static_cast<unsigned long>(e))) : make_rat(1, pow2(static_cast<unsigned long>(-e))));
        }
        case FnKind::Floor:
        case FnKind::Ceil: {
            auto c = constant_of(symbolic_at(k[0], n));
            if (!c) return std::nullopt;
            return LogPoly(Rat(f.kind() == FnKind::Floor ? rat_floor(*c) : rat_ceil(*c)));
        }
        case FnKind::Geom: {
            if (!n.fits_ulong_p() || n > 1 << 16) return std::nullopt;
            Rat v = 1;
            for (unsigned long i = 0; i < n.get_ui(); ++i) v *= f.param();
            return LogPoly(v);
        }
        case FnKind::Table:
            if (n < f.table_values().size()) return LogPoly(f.table_values()[n.get_ui()]);
            return symbolic_at(k[0], n);
        case FnKind::PiecewiseLinearExt: return symbolic_at(k[0], n);
        default: return std::nullopt;
    }
}

// A quantity kept exactly when possible and always as an interval.
struct Exact {
    std::optional<LogPoly> sym;
    DyadInterval iv;
};

namespace detail {

inline Exact exact_at(const OrderFn& f, const Nat& n, long w) {
    return {symbolic_at(f, n), f.eval_raw(n, w)};
}

inline Exact exact_real_at(const OrderFn& f, const Exact& x, long w) {
    if (auto m = as_natural(x.sym)) return exact_at(f, *m, w);
    if (x.iv.is_point() && x.iv.lo().sign() >= 0 && Dyadic(x.iv.lo().floor()) == x.iv.lo()) return {std::nullopt, f.eval_raw(x.iv.lo().floor(), w)};
    return {std::nullopt, f.eval_real(x.iv, w)};
}

inline Exact lift(const LogPoly& p, long w) { return {p, p.eval(w)}; }

inline Exact combine(const Exact& a, const Exact& b, char op, long w) {
    Exact r;
    if (a.sym && b.sym) {
        if (op == '+') r.sym = *a.sym + *b.sym;
        if (op == '-') r.sym = *a.sym - *b.sym;
        if (op == '*') r.sym = *a.sym * *b.sym;
    }
    if (op == '/') {
        if (a.sym && b.sym && b.sym->is_const() && sgn(b.sym->constant()) != 0)
            r.sym = *a.sym * LogPoly(1 / b.sym->constant());
        r.iv = iv_div(a.iv, b.iv, w);
        if (r.sym) r.iv = r.sym->eval(w);
        return r;
    }
    r.iv = r.sym ? r.sym->eval(w) : op == '+' ? a.iv + b.iv : op == '-' ? a.iv - b.iv : a.iv * b.iv;
    return r;
}

inline int sign_of(const Exact& e) {
    if (e.sym) return e.sym->sign();
    if (e.iv.lo().sign() > 0) return 1;
    if (e.iv.hi().sign() < 0) return -1;
    if (e.iv.is_point()) return 0;
    throw indeterminate("sign of an interval straddling 0");
}

}  // namespace detail

// log2 |h^n| as a function of n. From s: n * s(n). From a bound family: exact.
struct LevelLog {
    std::function<Exact(std::size_t n, long w)> at;

    static LevelLog from_s(const OrderFn& s) {
        return {[s](std::size_t n, long w) {
            if (n == 0) return Exact{LogPoly(0), DyadInterval(0)};
            Nat nn(static_cast<unsigned long>(n));
            return detail::combine(detail::exact_at(s, nn, w), detail::lift(LogPoly(Rat(nn)), w), '*', w);
        }};
    }
    static LevelLog from_family(const BoundFamily& h) {
        return {[h](std::size_t n, long w) {
            Nat H = h.level_size(n);
            Exact e;
            e.sym = LogPoly::log2_of(Rat(H));
            e.iv = e.sym ? e.sym->eval(w) : iv_log2(DyadInterval(Dyadic(H)), w);
            return e;
        }};
    }
};

// log2 of the (*)(g,f) ratio at n >= 1:
//   log2 h(n-1) * (1 - f(L)/L) - (s(n) g(n) - f(L)),  L = n s(n) = log2|h^n|.
inline Exact star_log_ratio(const OrderFn& g, const OrderFn& f, const LevelLog& lv, std::size_t n, long w) {
    using detail::combine;
    if (n == 0) throw precondition_error("the (*) ratio starts at n = 1");
    Exact L = lv.at(n, w), Lp = lv.at(n - 1, w);
    Exact lh = combine(L, Lp, '-', w);
    Exact fL = detail::exact_real_at(f, L, w);
    Nat nn(static_cast<unsigned long>(n));
    Exact sg = combine(combine(L, detail::lift(LogPoly(Rat(nn)), w), '/', w), detail::exact_at(g, nn, w), '*', w);
    Exact one = detail::lift(LogPoly(1), w);
    return combine(combine(lh, combine(one, combine(fL, L, '/', w), '-', w), '*', w), combine(sg, fL, '-', w), '-', w);
}

struct StarReport {
    DyadInterval sup;  // of the ratio itself over 1 <= n <= N
    std::size_t argmax = 1;
    std::size_t horizon = 0;
    std::vector<DyadInterval> log_ratio;  // index n-1
};

// Finite surrogate for the sup in (*)(g,f); nothing is claimed past N.
inline StarReport star_condition(const OrderFn& g, const OrderFn& f, const LevelLog& lv, std::size_t N, long prec = 32) {
    if (N == 0) throw precondition_error("star_condition needs N >= 1");
    StarReport r;
    r.horizon = N;
    long w = prec + 16;
    for (std::size_t n = 1; n <= N; ++n) {
        DyadInterval lr = star_log_ratio(g, f, lv, n, w).iv;
        r.log_ratio.push_back(lr);
        if (n == 1 || lr.hi() > r.log_ratio[r.argmax - 1].hi()) r.argmax = n;
    }
    DyadInterval best = r.log_ratio[0];
    for (auto& v : r.log_ratio) best = iv_max(best, v);
    r.sup = iv_exp2(best, w);
    return r;
}

inline StarReport star_condition(const OrderFn& g, const OrderFn& f, const OrderFn& s, std::size_t N, long prec = 32) {
    return star_condition(g, f, LevelLog::from_s(s), N, prec);
}

// f(n) = n - j(n) and g(n) = n - (1-eps) j(n s(n)) / s(n).
inline OrderFn gm_f(const OrderFn& j) { return OrderFn::sub(OrderFn::identity(), j); }

inline OrderFn gm_g(const OrderFn& j, const OrderFn& s, const Rat& eps) {
    OrderFn js = OrderFn::compose(j, OrderFn::mul(s, OrderFn::identity()));
    OrderFn jt = OrderFn::affine(1 - eps, 0, OrderFn::mul(js, OrderFn::pow(s, -1)));
    return OrderFn::sub(OrderFn::identity(), jt);
}

struct condition_error : precondition_error {
    std::size_t n;
    condition_error(const std::string& w, std::size_t at) : precondition_error(w + " at n=" + std::to_string(at)), n(at) {}
};

// One row of the algebra; every log is base 2.
struct GMRow {
    std::size_t n = 0;
    Exact s, jt, g;
    Exact logK, logL, logH;  // s g, s jt, s n
    Exact logk, logl, logh;  // forward differences
    Nat h;                   // 2^logh, integral by hypothesis (i)
    bool at_least_one = true;  // k(n), l(n) >= 1
    bool exact = false;      // identities decided symbolically
    bool hkl_identity = false;   // log H = log K + log L
    bool criterion_identity = false;  // log L * g = log K * (n - g)
    Exact star_log;          // ((1-eps) - ((n-1)/n)(s(n-1)/s(n))) j(n s(n)), n >= 1
};

struct GMAlgebra {
    OrderFn j, s;
    Rat eps;
    std::vector<GMRow> rows;  // n = 0..N
    std::optional<std::size_t> star_threshold;  // least T with star_log < 0 on [T, N]
    std::vector<std::size_t> below_one;  // n with k(n) < 1 or l(n) < 1 (g not yet nondecreasing)

    BoundFamily h_family() const {
        std::vector<Nat> t;
        for (std::size_t i = 0; i + 1 < rows.size(); ++i) t.push_back(rows[i].h);
        return BoundFamily::table(std::move(t));
    }
};

inline GMAlgebra gm_algebra(const OrderFn& j, const OrderFn& s, const Rat& eps, std::size_t N, long prec = 48) {
    using detail::combine;
    using detail::lift;
    if (sgn(eps) <= 0 || eps >= 1) throw precondition_error("epsilon must lie in (0,1)");
    long w = prec + 16;
    GMAlgebra A{j, s, eps, {}, std::nullopt, {}};
    // Columns up to N+1 so that the differences at N exist.
    struct Col {
        Exact s, J, jt, g, logK, logL, logH;
    };
    std::vector<Col> col;
    for (std::size_t n = 0; n <= N + 1; ++n) {
        Nat nn(static_cast<unsigned long>(n));
        Col c;
        c.s = detail::exact_at(s, nn, w);
        if (n == 0) {
            // Empty products: K(0) = L(0) = H(0) = 1.
            Exact z = lift(LogPoly(0), w);
            c.J = c.jt = c.g = c.logK = c.logL = c.logH = z;
        } else {
            if (detail::sign_of(c.s) <= 0) throw condition_error("s must be positive", n);
            Exact N_ = lift(LogPoly(Rat(nn)), w);
            c.J = detail::exact_real_at(j, combine(c.s, N_, '*', w), w);
            c.jt = combine(combine(lift(LogPoly(1 - eps), w), c.J, '*', w), c.s, '/', w);
            c.g = combine(N_, c.jt, '-', w);
            c.logK = combine(c.s, c.g, '*', w);
            c.logL = combine(c.s, c.jt, '*', w);
            c.logH = combine(c.s, N_, '*', w);
        }
        col.push_back(std::move(c));
    }
    for (std::size_t n = 0; n <= N; ++n) {
        GMRow r;
        r.n = n;
        const Col &c = col[n], &d = col[n + 1];
        r.s = c.s;
        r.jt = c.jt;
        r.g = c.g;
        r.logK = c.logK;
        r.logL = c.logL;
        r.logH = c.logH;
        r.logk = combine(d.logK, c.logK, '-', w);
        r.logl = combine(d.logL, c.logL, '-', w);
        r.logh = combine(d.logH, c.logH, '-', w);
        auto hexp = detail::as_natural(r.logh.sym);
        if (!hexp) {
            const DyadInterval& v = r.logh.iv;
            if (v.is_point() && v.lo().sign() >= 0 && Dyadic(v.lo().floor()) == v.lo()) hexp = v.lo().floor();
        }
        if (!hexp) throw condition_error("h is not a power of two with natural exponent", n);
        r.h = pow2(to_size(*hexp));
        r.at_least_one = detail::sign_of(r.logk) >= 0 && detail::sign_of(r.logl) >= 0;
        if (!r.at_least_one) A.below_one.push_back(n);
        Exact Nn = lift(LogPoly(Rat(Nat(static_cast<unsigned long>(n)))), w);
        Exact d1 = combine(r.logH, combine(r.logK, r.logL, '+', w), '-', w);
        Exact d2 = combine(combine(r.logL, r.g, '*', w), combine(r.logK, combine(Nn, r.g, '-', w), '*', w), '-', w);
        r.exact = d1.sym.has_value() && d2.sym.has_value();
        if (r.exact) {
            r.hkl_identity = d1.sym->is_zero();
            r.criterion_identity = d2.sym->is_zero();
        } else {
            r.hkl_identity = d1.iv.contains(Dyadic(0));
            r.criterion_identity = d2.iv.contains(Dyadic(0));
        }
        if (n >= 1) {
            Exact ratio = n == 1 ? lift(LogPoly(0), w)
                                 : combine(lift(LogPoly(make_rat(n - 1, n)), w), combine(col[n - 1].s, c.s, '/', w), '*', w);
            Exact coef = combine(lift(LogPoly(1 - eps), w), ratio, '-', w);
            r.star_log = combine(coef, c.J, '*', w);
        }
        A.rows.push_back(std::move(r));
    }
    for (std::size_t n = N; n >= 1; --n) {
        if (detail::sign_of(A.rows[n].star_log) >= 0) break;
        A.star_threshold = n;
    }
    return A;
}

struct BudgetParams {
    std::vector<Nat> h;  // h(n) for the levels present in the table
    std::function<DyadInterval(std::size_t n, long w)> k, L;

    static BudgetParams from(const GMAlgebra& A) {
        BudgetParams p;
        std::vector<Exact> lk, lL;
        for (auto& r : A.rows) {
            p.h.push_back(r.h);
            lk.push_back(r.logk);
            lL.push_back(r.logL);
        }
        auto pw = [](std::vector<Exact> v) {
            return [v = std::move(v)](std::size_t n, long w) {
                const Exact& e = v.at(n);
                return iv_exp2(e.sym ? e.sym->eval(w) : e.iv, w);
            };
        };
        p.k = pw(std::move(lk));
        p.L = pw(std::move(lL));
        return p;
    }
};

struct BudgetReport {
    bool pass = true;
    Nats sigma;           // witness when failing
    std::size_t heavy = 0;  // children of sigma above L(|sigma|+1)
};

// Missing children count as 0. Validates sum_i d(sigma i) <= h(|sigma|) d(sigma)
// and d >= 0, then checks: d(sigma) <= L(n) => at most k(n) children exceed L(n+1).
inline BudgetReport supermartingale_budget_check(const std::map<Nats, Rat>& d, const BudgetParams& P) {
    std::map<Nats, Rat> child_sum;
    for (auto& [tau, v] : d) {
        if (sgn(v) < 0) throw precondition_error("negative value at " + show(tau));
        if (tau.size() > P.h.size()) throw precondition_error("table deeper than the supplied h");
        if (tau.empty()) continue;
        if (tau.back() >= P.h[tau.size() - 1]) throw domain_error(show(tau) + " outside the alphabet bound");
        child_sum[Nats(tau.begin(), tau.end() - 1)] += v;
    }
    for (auto& [sigma, sum] : child_sum) {
        auto it = d.find(sigma);
        Rat parent = it == d.end() ? Rat(0) : it->second;
        if (sum > Rat(P.h[sigma.size()]) * parent) throw precondition_error("not a supermartingale at " + show(sigma));
    }
    auto le = [](const Rat& x, const std::function<DyadInterval(long)>& y) {
        return compare_reals([&](long p) { return DyadInterval::of(x, p); }, y) <= 0;
    };
    BudgetReport r;
    for (auto& [sigma, v] : d) {
        std::size_t n = sigma.size();
        if (!le(v, [&](long w) { return P.L(n, w); })) continue;
        std::size_t heavy = 0;
        for (auto it = d.upper_bound(sigma); it != d.end() && is_prefix_of(sigma, it->first); ++it)
            if (it->first.size() == n + 1 && !le(it->second, [&](long w) { return P.L(n + 1, w); })) ++heavy;
        bool over = compare_reals([&](long) { return DyadInterval(Dyadic(Nat(static_cast<unsigned long>(heavy)))); },
                                  [&](long w) { return P.k(n, w); }) > 0;
        if (over) return {false, sigma, heavy};
    }
    return r;
}

}  // namespace avlab
