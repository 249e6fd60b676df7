#pragma once
// Symbolic order functions: expression trees evaluated to dyadic intervals,
// with structural monotonicity certificates.

#include "numerics.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace avlab {

enum class FnKind {
    Const, Identity, Affine, Add, Mul, Compose, Max, Min, Pow, Log2, Exp2,
    Floor, Ceil, LogPowerProduct, Geom, Table, Inverse, PiecewiseLinearExt, Custom
};

struct Props {
    bool mono = false;  // nondecreasing on N
    bool nonneg = false;
    bool unbounded = false;
};

// Custom nodes evaluate themselves; the series constructions use them to
// extend a table on demand.
using CustomEval = std::function<DyadInterval(const Nat& n, long prec)>;
// Optional bracket of sum_{n>=K} 1/f(n); empty when K is too small to certify.
using TailOracle = std::function<std::optional<DyadInterval>(const Nat& K, long prec)>;

class OrderFn;

struct FnNode {
    FnKind kind = FnKind::Identity;
    std::vector<OrderFn> kids;
    Rat a = 0, b = 0;  // constant / affine a,b / exponent / base
    unsigned k = 0;
    std::vector<Rat> table;
    std::string name;
    CustomEval custom;
    TailOracle tail;
    Props props;
};

inline Nat tetration2(unsigned k) {
    Nat r = 1;
    for (unsigned i = 0; i < k; ++i) {
        if (r > 4096) throw domain_error("tetration too large");
        r = pow2(r.get_ui());
    }
    return r;
}

class OrderFn {
  public:
    OrderFn() : OrderFn(identity()) {}
    explicit OrderFn(std::shared_ptr<const FnNode> n) : node_(std::move(n)) {}

    static OrderFn constant(const Rat& q) {
        FnNode n;
        n.kind = FnKind::Const;
        n.a = q;
        n.props = {true, sgn(q) >= 0, false};
        return wrap(std::move(n));
    }
    static OrderFn identity() {
        FnNode n;
        n.kind = FnKind::Identity;
        n.props = {true, true, true};
        return wrap(std::move(n));
    }
    // a*f + b
    static OrderFn affine(const Rat& a, const Rat& b, const OrderFn& f) {
        FnNode n;
        n.kind = FnKind::Affine;
        n.a = a;
        n.b = b;
        n.kids = {f};
        const Props& p = f.props();
        n.props.mono = sgn(a) == 0 || (sgn(a) > 0 && p.mono);
        n.props.nonneg = sgn(a) >= 0 && sgn(b) >= 0 && (p.nonneg || sgn(a) == 0);
        n.props.unbounded = sgn(a) > 0 && p.mono && p.unbounded;
        return wrap(std::move(n));
    }
    static OrderFn add(const OrderFn& f, const OrderFn& g) {
        auto n = binary(FnKind::Add, f, g);
        const Props &p = f.props(), &q = g.props();
        n.props.mono = p.mono && q.mono;
        n.props.nonneg = p.nonneg && q.nonneg;
        n.props.unbounded = n.props.mono && (p.unbounded || q.unbounded);
        return wrap(std::move(n));
    }
    static OrderFn sub(const OrderFn& f, const OrderFn& g) { return add(f, affine(-1, 0, g)); }
    static OrderFn mul(const OrderFn& f, const OrderFn& g) {
        auto n = binary(FnKind::Mul, f, g);
        const Props &p = f.props(), &q = g.props();
        n.props.mono = p.mono && q.mono && p.nonneg && q.nonneg;
        n.props.nonneg = p.nonneg && q.nonneg;
        n.props.unbounded = n.props.mono && p.unbounded && q.unbounded;
        return wrap(std::move(n));
    }
    // f(g(n)), with f extended piecewise linearly off the integers.
    static OrderFn compose(const OrderFn& f, const OrderFn& g) {
        auto n = binary(FnKind::Compose, f, g);
        const Props &p = f.props(), &q = g.props();
        n.props.mono = p.mono && q.mono && q.nonneg;
        n.props.nonneg = p.nonneg && q.nonneg;
        n.props.unbounded = n.props.mono && p.unbounded && q.unbounded;
        return wrap(std::move(n));
    }
    static OrderFn max(const OrderFn& f, const OrderFn& g) {
        auto n = binary(FnKind::Max, f, g);
        const Props &p = f.props(), &q = g.props();
        n.props.mono = p.mono && q.mono;
        n.props.nonneg = p.nonneg || q.nonneg;
        n.props.unbounded = n.props.mono && (p.unbounded || q.unbounded);
        return wrap(std::move(n));
    }
    static OrderFn min(const OrderFn& f, const OrderFn& g) {
        auto n = binary(FnKind::Min, f, g);
        const Props &p = f.props(), &q = g.props();
        n.props.mono = p.mono && q.mono;
        n.props.nonneg = p.nonneg && q.nonneg;
        n.props.unbounded = n.props.mono && p.unbounded && q.unbounded;
        return wrap(std::move(n));
    }
    static OrderFn pow(const OrderFn& f, const Rat& alpha) {
        FnNode n;
        n.kind = FnKind::Pow;
        n.a = alpha;
        n.kids = {f};
        const Props& p = f.props();
        n.props.mono = sgn(alpha) == 0 || (sgn(alpha) > 0 && p.mono && p.nonneg);
        n.props.nonneg = p.nonneg || sgn(alpha) == 0 || alpha.get_den() != 1;
        n.props.unbounded = sgn(alpha) > 0 && n.props.mono && p.unbounded;
        return wrap(std::move(n));
    }
    static OrderFn log2(const OrderFn& f) {
        auto n = unary(FnKind::Log2, f);
        n.props.mono = f.props().mono;
        n.props.nonneg = false;
        n.props.unbounded = f.props().mono && f.props().unbounded;
        return wrap(std::move(n));
    }
    static OrderFn exp2(const OrderFn& f) {
        auto n = unary(FnKind::Exp2, f);
        n.props = {f.props().mono, true, f.props().mono && f.props().unbounded};
        return wrap(std::move(n));
    }
    static OrderFn floor(const OrderFn& f) {
        auto n = unary(FnKind::Floor, f);
        n.props = f.props();
        return wrap(std::move(n));
    }
    static OrderFn ceil(const OrderFn& f) {
        auto n = unary(FnKind::Ceil, f);
        n.props = f.props();
        return wrap(std::move(n));
    }
    // n log n ... log^(k-1) n (log^k n)^alpha for n >= ^k 2; frozen below.
    static OrderFn log_power_product(unsigned k, const Rat& alpha) {
        if (sgn(alpha) <= 0) throw domain_error("log-power exponent must be positive");
        FnNode n;
        n.kind = FnKind::LogPowerProduct;
        n.k = k;
        n.a = alpha;
        n.props = {true, true, true};
        tetration2(k);
        return wrap(std::move(n));
    }
    static OrderFn geom(const Rat& r) {
        if (r <= 1) throw domain_error("geometric base must exceed 1");
        FnNode n;
        n.kind = FnKind::Geom;
        n.a = r;
        n.props = {true, true, true};
        return wrap(std::move(n));
    }
    // values[0..len) then tail(n) for n >= len. The tail must be unbounded.
    static OrderFn table(std::vector<Rat> values, const OrderFn& tail) {
        if (!tail.props().unbounded) throw precondition_error("table tail rule must be certified unbounded");
        FnNode n;
        n.kind = FnKind::Table;
        n.table = std::move(values);
        n.kids = {tail};
        bool mono = tail.props().mono;
        for (std::size_t i = 1; i < n.table.size(); ++i) mono = mono && n.table[i - 1] <= n.table[i];
        bool nonneg = tail.props().nonneg;
        for (auto& v : n.table) nonneg = nonneg && sgn(v) >= 0;
        n.props = {mono, nonneg, true};
        OrderFn out = wrap(std::move(n));
        // The seam is part of the structural claim.
        if (mono && !out.node_->table.empty()) {
            std::size_t len = out.node_->table.size();
            DyadInterval t = tail.eval_raw(Nat(static_cast<unsigned long>(len)), 64);
            if (t.lo().rat() < out.node_->table.back()) {
                auto nn = *out.node_;
                nn.props.mono = false;
                out = wrap(std::move(nn));
            }
        }
        return out;
    }
    static OrderFn inverse(const OrderFn& f) {
        auto n = unary(FnKind::Inverse, f);
        n.props = {f.props().mono && f.props().unbounded, true, f.props().mono && f.props().unbounded};
        return wrap(std::move(n));
    }
    static OrderFn pl_ext(const OrderFn& f) {
        auto n = unary(FnKind::PiecewiseLinearExt, f);
        n.props = f.props();
        return wrap(std::move(n));
    }
    static OrderFn custom(std::string name, CustomEval ev, Props p, TailOracle tail = {}) {
        FnNode n;
        n.tail = std::move(tail);
        n.kind = FnKind::Custom;
        n.name = std::move(name);
        n.custom = std::move(ev);
        n.props = p;
        return wrap(std::move(n));
    }

    FnKind kind() const { return node_->kind; }
    const Props& props() const { return node_->props; }
    unsigned lpp_k() const { return node_->k; }
    const Rat& param() const { return node_->a; }
    const Rat& param_b() const { return node_->b; }
    const std::vector<OrderFn>& children() const { return node_->kids; }
    const std::vector<Rat>& table_values() const { return node_->table; }
    const TailOracle& tail_oracle() const { return node_->tail; }
    // Same function by construction: shared node, or equal printed form with no opaque parts.
    bool same_as(const OrderFn& o) const {
        if (node_ == o.node_) return true;
        std::string a = str();
        return a.find('<') == std::string::npos && a == o.str();
    }

    std::string str() const;
    DyadInterval eval_raw(const Nat& n, long w) const;
    DyadInterval eval_real(const DyadInterval& x, long w) const;
    // f(n) as a rational when it is one for structural reasons; lets
    // comparisons at exact ties terminate.
    std::optional<Rat> exact_at(const Nat& n) const;

  private:
    static OrderFn wrap(FnNode n) { return OrderFn(std::make_shared<const FnNode>(std::move(n))); }
    static FnNode unary(FnKind k, const OrderFn& f) {
        FnNode n;
        n.kind = k;
        n.kids = {f};
        return n;
    }
    static FnNode binary(FnKind k, const OrderFn& f, const OrderFn& g) {
        FnNode n;
        n.kind = k;
        n.kids = {f, g};
        return n;
    }
    std::shared_ptr<const FnNode> node_;
};

inline std::string OrderFn::str() const {
    const FnNode& n = *node_;
    auto kid = [&](std::size_t i) { return n.kids[i].str(); };
    switch (n.kind) {
        case FnKind::Const: return "const " + n.a.get_str();
        case FnKind::Identity: return "id";
        case FnKind::Affine: return "affine " + n.a.get_str() + " " + n.b.get_str() + " " + kid(0);
        case FnKind::Add: return "add " + kid(0) + " " + kid(1);
        case FnKind::Mul: return "mul " + kid(0) + " " + kid(1);
        case FnKind::Compose: return "compose " + kid(0) + " " + kid(1);
        case FnKind::Max: return "max " + kid(0) + " " + kid(1);
        case FnKind::Min: return "min " + kid(0) + " " + kid(1);
        case FnKind::Pow: return "pow " + n.a.get_str() + " " + kid(0);
        case FnKind::Log2: return "log2 " + kid(0);
        case FnKind::Exp2: return "exp2 " + kid(0);
        case FnKind::Floor: return "floor " + kid(0);
        case FnKind::Ceil: return "ceil " + kid(0);
        case FnKind::LogPowerProduct: return "logpow k=" + std::to_string(n.k) + " a=" + n.a.get_str();
        case FnKind::Geom: return "geom " + n.a.get_str();
        case FnKind::Table: {
            std::string s = "table [";
            for (std::size_t i = 0; i < n.table.size(); ++i) s += (i ? " " : "") + n.table[i].get_str();
            return s + "] " + kid(0);
        }
        case FnKind::Inverse: return "inv " + kid(0);
        case FnKind::PiecewiseLinearExt: return "pl " + kid(0);
        case FnKind::Custom: return "<" + n.name + ">";
    }
    return "?";
}

namespace detail {

inline DyadInterval lpp_eval(unsigned k, const Rat& alpha, Nat n, long w) {
    Nat base = tetration2(k);
    if (n < base) n = base;
    DyadInterval L = Dyadic(n);
    DyadInterval prod = Dyadic(1);
    for (unsigned i = 0; i < k; ++i) {
        prod = prod * L;
        L = iv_log2(L, w);
    }
    return prod * iv_pow(L, alpha, w);
}

}  // namespace detail

inline DyadInterval OrderFn::eval_raw(const Nat& n, long w) const {
    const FnNode& f = *node_;
    switch (f.kind) {
        case FnKind::Const: return DyadInterval::of(f.a, w);
        case FnKind::Identity: return Dyadic(n);
        case FnKind::Affine:
            return DyadInterval::of(f.a, w) * f.kids[0].eval_raw(n, w) + DyadInterval::of(f.b, w);
        case FnKind::Add: return f.kids[0].eval_raw(n, w) + f.kids[1].eval_raw(n, w);
        case FnKind::Mul: return f.kids[0].eval_raw(n, w) * f.kids[1].eval_raw(n, w);
        case FnKind::Compose: {
            DyadInterval inner = f.kids[1].eval_raw(n, w);
            if (inner.is_point() && inner.lo().is_integer()) {
                if (inner.lo().sign() < 0) throw domain_error("composition at a negative argument");
                return f.kids[0].eval_raw(inner.lo().floor(), w);
            }
            return f.kids[0].eval_real(inner, w);
        }
        case FnKind::Max: return iv_max(f.kids[0].eval_raw(n, w), f.kids[1].eval_raw(n, w));
        case FnKind::Min: return iv_min(f.kids[0].eval_raw(n, w), f.kids[1].eval_raw(n, w));
        case FnKind::Pow: {
            DyadInterval x = f.kids[0].eval_raw(n, w);
            if (f.a.get_den() != 1 && x.lo().sign() < 0) {
                if (x.hi().sign() < 0) throw domain_error("fractional power of a negative value");
                x = DyadInterval(Dyadic(0), x.hi());
            }
            return iv_pow(x, f.a, w);
        }
        case FnKind::Log2: {
            DyadInterval x = f.kids[0].eval_raw(n, w);
            if (x.hi().sign() <= 0) throw domain_error("log2 of a nonpositive value at n=" + n.get_str());
            if (x.lo().sign() <= 0) throw indeterminate("log2 argument not separated from 0", n);
            return iv_log2(x, w);
        }
        case FnKind::Exp2: return iv_exp2(f.kids[0].eval_raw(n, w), w);
        case FnKind::Floor: return iv_floor(f.kids[0].eval_raw(n, w));
        case FnKind::Ceil: return iv_ceil(f.kids[0].eval_raw(n, w));
        case FnKind::LogPowerProduct: return detail::lpp_eval(f.k, f.a, n, w);
        case FnKind::Geom: {
            Rat r = f.a;
            Rat v = 1;
            mpz_pow_ui(v.get_num_mpz_t(), r.get_num_mpz_t(), to_size(n));
            mpz_pow_ui(v.get_den_mpz_t(), r.get_den_mpz_t(), to_size(n));
            v.canonicalize();
            return DyadInterval::of(v, w);
        }
        case FnKind::Table:
            if (n < f.table.size()) return DyadInterval::of(f.table[n.get_ui()], w);
            return f.kids[0].eval_raw(n, w);
        case FnKind::Inverse: {
            // least m with g(m) >= n
            const OrderFn& g = f.kids[0];
            auto ge = [&](const Nat& m) {
                return compare_reals([&](long p) { return g.eval_raw(m, p); },
                                     [&](long) { return DyadInterval(Dyadic(n)); }) >= 0;
            };
            Nat hi = 1;
            if (ge(0)) return Dyadic(0);
            while (!ge(hi)) {
                hi *= 2;
                if (bit_length(hi) > 4096) throw indeterminate("generalized inverse search exceeded 2^4096", n);
            }
            Nat lo = hi / 2;  // ge(lo) false (or lo = 0)
            while (hi - lo > 1) {
                Nat mid = (lo + hi) / 2;
                if (ge(mid)) hi = mid; else lo = mid;
            }
            return Dyadic(hi);
        }
        case FnKind::PiecewiseLinearExt: return f.kids[0].eval_raw(n, w);
        case FnKind::Custom: return f.custom(n, w);
    }
    throw domain_error("unknown order function node");
}

inline std::optional<Rat> OrderFn::exact_at(const Nat& n) const {
    const FnNode& f = *node_;
    auto kid = [&](std::size_t i) { return f.kids[i].exact_at(n); };
    switch (f.kind) {
        case FnKind::Const: return f.a;
        case FnKind::Identity: return Rat(n);
        case FnKind::Affine:
            if (auto x = kid(0)) return Rat(f.a * *x + f.b);
            return std::nullopt;
        case FnKind::Add:
        case FnKind::Mul:
        case FnKind::Max:
        case FnKind::Min: {
            auto x = kid(0), y = kid(1);
            if (!x || !y) return std::nullopt;
            if (f.kind == FnKind::Add) return Rat(*x + *y);
            if (f.kind == FnKind::Mul) return Rat(*x * *y);
            return f.kind == FnKind::Max ? std::max(*x, *y) : std::min(*x, *y);
        }
        case FnKind::Compose: {
            auto x = kid(1);
            if (!x || x->get_den() != 1 || sgn(*x) < 0) return std::nullopt;
            return f.kids[0].exact_at(x->get_num());
        }
        case FnKind::Floor:
        case FnKind::Ceil: {
            auto x = kid(0);
            if (!x) break;  // an irrational argument may still floor to a point
            return Rat(f.kind == FnKind::Floor ? rat_floor(*x) : rat_ceil(*x));
        }
        case FnKind::Table:
            if (n < f.table.size()) return f.table[n.get_ui()];
            return f.kids[0].exact_at(n);
        case FnKind::PiecewiseLinearExt: return kid(0);
        default: break;
    }
    // Otherwise exact only when an evaluation collapses to a point.
    DyadInterval v = eval_raw(n, 64);
    if (v.is_point()) return v.lo().rat();
    return std::nullopt;
}

// f(k) + (f(k+1) - f(k)) (x - k) on [k, k+1]; over an interval argument the
// hull of the endpoint values (valid because order functions are monotone),
// plus every integer node between them when monotonicity is not certified.
inline DyadInterval OrderFn::eval_real(const DyadInterval& x, long w) const {
    if (x.lo().sign() < 0) throw domain_error("piecewise-linear extension at a negative point");
    auto at_point = [&](const Dyadic& p) -> DyadInterval {
        Nat k = p.floor();
        Dyadic frac = p - Dyadic(k);
        DyadInterval fk = eval_raw(k, w);
        if (frac.sign() == 0) return fk;
        DyadInterval fk1 = eval_raw(k + 1, w);
        return fk + (fk1 - fk) * DyadInterval(frac);
    };
    DyadInterval out = hull(at_point(x.lo()), at_point(x.hi()));
    if (!props().mono) {
        Nat a = x.lo().ceil(), b = x.hi().floor();
        if (b - a > 4096) throw indeterminate("uncertified function over a wide real interval");
        for (Nat k = a; k <= b; ++k) out = hull(out, eval_raw(k, w));
    }
    return out;
}

// Interval of width <= 2^-prec containing f(n).
inline DyadInterval eval_at(const OrderFn& f, const Nat& n, long prec) {
    for (long w = prec + 8;; w = std::min(2 * w, precision_cap + prec + 64)) {
        DyadInterval v = f.eval_raw(n, w);
        if (v.width_le(prec)) return v;
        if (w >= precision_cap + prec + 64) throw indeterminate("eval_at did not reach the requested width", n);
    }
}

// Comparisons of f(n) against a rational, resolving by precision escalation.
inline int compare_at(const OrderFn& f, const Nat& n, const Rat& x) {
    if (auto v = f.exact_at(n)) return cmp(*v, x) < 0 ? -1 : cmp(*v, x) > 0;
    return compare_reals([&](long p) { return f.eval_raw(n, p); },
                         [&](long p) { return DyadInterval::of(x, p); });
}

inline int compare_fns(const OrderFn& f, const Nat& n, const OrderFn& g, const Nat& m) {
    if (n == m && f.same_as(g)) return 0;
    if (auto a = f.exact_at(n))
        if (auto b = g.exact_at(m)) return cmp(*a, *b) < 0 ? -1 : cmp(*a, *b) > 0;
    return compare_reals([&](long p) { return f.eval_raw(n, p); }, [&](long p) { return g.eval_raw(m, p); });
}

// floor(p(n)), exact.
inline Nat floor_at(const OrderFn& p, const Nat& n) {
    DyadInterval v = eval_at(p, n, 16);
    Nat c = v.hi().floor();
    return compare_at(p, n, Rat(c)) >= 0 ? c : c - 1;
}

// f^-(x) = least m with f(m) >= x.
inline Nat generalized_inverse(const OrderFn& f, const Rat& x) {
    auto ge = [&](const Nat& m) { return compare_at(f, m, x) >= 0; };
    if (!f.props().mono) {
        for (Nat m = 0;; ++m)
            if (ge(m)) return m;
    }
    if (ge(0)) return 0;
    Nat hi = 1;
    while (!ge(hi)) {
        hi *= 2;
        if (bit_length(hi) > 4096) throw indeterminate("generalized inverse search exceeded 2^4096");
    }
    Nat lo = hi / 2;
    while (hi - lo > 1) {
        Nat mid = (lo + hi) / 2;
        if (ge(mid)) hi = mid; else lo = mid;
    }
    return hi;
}

inline DyadInterval pl_extend_eval(const OrderFn& f, const Rat& x, long prec) {
    if (sgn(x) < 0) throw domain_error("pl_extend_eval at a negative point");
    Nat k = rat_floor(x);
    Rat frac = x - Rat(k);
    for (long w = prec + 8;; w *= 2) {
        DyadInterval fk = f.eval_raw(k, w);
        DyadInterval v = fk;
        if (sgn(frac) != 0) v = fk + (f.eval_raw(k + 1, w) - fk) * DyadInterval::of(frac, w);
        if (v.width_le(prec)) return v;
        if (w > precision_cap + prec) throw indeterminate("pl_extend_eval unresolved", k);
    }
}

struct CheckResult {
    bool pass = true;
    Nat at = 0;         // failing index, or the start of the verified tail
    std::string note;
};

// f(n+1) - f(n) <= 1 for all n < N.
inline CheckResult check_convex(const OrderFn& f, const Nat& N) {
    for (Nat n = 0; n < N; ++n) {
        int c = compare_reals([&](long p) { return f.eval_raw(n + 1, p) - f.eval_raw(n, p); },
                              [&](long) { return DyadInterval(1); });
        if (c > 0) return {false, n, "increment exceeds 1"};
    }
    return {true, 0, "verified for n < " + N.get_str()};
}

// Bounded surrogate for lim (n - f(n)) = inf: n - f(n) >= M on [N/2, N).
inline CheckResult check_subidentical(const OrderFn& f, const Nat& N, const Rat& M) {
    Nat start = N / 2;
    for (Nat n = start; n < N; ++n) {
        int c = compare_reals([&](long p) { return DyadInterval(Dyadic(n)) - f.eval_raw(n, p); },
                              [&](long p) { return DyadInterval::of(M, p); });
        if (c < 0) return {false, n, "n - f(n) below " + M.get_str()};
    }
    return {true, start, "bounded surrogate: n - f(n) >= " + M.get_str() + " on [" + start.get_str() + ", " + N.get_str() + ")"};
}

// Bounded surrogate for f <= g almost everywhere. Passes when the upper half
// [N/2, N] is clean; reports the least failing index otherwise, or the start
// N0 of the maximal clean tail on success.
inline CheckResult dominates_upto(const OrderFn& f, const OrderFn& g, const Nat& N) {
    std::optional<Nat> first, last;
    for (Nat n = 0; n <= N; ++n) {
        if (compare_fns(f, n, g, n) > 0) {
            if (!first) first = n;
            last = n;
        }
    }
    if (last && *last >= N / 2) return {false, *first, "f exceeds g inside the checked tail"};
    Nat n0 = last ? *last + 1 : Nat(0);
    return {true, n0, "f <= g on [" + n0.get_str() + ", " + N.get_str() + "]"};
}

struct MonoCert {
    enum Kind { Structural, VerifiedPrefix, Failed } kind;
    Nat horizon = 0;  // verified range, or failing index
};

inline MonoCert monotonicity_certificate(const OrderFn& f, const Nat& horizon = 1000) {
    if (f.props().mono) return {MonoCert::Structural, 0};
    for (Nat n = 0; n < horizon; ++n)
        if (compare_fns(f, n, f, n + 1) > 0) return {MonoCert::Failed, n};
    return {MonoCert::VerifiedPrefix, horizon};
}

// Prefix notation, e.g. "compose log2 id", "pow 1/2 id", "logpow k=2 a=3/2",
// "table [1 2 4] affine 2 0 id". Parentheses group and are otherwise ignored.
// A unary operator with nothing left to consume applies to id.
struct parse_error : std::invalid_argument {
    std::size_t pos;
    parse_error(const std::string& what, std::size_t p)
        : std::invalid_argument(what + " at position " + std::to_string(p)), pos(p) {}
};

namespace detail {

class FnParser {
  public:
    explicit FnParser(const std::string& s) : src_(s) { tokenize(); }

    OrderFn run() {
        OrderFn f = expr();
        if (i_ < toks_.size()) throw parse_error("trailing token '" + toks_[i_].text + "'", toks_[i_].pos);
        return f;
    }

  private:
    struct Tok {
        std::string text;
        std::size_t pos;
    };

    void tokenize() {
        std::size_t i = 0;
        while (i < src_.size()) {
            char c = src_[i];
            if (std::isspace(static_cast<unsigned char>(c)) || c == ',') {
                ++i;
            } else if (c == '(' || c == ')' || c == '[' || c == ']') {
                toks_.push_back({std::string(1, c), i});
                ++i;
            } else {
                std::size_t j = i;
                while (j < src_.size() && !std::isspace(static_cast<unsigned char>(src_[j])) &&
                       std::string("()[],").find(src_[j]) == std::string::npos)
                    ++j;
                toks_.push_back({src_.substr(i, j - i), i});
                i = j;
            }
        }
    }

    bool done() const { return i_ >= toks_.size(); }
    std::size_t here() const { return done() ? src_.size() : toks_[i_].pos; }
    const Tok& next() {
        if (done()) throw parse_error("unexpected end of expression", src_.size());
        return toks_[i_++];
    }

    Rat number() {
        const Tok& t = next();
        try {
            return parse_rat(t.text);
        } catch (const std::exception&) {
            throw parse_error("expected a number, got '" + t.text + "'", t.pos);
        }
    }

    Rat keyed(const std::string& key) {
        const Tok& t = next();
        if (t.text.rfind(key + "=", 0) != 0) throw parse_error("expected " + key + "=<value>", t.pos);
        try {
            return parse_rat(t.text.substr(key.size() + 1));
        } catch (const std::exception&) {
            throw parse_error("bad value for " + key, t.pos);
        }
    }

    OrderFn operand() { return done() ? OrderFn::identity() : expr(); }

    OrderFn expr() {
        std::size_t at = here();
        const Tok& t = next();
        const std::string& w = t.text;
        if (w == "(") {
            OrderFn f = expr();
            if (done() || toks_[i_].text != ")") throw parse_error("expected ')'", here());
            ++i_;
            return f;
        }
        if (w == "id" || w == "n") return OrderFn::identity();
        if (w == "const") return OrderFn::constant(number());
        if (w == "affine") {
            Rat a = number(), b = number();
            return OrderFn::affine(a, b, operand());
        }
        if (w == "add" || w == "sub" || w == "mul" || w == "compose" || w == "max" || w == "min") {
            OrderFn f = expr();
            OrderFn g = operand();
            if (w == "add") return OrderFn::add(f, g);
            if (w == "sub") return OrderFn::sub(f, g);
            if (w == "mul") return OrderFn::mul(f, g);
            if (w == "compose") return OrderFn::compose(f, g);
            if (w == "max") return OrderFn::max(f, g);
            return OrderFn::min(f, g);
        }
        if (w == "pow") {
            Rat q = number();
            return OrderFn::pow(operand(), q);
        }
        if (w == "sqrt") return OrderFn::pow(operand(), make_rat(1, 2));
        if (w == "log2") return OrderFn::log2(operand());
        if (w == "exp2") return OrderFn::exp2(operand());
        if (w == "floor") return OrderFn::floor(operand());
        if (w == "ceil") return OrderFn::ceil(operand());
        if (w == "inv") return OrderFn::inverse(operand());
        if (w == "pl") return OrderFn::pl_ext(operand());
        if (w == "logpow") {
            Rat k = keyed("k");
            if (k.get_den() != 1 || sgn(k) < 0 || k > 6) throw parse_error("k must be an integer in [0, 6]", at);
            Rat a = keyed("a");
            try {
                return OrderFn::log_power_product(static_cast<unsigned>(k.get_num().get_ui()), a);
            } catch (const domain_error& e) {
                throw parse_error(e.what(), at);
            }
        }
        if (w == "geom") {
            Rat r = number();
            try {
                return OrderFn::geom(r);
            } catch (const domain_error& e) {
                throw parse_error(e.what(), at);
            }
        }
        if (w == "table") {
            if (done() || toks_[i_].text != "[") throw parse_error("expected '[' after table", here());
            ++i_;
            std::vector<Rat> vals;
            while (!done() && toks_[i_].text != "]") vals.push_back(number());
            if (done()) throw parse_error("unterminated table", src_.size());
            ++i_;
            OrderFn tail = operand();
            try {
                return OrderFn::table(std::move(vals), tail);
            } catch (const precondition_error& e) {
                throw parse_error(e.what(), at);
            }
        }
        try {
            return OrderFn::constant(parse_rat(w));
        } catch (const std::exception&) {
        }
        throw parse_error("unknown token '" + w + "'", at);
    }

    std::string src_;
    std::vector<Tok> toks_;
    std::size_t i_ = 0;
};

}  // namespace detail

inline OrderFn parse_order_fn(const std::string& s) { return detail::FnParser(s).run(); }

}  // namespace avlab
