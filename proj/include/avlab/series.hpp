#pragma once
// Reciprocal series of order functions: classification, rigorous brackets,
// and the online bounding constructions. Constructions return OrderFns that
// extend their own decision tables on demand; tables only ever grow.

#include "order_fn.hpp"

#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace avlab {

struct GrowthClass {
    enum Tag { FastGrowing, SlowGrowing, Unknown } tag = Unknown;
    std::string certificate;
    Nat examined = 0;  // meaningful for Unknown only
};

inline const char* tag_name(GrowthClass::Tag t) {
    switch (t) {
        case GrowthClass::FastGrowing: return "FastGrowing";
        case GrowthClass::SlowGrowing: return "SlowGrowing";
        default: return "Unknown";
    }
}

inline GrowthClass classify_canonical(unsigned k, const Rat& alpha) {
    if (sgn(alpha) <= 0) throw domain_error("canonical exponent must be positive");
    std::string shape = "n";
    for (unsigned i = 1; i < k; ++i) shape += " log^" + std::to_string(i) + " n";
    shape += " (log^" + std::to_string(k) + " n)^" + alpha.get_str();
    if (alpha > 1)
        return {GrowthClass::FastGrowing, shape + ": integral test, tail (ln 2)^k L^(1-a)/(a-1) is finite", 0};
    return {GrowthClass::SlowGrowing, shape + ": condensation reduces to a divergent p-series with exponent <= 1", 0};
}

namespace detail {

// (ln 2)^k L_k(x)^(1-a) / (a-1), with L_k the k-fold log2.
inline DyadInterval lpp_integral(unsigned k, const Rat& alpha, const DyadInterval& x, long w) {
    DyadInterval L = x;
    for (unsigned i = 0; i < k; ++i) L = iv_log2(L, w);
    if (L.lo().sign() <= 0) throw domain_error("integral tail below the log-power threshold");
    DyadInterval ln2k = Dyadic(1);
    for (unsigned i = 0; i < k; ++i) ln2k = ln2k * ln2_interval(w);
    return iv_div(ln2k * iv_pow(L, 1 - alpha, w), DyadInterval::of(alpha - 1, w), w);
}

inline std::optional<DyadInterval> upper_only(const std::optional<DyadInterval>& t) {
    if (!t) return std::nullopt;
    return DyadInterval(Dyadic(0), t->hi());
}

// exp2 of id or of affine a b id with integer a >= 1, b: p(n) = 2^b (2^a)^n.
inline std::optional<std::pair<Rat, Rat>> exp2_geometric(const OrderFn& p) {
    if (p.kind() != FnKind::Exp2) return std::nullopt;
    const OrderFn& g = p.children()[0];
    if (g.kind() == FnKind::Identity) return std::pair<Rat, Rat>{2, 1};
    if (g.kind() != FnKind::Affine || g.children()[0].kind() != FnKind::Identity) return std::nullopt;
    Rat a = g.param(), b = g.param_b();
    if (a.get_den() != 1 || a < 1 || b.get_den() != 1 || abs(b) > 4096 || a > 4096) return std::nullopt;
    Rat r = 1, c = 1;
    mpz_mul_2exp(r.get_num_mpz_t(), r.get_num_mpz_t(), a.get_num().get_ui());
    if (sgn(b) >= 0)
        mpz_mul_2exp(c.get_num_mpz_t(), c.get_num_mpz_t(), b.get_num().get_ui());
    else
        mpz_mul_2exp(c.get_den_mpz_t(), c.get_den_mpz_t(), Nat(-b.get_num()).get_ui());
    return std::pair<Rat, Rat>{r, c};
}

}  // namespace detail

// Bracket of sum_{n>=K} 1/p(n) from the structure of p, or nothing when p has
// no tail model or K is below the range where the model is certified.
inline std::optional<DyadInterval> tail_bracket(const OrderFn& p, const Nat& K, long w) {
    switch (p.kind()) {
        case FnKind::Geom: {
            Rat r = p.param();
            Rat rk = 1;
            mpz_pow_ui(rk.get_num_mpz_t(), r.get_den_mpz_t(), to_size(K));
            mpz_pow_ui(rk.get_den_mpz_t(), r.get_num_mpz_t(), to_size(K));
            rk.canonicalize();
            return DyadInterval::of(rk * r / (r - 1), w);
        }
        case FnKind::Exp2: {
            auto rc = detail::exp2_geometric(p);
            if (!rc) return std::nullopt;
            auto [r, c] = *rc;
            Rat rk = 1;
            mpz_pow_ui(rk.get_den_mpz_t(), r.get_num_mpz_t(), to_size(K));
            rk.canonicalize();
            return DyadInterval::of(rk * r / ((r - 1) * c), w);
        }
        case FnKind::LogPowerProduct: {
            if (p.param() <= 1) return std::nullopt;
            Nat base = tetration2(p.lpp_k());
            if (K < 2 || K - 1 < base) return std::nullopt;
            DyadInterval lo = detail::lpp_integral(p.lpp_k(), p.param(), Dyadic(K), w);
            DyadInterval hi = detail::lpp_integral(p.lpp_k(), p.param(), Dyadic(K - 1), w);
            return DyadInterval(lo.lo(), hi.hi());
        }
        case FnKind::Pow: {
            if (p.children()[0].kind() != FnKind::Identity || p.param() <= 1 || K < 2) return std::nullopt;
            DyadInterval lo = detail::lpp_integral(0, p.param(), Dyadic(K), w);
            DyadInterval hi = detail::lpp_integral(0, p.param(), Dyadic(K - 1), w);
            return DyadInterval(lo.lo(), hi.hi());
        }
        case FnKind::Affine: {
            Rat a = p.param(), b = p.param_b();
            if (sgn(a) <= 0 || sgn(b) < 0) return std::nullopt;
            auto t = tail_bracket(p.children()[0], K, w);
            if (!t) return std::nullopt;
            DyadInterval s = iv_div(*t, DyadInterval::of(a, w), w);
            return sgn(b) == 0 ? std::optional(s) : detail::upper_only(s);
        }
        case FnKind::Add:
        case FnKind::Max: {
            // f + g >= f when g >= 0, and max(f, g) >= f always.
            std::optional<DyadInterval> best;
            for (int i = 0; i < 2; ++i) {
                const OrderFn& f = p.children()[i];
                const OrderFn& g = p.children()[1 - i];
                if (p.kind() == FnKind::Add && !g.props().nonneg) continue;
                auto t = detail::upper_only(tail_bracket(f, K, w));
                if (t && (!best || t->hi() < best->hi())) best = t;
            }
            return best;
        }
        case FnKind::Ceil: return detail::upper_only(tail_bracket(p.children()[0], K, w));
        case FnKind::Table:
            if (K < p.table_values().size()) return std::nullopt;
            return tail_bracket(p.children()[0], K, w);
        case FnKind::Custom:
            if (p.tail_oracle()) return p.tail_oracle()(K, w);
            return std::nullopt;
        default: return std::nullopt;
    }
}

inline bool has_tail_model(const OrderFn& p) {
    switch (p.kind()) {
        case FnKind::Geom: return true;
        case FnKind::Exp2: return detail::exp2_geometric(p).has_value();
        case FnKind::LogPowerProduct: return p.param() > 1;
        case FnKind::Pow: return p.children()[0].kind() == FnKind::Identity && p.param() > 1;
        case FnKind::Affine: return sgn(p.param()) > 0 && sgn(p.param_b()) >= 0 && has_tail_model(p.children()[0]);
        case FnKind::Add:
            return (p.children()[1].props().nonneg && has_tail_model(p.children()[0])) ||
                   (p.children()[0].props().nonneg && has_tail_model(p.children()[1]));
        case FnKind::Max: return has_tail_model(p.children()[0]) || has_tail_model(p.children()[1]);
        case FnKind::Ceil:
        case FnKind::Table: return has_tail_model(p.children()[0]);
        case FnKind::Custom: return static_cast<bool>(p.tail_oracle());
        default: return false;
    }
}

// Structural classification; anything not covered by a rule is Unknown(N).
inline GrowthClass classify(const OrderFn& p, const Nat& N = 1000) {
    using G = GrowthClass;
    const auto& kids = p.children();
    switch (p.kind()) {
        case FnKind::LogPowerProduct: return classify_canonical(p.lpp_k(), p.param());
        case FnKind::Pow:
            if (kids[0].kind() == FnKind::Identity && sgn(p.param()) > 0) return classify_canonical(0, p.param());
            break;
        case FnKind::Identity: return classify_canonical(0, 1);
        case FnKind::Const: return {G::SlowGrowing, "constant terms diverge", 0};
        case FnKind::Geom: return {G::FastGrowing, "geometric series, closed form", 0};
        case FnKind::Exp2:
            if (detail::exp2_geometric(p)) return {G::FastGrowing, "geometric series 2^-(an+b), closed form", 0};
            break;
        case FnKind::Affine:
            if (sgn(p.param()) > 0 && sgn(p.param_b()) >= 0) {
                G c = classify(kids[0], N);
                if (c.tag != G::Unknown) c.certificate = "positive affine image of: " + c.certificate;
                return c;
            }
            break;
        case FnKind::Add:
        case FnKind::Max:
            for (int i = 0; i < 2; ++i) {
                if (p.kind() == FnKind::Add && !kids[1 - i].props().nonneg) continue;
                G c = classify(kids[i], N);
                if (c.tag == G::FastGrowing) return {G::FastGrowing, "direct comparison with " + c.certificate, 0};
            }
            break;
        case FnKind::Min:
            for (int i = 0; i < 2; ++i) {
                G c = classify(kids[i], N);
                if (c.tag == G::SlowGrowing) return {G::SlowGrowing, "direct comparison with " + c.certificate, 0};
            }
            break;
        case FnKind::Table: {
            G c = classify(kids[0], N);
            if (c.tag != G::Unknown) c.certificate = "finite prefix change of: " + c.certificate;
            return c;
        }
        case FnKind::Custom:
            if (p.tail_oracle()) return {G::FastGrowing, "construction carries a certified tail bound", 0};
            break;
        default: break;
    }
    return {G::Unknown, "no structural rule applies", N};
}

// Sum of nonnegative terms: partial sum plus a caller-certified tail bracket,
// doubling the cutoff until the width is at most 2^-k.
using TermFn = std::function<DyadInterval(const Nat& n, long prec)>;
using TailFn = std::function<std::optional<DyadInterval>(const Nat& K, long prec)>;

inline DyadInterval series_bracket(const TermFn& term, const TailFn& tail, const Nat& n0, long k,
                                   const Nat& max_terms = pow2(26)) {
    long w = k + 48;
    DyadInterval S = Dyadic(0);
    Nat n = n0, K = n0 + 16;
    for (;;) {
        for (; n < K; ++n) S = S + term(n, w);
        if (auto T = tail(K, w)) {
            DyadInterval total = S + *T;
            if (total.width_le(k)) return total;
        }
        if (K - n0 > max_terms) throw indeterminate("series bracket did not reach width 2^-" + std::to_string(k), K);
        K = n0 + 2 * (K - n0);
    }
}

inline DyadInterval sum_reciprocal(const OrderFn& p, long k, const Nat& n0 = 0) {
    if (!has_tail_model(p)) throw precondition_error("sum_reciprocal needs a certified fast-growing tail model: " + p.str());
    return series_bracket([&](const Nat& n, long w) { return iv_reciprocal(p.eval_raw(n, w), w); },
                          [&](const Nat& K, long w) { return tail_bracket(p, K, w); }, n0, k);
}

inline RealBracket sum_bracket(const OrderFn& p, const Nat& n0 = 0) {
    return RealBracket([p, n0](long k) { return sum_reciprocal(p, k, n0); });
}

// Integral of 1/p over [x0, inf) for the smooth log-power shape.
inline DyadInterval integral_tail(unsigned k, const Rat& alpha, const Rat& x0, long prec) {
    if (alpha <= 1) throw precondition_error("integral diverges for exponent <= 1");
    if (x0 < Rat(tetration2(k)) || sgn(x0) <= 0) throw precondition_error("integral start below the log-power threshold");
    for (long w = prec + 8;; w *= 2) {
        DyadInterval v = detail::lpp_integral(k, alpha, DyadInterval::of(x0, w), w);
        if (v.width_le(prec)) return v;
        if (w > precision_cap + prec) throw indeterminate("integral tail unresolved");
    }
}

struct SeriesReport {
    enum Method { Condensation, IntegralTest, ClosedForm, DirectComparison };
    std::string subject;
    GrowthClass cls;
    std::optional<DyadInterval> bracket;
    long precision = 0;
    Method method = DirectComparison;
};

inline const char* method_name(SeriesReport::Method m) {
    switch (m) {
        case SeriesReport::Condensation: return "condensation";
        case SeriesReport::IntegralTest: return "integral-test";
        case SeriesReport::ClosedForm: return "closed-form";
        default: return "direct-comparison";
    }
}

inline SeriesReport series_report(const OrderFn& p, long k, const Nat& n0 = 0) {
    SeriesReport r;
    r.subject = p.str();
    r.cls = classify(p);
    r.precision = k;
    if (p.kind() == FnKind::Geom) r.method = SeriesReport::ClosedForm;
    else if (p.kind() == FnKind::LogPowerProduct || p.kind() == FnKind::Pow)
        r.method = r.cls.tag == GrowthClass::FastGrowing ? SeriesReport::IntegralTest : SeriesReport::Condensation;
    if (r.cls.tag == GrowthClass::FastGrowing && has_tail_model(p)) r.bracket = sum_reciprocal(p, k, n0);
    return r;
}

// ceil(sqrt(2^m)), the worked-example coefficient numerator.
inline Nat ceil_sqrt_pow2(unsigned long m) {
    Nat x = pow2(m), r;
    mpz_sqrt(r.get_mpz_t(), x.get_mpz_t());
    if (r * r < x) ++r;
    return r;
}

// sum_{m>=m0} ceil(sqrt(2^m))/2^m. Tail past K is below
// 2^{-K/2}/(1-2^{-1/2}) + 2^{1-K} <= (7/2) 2^{-floor(K/2)} + 2^{1-K}.
inline DyadInterval sqrt_coefficient_sum(const Nat& m0, long k) {
    return series_bracket(
        [](const Nat& m, long) { return DyadInterval(Dyadic(ceil_sqrt_pow2(to_size(m)), -static_cast<long>(to_size(m)))); },
        [](const Nat& K, long w) {
            std::size_t kk = to_size(K);
            Rat u = make_rat(7, 2) * make_rat(1, pow2(kk / 2)) + make_rat(2, pow2(kk));
            return std::optional(DyadInterval(Dyadic(0), Dyadic::round_up(u, w)));
        },
        m0, k);
}

// ---------------------------------------------------------------------------
// Sequences of order functions. A finite list is continued by its last entry,
// which preserves every hypothesis the constructions need.

using FnSeq = std::function<OrderFn(std::size_t k)>;

inline FnSeq seq_of(std::vector<OrderFn> v) {
    if (v.empty()) throw precondition_error("empty function sequence");
    return [v = std::move(v)](std::size_t k) { return v[std::min(k, v.size() - 1)]; };
}

namespace detail {

class SeqCache {
  public:
    explicit SeqCache(FnSeq s) : seq_(std::move(s)) {}
    const OrderFn& at(std::size_t k) {
        while (cache_.size() <= k) cache_.push_back(seq_(cache_.size()));
        return cache_[k];
    }

  private:
    FnSeq seq_;
    std::vector<OrderFn> cache_;
};

inline bool geq_rat(const OrderFn& f, const Nat& n, const Rat& x) { return compare_at(f, n, x) >= 0; }

}  // namespace detail

// q^-(0) = p_0(0); M_{n+1} = M_n + 1 iff M_n + 1 <= min_{k <= M_n+1} p_k(n+1)
// (ties admit); q^-(n) = min{p_0(n), ..., p_{M_n}(n), M_n + 1}.
class SlowLowerBound {
  public:
    SlowLowerBound(FnSeq ps, std::size_t horizon) : st_(std::make_shared<State>(std::move(ps))) {
        st_->ensure(horizon);
    }

    Nat M(std::size_t n) const {
        std::lock_guard<std::mutex> lk(st_->mu);
        st_->ensure(n);
        return st_->M[n];
    }

    OrderFn fn() const {
        auto st = st_;
        return OrderFn::custom("slow-lower", [st](const Nat& n, long w) { return st->eval(to_size(n), w); },
                               {true, true, true});
    }

  private:
    struct State {
        explicit State(FnSeq s) : ps(std::move(s)) {}
        detail::SeqCache ps;
        std::mutex mu;
        std::vector<std::size_t> M{0};

        void ensure(std::size_t n) {
            while (M.size() <= n) {
                std::size_t nn = M.size(), cand = M.back() + 1;
                bool admit = true;
                for (std::size_t k = 0; k <= cand && admit; ++k) admit = detail::geq_rat(ps.at(k), nn, cand);
                M.push_back(admit ? cand : M.back());
            }
        }
        DyadInterval eval(std::size_t n, long w) {
            std::vector<OrderFn> fs;
            std::size_t m;
            {
                std::lock_guard<std::mutex> lk(mu);
                ensure(n);
                m = M[n];
                if (n == 0) return ps.at(0).eval_raw(0, w);
                for (std::size_t k = 0; k <= m; ++k) fs.push_back(ps.at(k));
            }
            DyadInterval v = Dyadic(Nat(m + 1));
            for (auto& f : fs) v = iv_min(v, f.eval_raw(n, w));
            return v;
        }
    };
    std::shared_ptr<State> st_;
};

// Blocks [N_m, N_{m+1}) on which q^+ = p_m. N_{m+1} is the least N > N_m with
// sum_{n=N_m}^{N-1} 1/p_m(n) >= 1 and p_m(N-1) <= p_{m+1}(N). Block ends are
// discovered by scanning only as far as a query needs.
class SlowUpperBound {
  public:
    SlowUpperBound(FnSeq ps, std::size_t horizon) : st_(std::make_shared<State>(std::move(ps))) {
        st_->horizon = horizon;
        std::lock_guard<std::mutex> lk(st_->mu);
        st_->ensure(horizon);
    }

    // Completed block boundaries N_0 < N_1 < ... known so far.
    std::vector<Nat> boundaries() const {
        std::lock_guard<std::mutex> lk(st_->mu);
        std::vector<Nat> out;
        for (auto b : st_->N) out.push_back(Nat(static_cast<unsigned long>(b)));
        return out;
    }
    std::size_t block_of(std::size_t n) const {
        std::lock_guard<std::mutex> lk(st_->mu);
        st_->ensure(n);
        return st_->block_of(n);
    }

    OrderFn fn() const {
        auto st = st_;
        return OrderFn::custom("slow-upper",
                               [st](const Nat& n, long w) {
                                   OrderFn f;
                                   {
                                       std::lock_guard<std::mutex> lk(st->mu);
                                       std::size_t nn = to_size(n);
                                       st->ensure(nn);
                                       f = st->ps.at(st->block_of(nn));
                                   }
                                   return f.eval_raw(n, w);
                               },
                               {true, true, true});
    }

  private:
    struct State {
        explicit State(FnSeq s) : ps(std::move(s)) {}
        detail::SeqCache ps;
        std::mutex mu;
        std::size_t horizon = 0;
        std::vector<std::size_t> N{0};
        std::size_t scanned = 0;  // candidates N <= scanned rejected for the open block
        std::vector<DyadInterval> partial;  // running block sum at n = N.back() + i
        std::size_t checked_chain = 0;

        std::size_t block_of(std::size_t n) const {
            return static_cast<std::size_t>(std::upper_bound(N.begin(), N.end(), n) - N.begin()) - 1;
        }

        void check_chain(std::size_t m) {
            while (checked_chain <= m) {
                std::size_t j = checked_chain++;
                auto r = dominates_upto(ps.at(j), ps.at(j + 1), Nat(static_cast<unsigned long>(std::max<std::size_t>(horizon, 64))));
                if (!r.pass)
                    throw precondition_error("domination chain fails between p_" + std::to_string(j) + " and p_" +
                                             std::to_string(j + 1) + " at n=" + r.at.get_str());
            }
        }

        bool block_sum_ge1(std::size_t m, std::size_t start, std::size_t end) {
            const OrderFn& p = ps.at(m);
            auto sum = [&](long w) {
                DyadInterval s = Dyadic(0);
                for (std::size_t n = start; n < end; ++n) s = s + iv_reciprocal(p.eval_raw(n, w), w);
                return s;
            };
            const DyadInterval& fast = partial.back();
            if (fast.lo() >= Dyadic(1)) return true;
            if (fast.hi() < Dyadic(1)) return false;
            return compare_reals(sum, [](long) { return DyadInterval(1); }) >= 0;
        }

        // Make sure the block containing n is closed on the right beyond n.
        void ensure(std::size_t n) {
            for (;;) {
                std::size_t m = N.size() - 1, start = N.back();
                check_chain(m);
                const OrderFn& p = ps.at(m);
                if (partial.empty()) {
                    partial.push_back(Dyadic(0));
                    scanned = start;
                }
                if (scanned > n) return;
                // Candidate N = scanned + 1: block sum over [start, scanned].
                std::size_t cand = scanned + 1;
                partial.push_back(partial.back() + iv_reciprocal(p.eval_raw(cand - 1, 64), 64));
                scanned = cand;
                if (block_sum_ge1(m, start, cand) && compare_fns(p, cand - 1, ps.at(m + 1), cand) <= 0) {
                    N.push_back(cand);
                    partial.clear();
                }
                if (cand - start > (std::size_t{1} << 26)) throw exhausted("slow upper bound block exceeds 2^26 terms");
            }
        }
    };
    std::shared_ptr<State> st_;
};

// q^+(n) = max_{k <= n} p_k(n).
inline OrderFn fast_upper(FnSeq ps) {
    auto c = std::make_shared<detail::SeqCache>(std::move(ps));
    auto mu = std::make_shared<std::mutex>();
    return OrderFn::custom("fast-upper",
                           [c, mu](const Nat& n, long w) {
                               std::vector<OrderFn> fs;
                               {
                                   std::lock_guard<std::mutex> lk(*mu);
                                   for (std::size_t k = 0; k <= to_size(n); ++k) fs.push_back(c->at(k));
                               }
                               DyadInterval v = fs[0].eval_raw(n, w);
                               for (std::size_t k = 1; k < fs.size(); ++k) v = iv_max(v, fs[k].eval_raw(n, w));
                               return v;
                           },
                           {true, true, true},
                           [c, mu](const Nat& K, long w) -> std::optional<DyadInterval> {
                               OrderFn p0;
                               {
                                   std::lock_guard<std::mutex> lk(*mu);
                                   p0 = c->at(0);
                               }
                               return detail::upper_only(tail_bracket(p0, K, w));
                           });
}

// N_{m+1} = least N > N_m whose certified tails satisfy
// sum_{k <= m+1} sum_{n >= N} 1/p_k(n) <= 2^{-(m+1)}; q^-(n) = min_{k<=m} p_k(n)
// on [N_m, N_{m+1}).
class FastLowerBound {
  public:
    FastLowerBound(FnSeq ps, std::size_t horizon) : st_(std::make_shared<State>(std::move(ps))) {
        for (std::size_t k = 0; k < 4; ++k)
            if (!has_tail_model(st_->ps.at(k))) throw precondition_error("fast lower bound needs bracketable tails");
        std::lock_guard<std::mutex> lk(st_->mu);
        st_->ensure(horizon);
    }

    std::vector<Nat> boundaries(std::size_t count) const {
        std::lock_guard<std::mutex> lk(st_->mu);
        while (st_->N.size() < count) st_->next_block();
        return {st_->N.begin(), st_->N.begin() + count};
    }
    std::size_t block_of(const Nat& n) const {
        std::lock_guard<std::mutex> lk(st_->mu);
        st_->ensure(n);
        return st_->block_of(n);
    }

    // beta_i = sum_{n < N_i} 1/q^-(n) + 2^{-(i-1)}, i >= 1.
    DyadInterval beta(std::size_t i, long w) const {
        if (i == 0) throw precondition_error("beta is indexed from 1");
        Nat Ni = boundaries(i + 1)[i];
        OrderFn q = fn();
        DyadInterval s = Dyadic(0);
        for (Nat n = 0; n < Ni; ++n) s = s + iv_reciprocal(q.eval_raw(n, w), w);
        return s + DyadInterval(Dyadic(1).shifted(-static_cast<long>(i) + 1));
    }

    OrderFn fn() const {
        auto st = st_;
        return OrderFn::custom(
            "fast-lower",
            [st](const Nat& n, long w) {
                std::vector<OrderFn> fs;
                {
                    std::lock_guard<std::mutex> lk(st->mu);
                    st->ensure(n);
                    std::size_t m = st->block_of(n);
                    for (std::size_t k = 0; k <= m; ++k) fs.push_back(st->ps.at(k));
                }
                DyadInterval v = fs[0].eval_raw(n, w);
                for (std::size_t k = 1; k < fs.size(); ++k) v = iv_min(v, fs[k].eval_raw(n, w));
                return v;
            },
            {true, true, true},
            [st](const Nat& K, long w) -> std::optional<DyadInterval> {
                std::vector<OrderFn> fs;
                std::size_t i;
                {
                    std::lock_guard<std::mutex> lk(st->mu);
                    st->ensure(K);
                    i = st->block_of(K);
                    for (std::size_t k = 0; k <= i; ++k) fs.push_back(st->ps.at(k));
                }
                if (i == 0) return std::nullopt;
                // Rest of block i, then blocks m > i each below 2^-m.
                Dyadic rest = Dyadic(1).shifted(-static_cast<long>(i));
                Dyadic coarse = Dyadic(1).shifted(1 - static_cast<long>(i));
                Dyadic fine = rest;
                for (auto& f : fs) {
                    auto t = tail_bracket(f, K, w);
                    if (!t) return DyadInterval(Dyadic(0), coarse);
                    fine = fine + t->hi();
                }
                return DyadInterval(Dyadic(0), fine < coarse ? fine : coarse);
            });
    }

  private:
    struct State {
        explicit State(FnSeq s) : ps(std::move(s)) {}
        detail::SeqCache ps;
        std::mutex mu;
        std::vector<Nat> N{Nat(0)};

        bool certified(std::size_t m1, const Nat& cand) {
            Dyadic bound = Dyadic(1).shifted(-static_cast<long>(m1));
            Dyadic total = 0;
            for (std::size_t k = 0; k <= m1; ++k) {
                auto t = tail_bracket(ps.at(k), cand, 64 + 3 * static_cast<long>(m1));
                if (!t) return false;
                total = total + t->hi();
                if (total > bound) return false;
            }
            return true;
        }
        void next_block() {
            std::size_t m1 = N.size();
            Nat lo = N.back(), hi = lo + 1;
            while (!certified(m1, hi)) {
                lo = hi;
                hi = hi * 2 + 1;
                if (bit_length(hi) > 64) throw exhausted("fast lower bound block boundary beyond 2^64");
            }
            while (hi - lo > 1) {
                Nat mid = (lo + hi) / 2;
                if (certified(m1, mid)) hi = mid; else lo = mid;
            }
            N.push_back(hi);
        }
        void ensure(const Nat& n) {
            while (N.back() <= n) next_block();
        }
        std::size_t block_of(const Nat& n) const {
            return static_cast<std::size_t>(std::upper_bound(N.begin(), N.end(), n) - N.begin()) - 1;
        }
    };
    std::shared_ptr<State> st_;
};

struct FastBounds {
    OrderFn upper;
    FastLowerBound lower;
};

inline FastBounds fast_bounds(FnSeq ps, std::size_t horizon) {
    return {fast_upper(ps), FastLowerBound(ps, horizon)};
}

// p_k = p / 2^k, so that p / q = 2^m on block m.
inline FastLowerBound mult_gap_lower(const OrderFn& p, std::size_t horizon) {
    if (!has_tail_model(p)) throw precondition_error("mult_gap_lower needs a bracketable sum");
    return FastLowerBound([p](std::size_t k) { return OrderFn::affine(make_rat(1, pow2(k)), 0, p); }, horizon);
}

using RatSeq = std::function<Rat(const Nat& n)>;

// p^(n) = p(n) - eps_n with eps strictly decreasing and p(0) - eps_0 > 1.
inline OrderFn strict_increasing_lower(const OrderFn& p, RatSeq eps, std::size_t horizon) {
    Rat e0 = eps(0);
    if (sgn(e0) <= 0) throw precondition_error("eps must be positive");
    for (std::size_t n = 0; n < horizon; ++n) {
        Rat a = eps(n), b = eps(n + 1);
        if (!(b < a) || sgn(b) <= 0) throw precondition_error("eps not strictly decreasing and positive at n=" + std::to_string(n));
    }
    if (compare_at(p, 0, 1 + e0) <= 0) throw precondition_error("need 1 < p(0) - eps_0");
    return OrderFn::custom(
        "strict-lower",
        [p, eps](const Nat& n, long w) { return p.eval_raw(n, w) - DyadInterval::of(eps(n), w); },
        {true, true, true},
        [p, e0](const Nat& K, long w) -> std::optional<DyadInterval> {
            // 1/p^ = 1/p + 1/(p (p/eps - 1)), and the second term is at most 1/p once p >= 2 eps.
            if (compare_at(p, K, 2 * e0) < 0) return std::nullopt;
            auto t = tail_bracket(p, K, w);
            if (!t) return std::nullopt;
            return DyadInterval(t->lo(), t->hi() + t->hi());
        });
}

// p^(0) = p(0), p^(n+1) = min{alpha p^(n), p(n+1)}; p^(n) = alpha^{n-j} p(j)
// with j the last member of I = {n : p^(n) = p(n)} at or below n.
class BoundedJumps {
  public:
    BoundedJumps(const OrderFn& p, const Rat& alpha, std::size_t horizon) : st_(std::make_shared<State>()) {
        if (alpha <= 1) throw domain_error("jump ratio must exceed 1");
        st_->p = p;
        st_->alpha = alpha;
        std::lock_guard<std::mutex> lk(st_->mu);
        st_->ensure(horizon);
    }

    // Members of I below n.
    std::vector<std::size_t> I_upto(std::size_t n) const {
        std::lock_guard<std::mutex> lk(st_->mu);
        st_->ensure(n);
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < n; ++i)
            if (st_->last[i] == i) out.push_back(i);
        return out;
    }

    OrderFn fn() const {
        auto st = st_;
        return OrderFn::custom(
            "bounded-jumps", [st](const Nat& n, long w) { return st->eval(to_size(n), w); }, {true, true, true},
            [st](const Nat& K, long w) -> std::optional<DyadInterval> {
                auto t = tail_bracket(st->p, K + 1, w);
                if (!t) return std::nullopt;
                Rat c = st->alpha / (st->alpha - 1);
                DyadInterval u = DyadInterval::of(c, w) * (iv_reciprocal(st->eval(to_size(K), w), w) + *t);
                return DyadInterval(Dyadic(0), u.hi());
            });
    }

  private:
    struct State {
        OrderFn p;
        Rat alpha;
        std::mutex mu;
        std::vector<std::size_t> last{0};

        DyadInterval value(std::size_t n, std::size_t j, long w) const {
            Rat s = 1;
            for (std::size_t i = j; i < n; ++i) s *= alpha;
            return DyadInterval::of(s, w) * p.eval_raw(j, w);
        }
        void ensure(std::size_t n) {
            while (last.size() <= n) {
                std::size_t nn = last.size(), j = last.back();
                bool in_I = compare_reals([&](long w) { return p.eval_raw(nn, w); },
                                          [&](long w) { return value(nn, j, w); }) <= 0;
                last.push_back(in_I ? nn : j);
            }
        }
        DyadInterval eval(std::size_t n, long w) {
            std::size_t j;
            {
                std::lock_guard<std::mutex> lk(mu);
                ensure(n);
                j = last[n];
            }
            return value(n, j, w);
        }
    };
    std::shared_ptr<State> st_;
};

// Blocks (n_k, n_{k+1}] with gamma = k+1, gamma_0 = 1 and n_0 = 0. The block
// end n_{k+1} is the least n > n_k whose certified tail bound satisfies
// tail_upper(n+1) <= eps_lo / 2^{k+1}, so block k >= 1 has eps-sum at most
// eps_lo / 2^k. delta equals gamma except at block ends, where it is the
// largest integer keeping sum eps_m delta_m <= B_{k+1}.
class GapSequence {
  public:
    // tail_upper(K) bounds sum_{m >= K} eps_m from above and tends to 0.
    GapSequence(RatSeq eps, RatSeq tail_upper, std::size_t horizon) : st_(std::make_shared<State>()) {
        st_->eps = std::move(eps);
        st_->tail = std::move(tail_upper);
        // eps_lo: a partial sum S_N with tail_upper(N+1) <= S_N, so eps/2 <= eps_lo <= eps.
        Rat S = 0;
        for (std::size_t N = 0;; ++N) {
            Rat e = st_->eps(N);
            if (sgn(e) <= 0) throw precondition_error("eps must be positive");
            S += e;
            if (st_->tail(N + 1) <= S) break;
            if (N > (1u << 24)) throw precondition_error("tail bound does not approach 0");
        }
        st_->eps_lo = S;
        st_->U = st_->tail(1);
        std::lock_guard<std::mutex> lk(st_->mu);
        st_->ensure(horizon);
    }

    Nat gamma(std::size_t m) const { return get(m).first; }
    Nat delta(std::size_t m) const { return get(m).second; }
    Rat eps_lower() const { return st_->eps_lo; }
    std::vector<std::size_t> block_ends(std::size_t count) const {
        std::lock_guard<std::mutex> lk(st_->mu);
        while (st_->ends.size() < count + 1) st_->next_block();
        return {st_->ends.begin(), st_->ends.begin() + static_cast<long>(count) + 1};
    }

    // Bracket of sum eps_m gamma_m of width <= 2^-k.
    DyadInterval weighted_sum(long k) const {
        std::lock_guard<std::mutex> lk(st_->mu);
        for (std::size_t K = 1;; ++K) {
            while (st_->ends.size() <= K) st_->next_block();
            // sum_{j >= K} (j+1) eps_lo / 2^j = eps_lo (K+2) / 2^{K-1}
            Rat tail = st_->eps_lo * (K + 2) / Rat(pow2(K - 1));
            DyadInterval t = DyadInterval::of(tail, k + 8);
            if (t.width_le(k + 1) && tail <= make_rat(1, pow2(k + 1))) {
                Rat s = 0;
                for (std::size_t m = 0; m <= st_->ends[K]; ++m) s += st_->eps(m) * Rat(st_->gam[m]);
                return {Dyadic::round_down(s, k + 8), Dyadic::round_up(s + tail, k + 8)};
            }
        }
    }

    OrderFn fn() const {
        auto st = st_;
        return OrderFn::custom("gap-gamma",
                               [st](const Nat& n, long) {
                                   std::lock_guard<std::mutex> lk(st->mu);
                                   st->ensure(to_size(n));
                                   return DyadInterval(Dyadic(st->gam[to_size(n)]));
                               },
                               {true, true, true});
    }

  private:
    std::pair<Nat, Nat> get(std::size_t m) const {
        std::lock_guard<std::mutex> lk(st_->mu);
        st_->ensure(m);
        return {st_->gam[m], st_->del[m]};
    }

    struct State {
        RatSeq eps, tail;
        Rat eps_lo, U;
        std::mutex mu;
        std::vector<std::size_t> ends{0};
        std::vector<Nat> gam{Nat(1)}, del{Nat(1)};
        Rat cum = 0;  // sum eps_m delta_m over assigned m

        Rat B(std::size_t k1) const {  // B_{k+1} with k1 = k+1
            Rat b = eps(0) + U;
            for (std::size_t j = 1; j < k1; ++j) b += Rat(static_cast<unsigned long>(j + 1)) * eps_lo / Rat(pow2(j));
            return b;
        }
        void next_block() {
            if (gam.size() == 1) cum = eps(0);
            std::size_t k = ends.size() - 1, nk = ends.back();
            Rat bound = eps_lo / Rat(pow2(k + 1));
            std::size_t n = nk + 1;
            while (tail(Nat(static_cast<unsigned long>(n + 1))) > bound) {
                ++n;
                if (n - nk > (std::size_t{1} << 24)) throw exhausted("gap sequence block exceeds 2^24 terms");
            }
            Nat g(static_cast<unsigned long>(k + 1));
            for (std::size_t m = nk + 1; m < n; ++m) {
                gam.push_back(g);
                del.push_back(g);
                cum += eps(m) * Rat(g);
            }
            Rat room = (B(k + 1) - cum) / eps(n);
            Nat d = rat_floor(room);
            if (d < g) throw domain_error("gap sequence invariant delta >= gamma failed");
            gam.push_back(g);
            del.push_back(d);
            cum += eps(n) * Rat(d);
            ends.push_back(n);
        }
        void ensure(std::size_t m) {
            while (ends.back() < m) next_block();
        }
    };
    std::shared_ptr<State> st_;
};

}  // namespace avlab
