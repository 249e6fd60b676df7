#pragma once
// The explicit reductions: complexity <-> avoidance transforms, the
// progression spreader and its local recovery, affine reindexing, the
// P_a^{b,c} lift and merge, and a shift-complexity checker over K_s.

#include "machine.hpp"
#include "series.hpp"
#include "unit_interval.hpp"
#include "gm_algebra.hpp"

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace avlab {

// ---------------------------------------------------------------------------
// Complexity to avoidance: Y(n) = #(X restricted to (f^- o h)(n)).

// least m with f(m) >= h(n)
inline Nat inverse_after(const OrderFn& f, const OrderFn& h, const Nat& n) {
    auto ge = [&](const Nat& m) { return compare_fns(f, m, h, n) >= 0; };
    if (ge(0)) return 0;
    Nat hi = 1;
    while (!ge(hi)) {
        hi *= 2;
        if (bit_length(hi) > 64) throw indeterminate("f^- o h exceeds 2^64", n);
    }
    Nat lo = hi / 2;
    while (hi - lo > 1) {
        Nat mid = (lo + hi) / 2;
        if (ge(mid)) hi = mid; else lo = mid;
    }
    return hi;
}

inline Nats complex_to_lua(const Bits& X, const OrderFn& f, const OrderFn& h, std::size_t N) {
    if (!f.props().mono) throw precondition_error("f must be certified nondecreasing");
    std::vector<std::size_t> len(N);
    std::size_t need = 0;
    for (std::size_t n = 0; n < N; ++n) {
        len[n] = to_size(inverse_after(f, h, Nat(static_cast<unsigned long>(n))));
        need = std::max(need, len[n]);
    }
    if (X.size() < need) throw length_error("input needs " + std::to_string(need) + " bits", need);
    Nats Y;
    for (std::size_t n = 0; n < N; ++n) {
        Nat y = str_encode(X.substr(0, len[n]));
        if (y >= pow2(len[n] + 1)) throw std::logic_error("Y(n) bound violated at n=" + std::to_string(n));
        Y.push_back(y);
    }
    return Y;
}

// ---------------------------------------------------------------------------
// Avoidance to complexity: block n holds X(n) in floor(log2 p(n)) bits,
// least significant first, starting at q(n) = sum_{i<n} floor(log2 p(i)).

struct block_overflow : std::domain_error {
    std::size_t n;
    block_overflow(const std::string& w, std::size_t at) : std::domain_error(w), n(at) {}
};

inline std::vector<std::size_t> block_widths(const OrderFn& p, std::size_t N) {
    std::vector<std::size_t> w;
    for (std::size_t n = 0; n < N; ++n) {
        Nat v = floor_at(p, Nat(static_cast<unsigned long>(n)));
        if (v < 1) throw domain_error("p(" + std::to_string(n) + ") < 1 leaves no block");
        w.push_back(bit_length(v) - 1);
    }
    return w;
}

// q(0..N)
inline std::vector<std::size_t> block_offsets(const OrderFn& p, std::size_t N) {
    auto w = block_widths(p, N);
    std::vector<std::size_t> q{0};
    for (auto x : w) q.push_back(q.back() + x);
    return q;
}

inline Bits lua_to_complex(const Nats& X, const OrderFn& p, std::size_t N) {
    if (X.size() < N) throw length_error("input needs " + std::to_string(N) + " values", N);
    auto w = block_widths(p, N);
    Bits Y;
    for (std::size_t n = 0; n < N; ++n) {
        if (sgn(X[n]) < 0 || X[n] >= pow2(w[n]))
            throw block_overflow("X(" + std::to_string(n) + ") = " + X[n].get_str() + " needs more than " + std::to_string(w[n]) + " bits", n);
        for (std::size_t i = 0; i < w[n]; ++i) Y.push_back(mpz_tstbit(X[n].get_mpz_t(), i) ? '1' : '0');
    }
    return Y;
}

inline Nats lua_unpack(const Bits& Y, const OrderFn& p, std::size_t N) {
    auto q = block_offsets(p, N);
    if (Y.size() < q.back()) throw length_error("input needs " + std::to_string(q.back()) + " bits", q.back());
    if (!is_bits(Y)) throw domain_error("packed input is not a bit string");
    Nats X;
    for (std::size_t n = 0; n < N; ++n) {
        Nat v = 0;
        for (std::size_t i = q[n]; i < q[n + 1]; ++i)
            if (Y[i] == '1') mpz_setbit(v.get_mpz_t(), i - q[n]);
        X.push_back(v);
    }
    return X;
}

// ---------------------------------------------------------------------------
// The spreader. Stage s works modulo 2^{m0+s}: the surviving residues are
// split in two, the first ceil(c_{m0+s} 2^{m0+s}) in increasing order are
// assigned to sources 0, 1, ..., and the rest survive.

struct Coefficients {
    std::function<Rat(std::size_t m)> at;
    // Bracket of sum_{k>=m} at(k), of width <= 2^-prec.
    std::function<DyadInterval(std::size_t m, long prec)> tail;
    std::string name = "a";
};

// a_m = ceil(sqrt(2^m)) / 2^m
inline Coefficients sqrt_coefficients() {
    return {[](std::size_t m) { return make_rat(ceil_sqrt_pow2(m), pow2(m)); },
            [](std::size_t m, long prec) { return sqrt_coefficient_sum(Nat(static_cast<unsigned long>(m)), prec); }, "sqrt"};
}

// b_m = 2 a_m + m^2 / 2^m, using sum_{k>=m} k^2/2^k = (m^2 + 2m + 3) / 2^{m-1}.
inline Coefficients adjusted(const Coefficients& a) {
    return {[a](std::size_t m) -> Rat { return 2 * a.at(m) + make_rat(Nat(static_cast<unsigned long>(m * m)), pow2(m)); },
            [a](std::size_t m, long prec) {
                Rat extra = make_rat(Nat(static_cast<unsigned long>(m * m + 2 * m + 3)) * 2, pow2(m));
                return DyadInterval(Dyadic(2)) * a.tail(m, prec + 2) + DyadInterval::of(extra, prec + 2);
            },
            a.name + "-adjusted"};
}

struct ProgressionStage {
    std::size_t m = 0;                   // modulus 2^m
    std::vector<std::uint64_t> offsets;  // i_0 < i_1 < ...; offset i_j carries source j
};

struct ProgressionMap {
    std::size_t m0 = 0;
    std::string coefficients;
    std::vector<ProgressionStage> stages;
    std::vector<std::uint64_t> remaining;  // surviving residues mod 2^{m0 + stages - 1}

    // (stage, source) for position i, when some planned stage covers it.
    std::optional<std::pair<std::size_t, std::size_t>> source_of(std::uint64_t i) const {
        for (std::size_t s = 0; s < stages.size(); ++s) {
            const auto& st = stages[s];
            std::uint64_t r = i & ((std::uint64_t{1} << st.m) - 1);
            auto it = std::lower_bound(st.offsets.begin(), st.offsets.end(), r);
            if (it != st.offsets.end() && *it == r) return std::pair{s, static_cast<std::size_t>(it - st.offsets.begin())};
        }
        return std::nullopt;
    }

    // Fraction of positions assigned by stages 0..upto-1.
    Rat coverage(std::size_t upto) const {
        Rat c = 0;
        for (std::size_t s = 0; s < upto && s < stages.size(); ++s)
            c += make_rat(Nat(static_cast<unsigned long>(stages[s].offsets.size())), pow2(stages[s].m));
        return c;
    }
};

// Least m with sum_{k>=m} c_k <= 1, deciding each comparison by escalation.
inline std::size_t tail_start(const Coefficients& c, std::size_t max_m = 64) {
    for (std::size_t m = 0; m <= max_m; ++m) {
        int cmp = compare_reals([&](long p) { return c.tail(m, p); }, [](long) { return DyadInterval(Dyadic(1)); }, 16, 128);
        if (cmp <= 0) return m;
    }
    throw indeterminate("no tail start below m = " + std::to_string(max_m));
}

inline ProgressionMap rumyantsev_plan(const Coefficients& c, std::size_t stages) {
    ProgressionMap P;
    P.coefficients = c.name;
    P.m0 = tail_start(c);
    if (P.m0 + stages > 40) throw precondition_error("plan would need moduli beyond 2^40");
    std::vector<std::uint64_t> alive;
    for (std::uint64_t i = 0; i < (std::uint64_t{1} << P.m0); ++i) alive.push_back(i);
    for (std::size_t s = 0; s < stages; ++s) {
        std::size_t m = P.m0 + s;
        if (s > 0) {
            std::uint64_t half = std::uint64_t{1} << (m - 1);
            std::vector<std::uint64_t> split;
            split.reserve(2 * alive.size());
            for (auto r : alive) split.push_back(r);
            for (auto r : alive) split.push_back(r + half);
            alive = std::move(split);  // already sorted: every r < half
        }
        Rat a = c.at(m);
        Nat want = rat_ceil(a * Rat(pow2(m)));
        if (want > alive.size()) throw exhausted("stage " + std::to_string(s) + " needs " + want.get_str() + " progressions, " +
                                                 std::to_string(alive.size()) + " remain");
        std::size_t take = to_size(want);
        P.stages.push_back({m, std::vector<std::uint64_t>(alive.begin(), alive.begin() + static_cast<long>(take))});
        alive.erase(alive.begin(), alive.begin() + static_cast<long>(take));
    }
    P.remaining = std::move(alive);
    return P;
}

// Psi(X) on [0,N) with '?' where no planned stage reaches or X is too short.
inline std::string rumyantsev_partial(const ProgressionMap& P, const Bits& X, std::size_t N) {
    std::string out(N, '?');
    for (std::size_t i = 0; i < N; ++i)
        if (auto src = P.source_of(i); src && src->second < X.size()) out[i] = X[src->second];
    return out;
}

inline Bits rumyantsev_apply(const ProgressionMap& P, const Bits& X, std::size_t N) {
    std::size_t need = 0;
    for (std::size_t i = 0; i < N; ++i) {
        auto src = P.source_of(i);
        if (!src) throw precondition_error("position " + std::to_string(i) + " is not covered by the planned stages");
        need = std::max(need, src->second + 1);
    }
    if (X.size() < need) throw length_error("input needs " + std::to_string(need) + " bits", need);
    return rumyantsev_partial(P, X, N);
}

// X restricted to the stage count at modulus 2^m, read from Psi(X)[k, k+2^m)
// given k mod 2^m: source j sits at (i_j - k) mod 2^m in the segment.
inline Bits rumyantsev_recover(const ProgressionMap& P, const std::string& segment, std::uint64_t kmod, std::size_t m) {
    if (m < P.m0 || m - P.m0 >= P.stages.size()) throw precondition_error("no planned stage has modulus 2^" + std::to_string(m));
    std::uint64_t mod = std::uint64_t{1} << m;
    if (segment.size() != mod) throw precondition_error("segment length must be 2^" + std::to_string(m));
    const auto& st = P.stages[m - P.m0];
    Bits out;
    for (auto i : st.offsets) {
        char b = segment[(i + mod - (kmod & (mod - 1))) & (mod - 1)];
        if (b != '0' && b != '1') throw precondition_error("segment cell for a recovered source is unknown");
        out.push_back(b);
    }
    return out;
}

// ---------------------------------------------------------------------------

enum class Reindex { Pullback, Pushforward };

// Pullback: Y(x) = X(ax+b) while ax+b < |X|. Pushforward: Y(ax+b) = X(x),
// every other cell fill, through the last written cell.
inline Nats affine_reindex(const Nats& X, std::size_t a, std::size_t b, Reindex dir, const Nat& fill = 0) {
    if (a == 0) throw precondition_error("reindexing needs a > 0");
    Nats Y;
    if (dir == Reindex::Pullback) {
        for (std::size_t x = 0; a * x + b < X.size(); ++x) Y.push_back(X[a * x + b]);
        return Y;
    }
    if (X.empty()) return Y;
    Y.assign(a * (X.size() - 1) + b + 1, fill);
    for (std::size_t x = 0; x < X.size(); ++x) Y[a * x + b] = X[x];
    return Y;
}

// ---------------------------------------------------------------------------
// P_a^{b,c}: b-element subsets of a avoiding phi_n(j) for j < c.

struct unresolved_error : std::runtime_error {
    std::vector<Nat> cells;
    unresolved_error(const std::string& w, std::vector<Nat> c) : std::runtime_error(w), cells(std::move(c)) {}
};

// The two parametrized families the lemmas use, registered on demand:
//   phi_{f(sigma,n)}(j) = min{i < |sigma| : phi_n(j) = sigma(i)}
//   phi_{g(n,j)}(y)     = phi_n(j)
class PabcIndexer {
  public:
    PabcIndexer(ProgramRegistry& reg, std::uint64_t s) : reg_(reg), s_(s) {}

    Nat f(const Nats& sigma, const Nat& n) {
        auto key = std::pair{sigma, n};
        if (auto it = f_.find(key); it != f_.end()) return it->second;
        const ProgramRegistry* reg = &reg_;
        std::uint64_t s = s_;
        Nat e = reg_.register_closure("theta" + show(sigma) + "@" + n.get_str(), [reg, sigma, n, s](const Nat& j) -> std::optional<Conv> {
            auto r = reg->run(n, j, s);
            if (!r) return std::nullopt;
            for (std::size_t i = 0; i < sigma.size(); ++i)
                if (sigma[i] == r->value) return Conv{Nat(static_cast<unsigned long>(i)), r->steps};
            return std::nullopt;
        });
        f_.emplace(key, e);
        return e;
    }

    Nat g(const Nat& n, const Nat& j) {
        auto key = std::pair{n, j};
        if (auto it = g_.find(key); it != g_.end()) return it->second;
        const ProgramRegistry* reg = &reg_;
        std::uint64_t s = s_;
        Nat e = reg_.register_closure("shift" + n.get_str() + "," + j.get_str(),
                                      [reg, n, j, s](const Nat&) { return reg->run(n, j, s); });
        g_.emplace(key, e);
        return e;
    }

    std::optional<Nat> phi(const Nat& e, const Nat& x) const { return reg_.step_eval(e, x, s_); }
    std::uint64_t budget() const { return s_; }

  private:
    ProgramRegistry& reg_;
    std::uint64_t s_;
    std::map<std::pair<Nats, Nat>, Nat> f_;
    std::map<std::pair<Nat, Nat>, Nat> g_;
};

// X(e), absent where the table has no entry.
using Avoider = std::function<std::optional<Nat>(const Nat& e)>;

// Least value below a that differs from every converged phi_e(j), j < c.
inline Avoider greedy_avoider(const PabcIndexer& ix, std::size_t a, std::size_t c) {
    return [&ix, a, c](const Nat& e) -> std::optional<Nat> {
        std::set<Nat> hit;
        for (std::size_t j = 0; j < c; ++j)
            if (auto v = ix.phi(e, Nat(static_cast<unsigned long>(j)))) hit.insert(*v);
        for (std::size_t v = 0; v < a; ++v)
            if (!hit.count(Nat(static_cast<unsigned long>(v)))) return Nat(static_cast<unsigned long>(v));
        return std::nullopt;
    };
}

struct PabcCell {
    std::vector<Nat> set;       // sorted
    std::set<Nat> consulted;    // X cells read
    std::size_t verified = 0;   // converged phi_n(j) checked against the set
    std::size_t open = 0;       // phi_n(j) not converged within the budget
};

namespace detail {

inline void check_avoids(PabcCell& r, const PabcIndexer& ix, const Nat& n, std::size_t c, const char* what) {
    for (std::size_t j = 0; j < c; ++j) {
        auto v = ix.phi(n, Nat(static_cast<unsigned long>(j)));
        if (!v) {
            ++r.open;
            continue;
        }
        if (std::binary_search(r.set.begin(), r.set.end(), *v))
            throw std::logic_error(std::string(what) + " contains phi_n(j) at n=" + n.get_str() + ", j=" + std::to_string(j));
        ++r.verified;
    }
}

}  // namespace detail

// F_d(n) for X in P_a^{1,c}: F_0 = {X(n)}, F_{t+1}(n) = F_t(n) + {sigma_S(X(f(sigma_S, n)))}
// with S = (a+t+1) \ F_t(n).
inline PabcCell pabc_lift(const Avoider& X, std::size_t a, std::size_t c, std::size_t d, PabcIndexer& ix, const Nat& n) {
    if (a < 2 || c < 1) throw precondition_error("lift needs a >= 2 and c >= 1");
    PabcCell r;
    auto read = [&](const Nat& e) {
        auto v = X(e);
        if (!v) throw unresolved_error("X undefined at a consulted cell", {e});
        if (*v >= a) throw precondition_error("X(" + e.get_str() + ") is not below a");
        for (std::size_t j = 0; j < c; ++j)
            if (auto p = ix.phi(e, Nat(static_cast<unsigned long>(j))); p && *p == *v)
                throw precondition_error("X fails to avoid phi_" + e.get_str() + "(" + std::to_string(j) + ")");
        r.consulted.insert(e);
        return *v;
    };
    std::set<Nat> F{read(n)};
    for (std::size_t t = 0; t < d; ++t) {
        Nats S;
        for (std::size_t v = 0; v < a + t + 1; ++v)
            if (!F.count(Nat(static_cast<unsigned long>(v)))) S.push_back(Nat(static_cast<unsigned long>(v)));
        if (S.size() != a) throw std::logic_error("complement has the wrong size");
        Nat x = read(ix.f(S, n));
        F.insert(S[x.get_ui()]);
    }
    r.set.assign(F.begin(), F.end());
    if (r.set.size() != d + 1) throw std::logic_error("lift produced the wrong cardinality");
    detail::check_avoids(r, ix, n, c, "F_d(n)");
    return r;
}

// G(n) for F in P_{a+d}^{d+1,e+1}, d = (c-1)a + b: the first c+b members of
// H(n) = F(n) meet F(g(n, e+i+1)) for i < c-1.
inline PabcCell pabc_merge(const std::function<PabcCell(const Nat&)>& F, std::size_t a, std::size_t b, std::size_t c, std::size_t e,
                           PabcIndexer& ix, const Nat& n) {
    if (a < 2 || c < 1) throw precondition_error("merge needs a >= 2 and c >= 1");
    std::size_t d = (c - 1) * a + b;
    std::size_t top = c * a + b;
    PabcCell r;
    auto take = [&](const Nat& m) {
        PabcCell fc = F(m);
        if (fc.set.size() != d + 1 || (!fc.set.empty() && fc.set.back() >= top))
            throw precondition_error("F(" + m.get_str() + ") is not a (d+1)-subset of ca+b");
        r.consulted.insert(fc.consulted.begin(), fc.consulted.end());
        return std::set<Nat>(fc.set.begin(), fc.set.end());
    };
    std::set<Nat> H = take(n);
    for (std::size_t i = 0; i + 1 < c; ++i) {
        std::set<Nat> other = take(ix.g(n, Nat(static_cast<unsigned long>(e + i + 1))));
        std::set<Nat> both;
        std::set_intersection(H.begin(), H.end(), other.begin(), other.end(), std::inserter(both, both.begin()));
        H = std::move(both);
    }
    if (H.size() < c + b) throw std::logic_error("|H(n)| fell below c+b");
    r.set.assign(H.begin(), std::next(H.begin(), static_cast<long>(c + b)));
    detail::check_avoids(r, ix, n, c + e, "G(n)");
    return r;
}

// c * binom(ca+b, a)
inline Nat pabc_cell_bound(std::size_t a, std::size_t b, std::size_t c) {
    Nat bin;
    mpz_bin_uiui(bin.get_mpz_t(), c * a + b, a);
    return Nat(static_cast<unsigned long>(c)) * bin;
}

// ---------------------------------------------------------------------------
// <delta, c>-shift complexity of a finite string against K_s. A violation is
// a code shorter than delta|tau| - c, which stays a violation at every larger
// budget. Substrings whose threshold exceeds 1 and have no such code yet stay
// open: K_s only bounds K from above.

struct ShiftReport {
    enum Status { Consistent, Violated, Unresolved } status = Consistent;
    std::size_t pos = 0, len = 0, code_length = 0;  // the violation
    std::size_t open = 0;                            // distinct open substrings
    std::vector<std::pair<std::size_t, std::size_t>> open_sample;  // (pos, len), first few
    std::size_t checked = 0;                         // distinct substrings examined
};

inline const char* status_name(ShiftReport::Status s) {
    switch (s) {
        case ShiftReport::Consistent: return "consistent";
        case ShiftReport::Violated: return "violated";
        default: return "unresolved";
    }
}

inline ShiftReport shift_complex_check(const Bits& w, const Rat& delta, const Rat& c, const UniversalMachine& U) {
    if (!is_bits(w)) throw domain_error("shift check needs a bit string");
    ShiftReport r;
    Rat top = delta * Rat(Nat(static_cast<unsigned long>(w.size()))) - c;
    std::size_t max_code = sgn(top) > 0 ? to_size(rat_ceil(top)) - 1 : 0;
    max_code = std::min<std::uint64_t>(max_code, U.stage());
    std::map<Bits, std::size_t> shortest;
    if (max_code > 0)
        for (auto& [code, out] : U.domain(max_code)) {
            auto it = shortest.find(out);
            if (it == shortest.end() || code.size() < it->second) shortest[out] = code.size();
        }
    for (std::size_t len = 1; len <= w.size(); ++len) {
        Rat t = delta * Rat(Nat(static_cast<unsigned long>(len))) - c;
        std::set<Bits> seen;
        for (std::size_t k = 0; k + len <= w.size(); ++k) {
            Bits tau = w.substr(k, len);
            if (!seen.insert(tau).second) continue;
            ++r.checked;
            if (t <= 1) continue;
            auto it = shortest.find(tau);
            if (it != shortest.end() && Rat(Nat(static_cast<unsigned long>(it->second))) < t) {
                r.status = ShiftReport::Violated;
                r.pos = k;
                r.len = len;
                r.code_length = it->second;
                return r;
            }
            ++r.open;
            if (r.open_sample.size() < 8) r.open_sample.push_back({k, len});
        }
    }
    r.status = r.open ? ShiftReport::Unresolved : ShiftReport::Consistent;
    return r;
}

}  // namespace avlab
