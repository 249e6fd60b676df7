#pragma once
// Desk-scale replays of the two forcing arguments with functionals mocked as
// finite use-monotone tables. Every stage re-verifies its conditions.

#include "bushy.hpp"

#include <sstream>
#include <string>
#include <vector>

namespace avlab {

// Gamma^tau(theta) = value for every tau extending a listed use.
struct MockFunctional {
    std::vector<std::pair<Nats, Nat>> table;

    void validate() const {
        for (std::size_t i = 0; i < table.size(); ++i)
            for (std::size_t j = i + 1; j < table.size(); ++j) {
                auto& [a, x] = table[i];
                auto& [b, y] = table[j];
                if ((is_prefix_of(a, b) || is_prefix_of(b, a)) && x != y)
                    throw precondition_error("functional not use-monotone: " + show(a) + " and " + show(b));
            }
    }

    std::optional<Nat> at(const Nats& tau) const {
        for (auto& [u, v] : table)
            if (is_prefix_of(u, tau)) return v;
        return std::nullopt;
    }

    // Uses whose value satisfies pred, as a bad set.
    template <class Pred>
    BadSet uses(const BoundFamily& h, Pred pred) const {
        std::set<Nats> s;
        for (auto& [u, v] : table)
            if (pred(v)) s.insert(u);
        return BadSet(std::move(s), h);
    }
};

// <stem, bad> with bad k-small above stem, k-closed, and k <= q(|stem|-1).
struct StemCondition {
    Nats stem;
    BadSet bad;
    std::size_t k = 2;
};

inline std::optional<std::string> condition_failure(const StemCondition& c) {
    const BoundFamily& q = c.bad.h;
    if (c.stem.empty()) return "empty stem";
    if (!in_bounds(c.stem, q)) return "stem outside the alphabet bound";
    if (Nat(static_cast<unsigned long>(c.k)) > q.at(c.stem.size() - 1)) return "k exceeds q(|stem|-1)";
    if (is_big(c.bad, c.stem, c.k)) return "bad set is k-big above the stem";
    if (!is_closed(c.bad, c.k)) return "bad set is not k-closed";
    return std::nullopt;
}

// Strings that already agree with psi somewhere: {tau : tau(n) = psi(n)}, as
// generators at each length n+1 <= depth.
inline BadSet avoid_bad_set(const std::map<std::size_t, Nat>& psi, const BoundFamily& h, std::size_t depth,
                            std::size_t cap = 200000) {
    std::set<Nats> gens;
    for (auto& [n, v] : psi) {
        if (n >= depth || v >= h.at(n)) continue;
        if (h.level_size(n) > cap) throw exhausted("avoid set too large to list at length " + std::to_string(n + 1));
        for (Nat r = 0; r < h.level_size(n); ++r) {
            Nats w(n);
            Nat x = r;
            for (std::size_t i = n; i-- > 0;) {
                w[i] = x % h.at(i);
                x /= h.at(i);
            }
            w.push_back(v);
            gens.insert(w);
        }
        if (gens.size() > cap) throw exhausted("avoid set exceeds the generator cap");
    }
    BadSet B(std::move(gens), h);
    // Drop members that already extend another member.
    BadSet out;
    out.h = h;
    for (auto& w : B.strings)
        if (!out.covers(w)) out.strings.insert(w);
    return out;
}

struct Step3Result {
    StemCondition cond;
    int which_case = 0;  // 1: bad set grown to a closure, 2: computation forced
    std::size_t budget = 0;
    std::optional<Nat> forced;
    std::string trace;
};

// One density step. P = p1(theta) bounds the outputs that count; the stem is
// first stretched to length m, then Case I or Case II runs at x = |stem|.
inline Step3Result forcing_step3(const StemCondition& in, const MockFunctional& G, const Nat& P, std::size_t m) {
    if (auto f = condition_failure(in)) throw precondition_error("step 3 input: " + *f);
    G.validate();
    const BoundFamily& q = in.bad.h;
    StemCondition c = in;
    if (c.stem.size() < m) {
        auto s = leftmost_avoiding(c.stem, m, c.bad, q);
        if (!s) throw exhausted("no extension of the stem to length " + std::to_string(m));
        c.stem = *s;
    }
    std::size_t x = c.stem.size();
    std::size_t qx1 = q.small(x - 1);
    std::size_t b = to_size(P) * qx1;
    BadSet A = G.uses(q, [&](const Nat& v) { return v < P; });
    Step3Result r;
    r.budget = b;
    std::ostringstream tr;
    if (b == 0 || !is_big(A, c.stem, b)) {
        std::size_t cb = b + c.k - 1;
        BadSet C = closure(A.unite(c.bad), cb);
        if (q.at(x) < cb) throw exhausted("q(" + std::to_string(x) + ") is below the closure budget " + std::to_string(cb));
        auto t = leftmost_avoiding(c.stem, x + 1, C, q);
        if (!t) throw exhausted("no extension outside the closure");
        r.cond = {*t, C, cb};
        r.which_case = 1;
        tr << "case I c=" << cb;
    } else {
        std::optional<Nat> j;
        for (Nat v = 0; v < P && !j; ++v)
            if (is_big(G.uses(q, [&](const Nat& w) { return w == v; }), c.stem, qx1)) j = v;
        if (!j) throw std::logic_error("splitting lemma failed: no single output is big");
        BadSet Aj = G.uses(q, [&](const Nat& w) { return w == *j; });
        Nats t = find_extension(Aj, c.bad, c.stem, c.k);
        r.cond = {t, c.bad, c.k};
        r.which_case = 2;
        r.forced = *j;
        tr << "case II forced=" << *j;
    }
    if (auto f = condition_failure(r.cond)) throw std::logic_error("step 3 output: " + *f);
    if (!is_prefix_of(in.stem, r.cond.stem) || !in.bad.within(r.cond.bad)) throw std::logic_error("step 3 output does not extend");
    tr << " stem=" << show(r.cond.stem) << " bad=" << r.cond.bad.strings.size() << " b=" << b << " k=" << r.cond.k;
    r.trace = tr.str();
    return r;
}

// One diagonalization target of Step 4: the functional and (q o u)(theta).
struct Step4Target {
    MockFunctional gamma;
    Nat qu;
};

struct Step4Stage {
    Nats stem;
    BadSet bad;
    std::size_t n = 0;
    int which_case = 0;  // 1: agreement forced, 2: outputs made bad
    std::optional<Nat> forced;
    std::size_t budget = 0;
    std::string trace;
};

// sigma_i in p2^{n_i} \ B_i, B_i p2(n_i)-small above sigma_i, both nested.
inline std::optional<std::string> step4_failure(const Step4Stage& prev, const Step4Stage& cur, const BoundFamily& p2) {
    if (cur.stem.size() != cur.n) return "stem length differs from n_i";
    if (cur.bad.covers(cur.stem)) return "stem lies in the bad set";
    if (is_big(cur.bad, cur.stem, p2.small(cur.n))) return "bad set is p2(n_i)-big above the stem";
    if (!is_prefix_of(prev.stem, cur.stem)) return "stems not nested";
    if (!prev.bad.within(cur.bad)) return "bad sets not nested";
    return std::nullopt;
}

inline std::vector<Step4Stage> forcing_step4(const BoundFamily& p2, const std::vector<Step4Target>& targets,
                                             const std::map<std::size_t, Nat>& psi2, std::size_t n1, std::size_t depth,
                                             std::size_t stages) {
    if (n1 == 0) throw precondition_error("n_1 must be positive");
    std::vector<Step4Stage> out;
    Step4Stage s;
    s.bad = avoid_bad_set(psi2, p2, depth);
    s.n = n1;
    auto first = leftmost_avoiding({}, n1, s.bad, p2);
    if (!first) throw exhausted("no first stem avoids psi2");
    s.stem = *first;
    if (is_big(s.bad, s.stem, p2.small(n1))) throw std::logic_error("initial bad set is big above the stem");
    s.trace = "stage 1 start stem=" + show(s.stem) + " bad=" + std::to_string(s.bad.strings.size());
    out.push_back(s);
    for (std::size_t i = 0; i + 1 < stages; ++i) {
        const Step4Stage& cur = out.back();
        Step4Target tg = i < targets.size() ? targets[i] : Step4Target{{}, 1};
        tg.gamma.validate();
        Nat pn = p2.at(cur.n);
        std::size_t k = cur.n + 1;
        while (p2.at(k) < (tg.qu + 1) * pn) {
            if (++k > depth) throw exhausted("no k within the depth bound at stage " + std::to_string(i + 1));
        }
        if (k > depth) throw exhausted("k beyond the depth bound at stage " + std::to_string(i + 1));
        auto rho = leftmost_avoiding(cur.stem, k, cur.bad, p2);
        if (!rho) throw exhausted("no rho extends the stem at stage " + std::to_string(i + 1));
        std::size_t width = to_size(pn);
        std::optional<Nat> j;
        for (Nat v = 0; v < tg.qu && !j; ++v)
            if (is_big(tg.gamma.uses(p2, [&](const Nat& w) { return w == v; }), *rho, width)) j = v;
        Step4Stage nx;
        std::ostringstream tr;
        if (j) {
            BadSet Aj = tg.gamma.uses(p2, [&](const Nat& w) { return w == *j; });
            Nats tau = find_extension(Aj, cur.bad, *rho, width);
            nx.bad = cur.bad;
            nx.n = std::max(k, tau.size());
            auto st = leftmost_avoiding(tau, nx.n, nx.bad, p2);
            if (!st) throw exhausted("no stem past the forced extension");
            nx.stem = *st;
            nx.which_case = 1;
            nx.forced = *j;
            tr << "case 1 forced=" << *j;
        } else {
            std::size_t qu = to_size(tg.qu);
            std::size_t c = width * (qu + 1) - qu;
            BadSet C = tg.gamma.uses(p2, [&](const Nat& w) { return w < tg.qu; }).unite(cur.bad);
            if (is_big(C, *rho, c)) throw std::logic_error("union of outputs is c-big above rho");
            nx.bad = closure(C, c);
            nx.n = k;
            auto st = leftmost_avoiding(*rho, k, nx.bad, p2);
            if (!st) throw exhausted("no stem outside the closure");
            nx.stem = *st;
            nx.which_case = 2;
            nx.budget = c;
            tr << "case 2 c=" << c;
        }
        if (auto f = step4_failure(cur, nx, p2)) throw std::logic_error("step 4 invariant: " + *f);
        std::ostringstream line;
        line << "stage " << i + 2 << " " << tr.str() << " k=" << k << " rho=" << show(*rho) << " stem=" << show(nx.stem)
             << " n=" << nx.n << " bad=" << nx.bad.strings.size() << " p2(n)=" << p2.at(nx.n);
        nx.trace = line.str();
        out.push_back(nx);
    }
    return out;
}

}  // namespace avlab
