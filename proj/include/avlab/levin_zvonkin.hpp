#pragma once
// Staged semimeasures and their conversion into monotone machines, with the
// construction's invariants checked at every stage.

#include "encodings.hpp"

#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace avlab {

struct hypothesis_error : std::invalid_argument {
    std::string clause;
    std::size_t stage;
    hypothesis_error(std::string c, std::size_t s, const std::string& w)
        : std::invalid_argument("hypothesis (" + c + ") fails at stage " + std::to_string(s) + ": " + w),
          clause(std::move(c)), stage(s) {}
};

namespace detail {

template <class Seq>
bool has_prefix_in(const std::set<Seq>& T, const Seq& x) {
    for (std::size_t l = 0; l <= x.size(); ++l)
        if (T.count(Seq(x.begin(), x.begin() + static_cast<long>(l)))) return true;
    return false;
}

// [[R]] = [[S]] \ [[T]] with R at depth s: depth-s extensions of S with no prefix in T.
template <class Seq, class Arity, class Push>
std::set<Seq> cyl_difference(const std::set<Seq>& S, const std::set<Seq>& T, std::size_t s, Arity arity, Push push) {
    std::set<Seq> R;
    std::vector<Seq> stack;
    for (auto& x : S) {
        if (x.size() > s) throw precondition_error("set difference: string longer than the depth");
        stack.push_back(x);
    }
    while (!stack.empty()) {
        Seq x = std::move(stack.back());
        stack.pop_back();
        if (has_prefix_in(T, x)) continue;
        if (x.size() == s) {
            R.insert(x);
            continue;
        }
        std::size_t a = arity(x.size());
        for (std::size_t i = a; i-- > 0;) {
            Seq y = x;
            push(y, i);
            stack.push_back(std::move(y));
        }
    }
    return R;
}

inline std::set<Bits> bits_difference(const std::set<Bits>& S, const std::set<Bits>& T, std::size_t s) {
    return cyl_difference(S, T, s, [](std::size_t) { return std::size_t{2}; },
                          [](Bits& y, std::size_t i) { y.push_back(i ? '1' : '0'); });
}

// Measure of the union of binary cylinders.
inline Rat cylinder_measure(const std::vector<Bits>& xs) {
    std::set<Bits> all(xs.begin(), xs.end());
    Rat m = 0;
    for (auto& t : all) {
        bool minimal = true;
        for (std::size_t l = 0; l < t.size() && minimal; ++l)
            if (all.count(t.substr(0, l))) minimal = false;
        if (minimal) m += make_rat(1, pow2(t.size()));
    }
    return m;
}

}  // namespace detail

inline std::set<Nats> lz_set_difference(const std::set<Nats>& S, const std::set<Nats>& T, std::size_t s,
                                        const BoundFamily& h) {
    for (auto& t : T)
        if (t.size() > s) throw precondition_error("set difference: string longer than the depth");
    return detail::cyl_difference(S, T, s, [&](std::size_t n) { return to_size(h.at(n)); },
                                  [](Nats& y, std::size_t i) { y.emplace_back(static_cast<unsigned long>(i)); });
}

// One change at the transition s -> s+1: nu(sigma, s+1) = nu(sigma, s) + n / 2^{s+1}.
struct LZEvent {
    Nats sigma;
    Nat n;
};

// nu(., 0) = 0 and at most one change per stage, so hypotheses (i), (iii) and
// (iv) hold by representation; validate() checks (ii), (v) and nu(<>) <= 1.
class StagedSemimeasure {
  public:
    StagedSemimeasure(BoundFamily h, std::vector<std::optional<LZEvent>> events)
        : h_(std::move(h)), events_(std::move(events)) {}

    // Reads a rule on h^{<S} and converts it, rejecting (i), (iii), (iv) failures.
    template <class Rule>
    static StagedSemimeasure from_rule(const BoundFamily& h, std::size_t S, Rule nu) {
        Nat total = 0;
        for (std::size_t len = 0; len < S; ++len) total += h.level_size(len);
        if (total > 1 << 16) throw precondition_error("from_rule: h^{<S} too large to scan");
        std::vector<Nats> words;
        for (Nat k = 0; k < total; ++k) words.push_back(shortlex_unindex(k, h));
        std::vector<std::optional<LZEvent>> ev;
        for (std::size_t s = 0; s < S; ++s) {
            std::optional<LZEvent> e;
            for (auto& w : words) {
                Rat a = s == 0 ? Rat(0) : Rat(nu(w, s)), b = nu(w, s + 1);
                if (s == 0 && Rat(nu(w, 0)) != 0) throw hypothesis_error("ii", 0, "nonzero value at stage 0");
                if (!is_dyadic(b)) throw hypothesis_error("i", s + 1, "non-dyadic value at " + show(w));
                if (a == b) continue;
                if (e) throw hypothesis_error("iii", s, "two strings change: " + show(e->sigma) + ", " + show(w));
                Rat inc = (b - a) * Rat(pow2(s + 1));
                if (sgn(inc) < 0 || inc.get_den() != 1)
                    throw hypothesis_error("iv", s, "increment at " + show(w) + " is not n/2^{s+1}");
                e = LZEvent{w, inc.get_num()};
            }
            ev.push_back(e);
        }
        StagedSemimeasure out(h, std::move(ev));
        out.validate();
        return out;
    }

    const BoundFamily& family() const { return h_; }
    std::size_t stages() const { return events_.size(); }
    const std::vector<std::optional<LZEvent>>& events() const { return events_; }

    Rat value(const Nats& sigma, std::size_t s) const {
        Rat v = 0;
        for (std::size_t t = 0; t < s && t < events_.size(); ++t)
            if (events_[t] && events_[t]->sigma == sigma) v += make_rat(events_[t]->n, pow2(t + 1));
        return v;
    }

    // Strings that carry mass at some stage.
    std::set<Nats> support() const {
        std::set<Nats> out;
        for (auto& e : events_)
            if (e && sgn(e->n) > 0) out.insert(e->sigma);
        return out;
    }

    void validate() const {
        for (std::size_t t = 0; t < events_.size(); ++t) {
            if (!events_[t]) continue;
            const LZEvent& e = *events_[t];
            if (sgn(e.n) < 0) throw hypothesis_error("iv", t, "negative increment");
            if (!in_bounds(e.sigma, h_)) throw hypothesis_error("i", t, show(e.sigma) + " is outside the alphabet bound");
            if (sgn(e.n) > 0 && e.sigma.size() >= t + 1)
                throw hypothesis_error("ii", t + 1, show(e.sigma) + " is too long to carry mass");
        }
        auto supp = support();
        for (std::size_t s = 0; s <= events_.size(); ++s) {
            if (value({}, s) > 1) throw hypothesis_error("v", s, "root mass exceeds 1");
            std::set<Nats> parents;
            for (auto& w : supp)
                if (!w.empty()) parents.insert(Nats(w.begin(), w.end() - 1));
            for (auto& p : parents) {
                Rat kids = 0;
                for (auto& w : supp)
                    if (w.size() == p.size() + 1 && is_prefix_of(p, w)) kids += value(w, s);
                if (kids > value(p, s)) throw hypothesis_error("v", s, "children of " + show(p) + " outweigh it");
            }
        }
    }

  private:
    BoundFamily h_;
    std::vector<std::optional<LZEvent>> events_;

    static bool is_dyadic(const Rat& q) {
        Nat d = q.get_den();
        return (d & (d - 1)) == 0;
    }
};

// Random staged semimeasure: each stage either idles or raises one string by
// n/2^{s+1}, n drawn below the available slack.
template <class Rng>
StagedSemimeasure random_staged(const BoundFamily& h, std::size_t stages, std::size_t max_depth, Rng& rng) {
    std::vector<std::optional<LZEvent>> ev;
    std::map<Nats, Rat> val;
    auto get = [&](const Nats& w) {
        auto it = val.find(w);
        return it == val.end() ? Rat(0) : it->second;
    };
    for (std::size_t s = 0; s < stages; ++s) {
        std::vector<Nats> cand{{}};
        for (std::size_t len = 1; len <= std::min(s, max_depth); ++len) {
            std::vector<Nats> next;
            for (auto& c : cand)
                if (c.size() == len - 1)
                    for (Nat i = 0; i < h.at(len - 1); ++i) {
                        Nats w = c;
                        w.push_back(i);
                        next.push_back(w);
                    }
            cand.insert(cand.end(), next.begin(), next.end());
        }
        std::vector<std::pair<Nats, Nat>> options;
        for (auto& w : cand) {
            Rat slack;
            if (w.empty()) {
                slack = 1 - get(w);
            } else {
                Nats p(w.begin(), w.end() - 1);
                slack = get(p);
                for (Nat i = 0; i < h.at(p.size()); ++i) {
                    Nats sib = p;
                    sib.push_back(i);
                    slack -= get(sib);
                }
            }
            Nat top = rat_floor(slack * Rat(pow2(s + 1)));
            if (sgn(top) > 0) options.push_back({w, top});
        }
        if (options.empty() || rng() % 4 == 0) {
            ev.push_back(std::nullopt);
            continue;
        }
        auto& [w, top] = options[rng() % options.size()];
        Nat n = 1 + Nat(static_cast<unsigned long>(rng() % top.get_ui()));
        val[w] = get(w) + make_rat(n, pow2(s + 1));
        ev.push_back(LZEvent{w, n});
    }
    return StagedSemimeasure(h, std::move(ev));
}

// Pairs (tau, sigma) with the stage at which each was enumerated.
struct MonotoneMachineTable {
    struct Pair {
        Bits tau;
        Nats sigma;
        std::size_t stage;
    };
    std::vector<Pair> pairs;

    // D_s(sigma) = inputs mapped to sigma by stage s.
    std::vector<Bits> D(const Nats& sigma, std::size_t s) const {
        std::vector<Bits> out;
        for (auto& p : pairs)
            if (p.stage <= s && p.sigma == sigma) out.push_back(p.tau);
        return out;
    }

    std::set<Nats> outputs() const {
        std::set<Nats> out;
        for (auto& p : pairs) out.insert(p.sigma);
        return out;
    }
};

// nu_M(sigma) = measure of the inputs whose output extends sigma.
inline Rat machine_semimeasure(const MonotoneMachineTable& M, const Nats& sigma) {
    std::vector<Bits> xs;
    for (auto& p : M.pairs)
        if (is_prefix_of(sigma, p.sigma)) xs.push_back(p.tau);
    return detail::cylinder_measure(xs);
}

// Checks (I)-(V) at stage s; returns the failing clause, if any.
inline std::optional<std::string> lz_invariant_failure(const MonotoneMachineTable& M, const StagedSemimeasure& nu,
                                                       std::size_t s) {
    std::vector<const MonotoneMachineTable::Pair*> live;
    for (auto& p : M.pairs)
        if (p.stage <= s) live.push_back(&p);
    for (std::size_t i = 0; i < live.size(); ++i)
        for (std::size_t j = i + 1; j < live.size(); ++j)
            if (compatible(live[i]->tau, live[j]->tau) && !is_prefix_of(live[i]->sigma, live[j]->sigma) &&
                !is_prefix_of(live[j]->sigma, live[i]->sigma))
                return "I: compatible inputs " + live[i]->tau + ", " + live[j]->tau + " with incompatible outputs";
    std::set<Nats> sigmas = nu.support();
    for (auto& o : M.outputs()) sigmas.insert(o);
    for (auto& sg : sigmas) {
        auto d = M.D(sg, s);
        for (std::size_t i = 0; i < d.size(); ++i) {
            if (d[i].size() > s) return "IV: " + d[i] + " longer than the stage in D(" + show(sg) + ")";
            for (std::size_t j = i + 1; j < d.size(); ++j)
                if (compatible(d[i], d[j])) return "II: D(" + show(sg) + ") is not prefix-free";
        }
        if (detail::cylinder_measure(d) != nu.value(sg, s)) return "III: measure of D(" + show(sg) + ") differs from nu";
        if (!sg.empty()) {
            Nats parent(sg.begin(), sg.end() - 1);
            std::set<Bits> pd;
            for (auto& t : M.D(parent, s)) pd.insert(t);
            for (auto& t : d)
                if (!detail::has_prefix_in(pd, t)) return "V: D(" + show(sg) + ") leaves the cylinders of its parent";
        }
    }
    return std::nullopt;
}

// The staged construction. Stage s+1 adds the first n lexicographic depth-(s+1)
// strings of the free region: the complement of D(<>) for the root, else
// D(sigma_-) minus the D-sets of all children of sigma_-.
inline MonotoneMachineTable lz_build(const StagedSemimeasure& nu, std::size_t S, bool check = true) {
    nu.validate();
    const BoundFamily& h = nu.family();
    MonotoneMachineTable M;
    std::map<Nats, std::set<Bits>> D;
    for (std::size_t s = 0; s < S && s < nu.stages(); ++s) {
        if (auto& e = nu.events()[s]; e && sgn(e->n) > 0) {
            std::set<Bits> from, minus;
            if (e->sigma.empty()) {
                from.insert("");
                minus = D[{}];
            } else {
                Nats parent(e->sigma.begin(), e->sigma.end() - 1);
                from = D[parent];
                for (Nat i = 0; i < h.at(parent.size()); ++i) {
                    Nats c = parent;
                    c.push_back(i);
                    minus.insert(D[c].begin(), D[c].end());
                }
            }
            std::set<Bits> R = detail::bits_difference(from, minus, s + 1);
            if (Nat(static_cast<unsigned long>(R.size())) < e->n)
                throw hypothesis_error("v", s, "free region holds fewer than n strings");
            auto it = R.begin();
            for (Nat k = 0; k < e->n; ++k, ++it) {
                D[e->sigma].insert(*it);
                M.pairs.push_back({*it, e->sigma, s + 1});
            }
        }
        if (check)
            if (auto f = lz_invariant_failure(M, nu, s + 1)) throw std::logic_error("construction invariant " + *f);
    }
    return M;
}

}  // namespace avlab
