#pragma once
// k-bushy trees: big/small, k-closures, the B/C labeling behind smallness
// preservation, and extension finding. A bad set is given by generators and
// always read upward closed; a witness tree's leaves may lie anywhere in B^.

#include "encodings.hpp"
#include "order_fn.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace avlab {

struct BadSet {
    std::set<Nats> strings;
    BoundFamily h = BoundFamily::constant(2);

    BadSet() = default;
    BadSet(std::set<Nats> s, BoundFamily fam) : strings(std::move(s)), h(std::move(fam)) {
        for (auto& w : strings)
            if (!in_bounds(w, h)) throw domain_error("bad string " + show(w) + " outside the alphabet bound");
    }

    std::size_t depth() const {
        std::size_t d = 0;
        for (auto& w : strings) d = std::max(d, w.size());
        return d;
    }

    // tau in B^ (some member is a prefix of tau).
    bool covers(const Nats& tau) const {
        for (std::size_t l = 0; l <= tau.size(); ++l)
            if (strings.count(Nats(tau.begin(), tau.begin() + static_cast<long>(l)))) return true;
        return false;
    }

    // Members extending tau form one lexicographic run starting at tau.
    bool has_extension(const Nats& tau) const {
        auto it = strings.lower_bound(tau);
        return it != strings.end() && is_prefix_of(tau, *it);
    }

    BadSet unite(const BadSet& o) const {
        BadSet r = *this;
        r.strings.insert(o.strings.begin(), o.strings.end());
        return r;
    }

    // B^ subset of o^.
    bool within(const BadSet& o) const {
        return std::all_of(strings.begin(), strings.end(), [&](const Nats& w) { return o.covers(w); });
    }
};

namespace detail {

// big(tau) = tau in B^, or at least k children big; nodes with nothing of B
// below them and no member above are small, which cuts the search at depth(B).
class BigSolver {
  public:
    BigSolver(const BadSet& B, std::size_t k) : B_(B), k_(k) {
        if (k == 0) throw precondition_error("bushiness must be at least 1");
    }

    bool big(const Nats& tau) {
        if (B_.covers(tau)) return true;
        if (!B_.has_extension(tau)) return false;
        if (auto it = memo_.find(tau); it != memo_.end()) return it->second;
        std::size_t count = 0;
        for (auto& c : children_with_extensions(tau)) {
            if (big(c) && ++count >= k_) break;
        }
        bool r = count >= k_;
        memo_.emplace(tau, r);
        return r;
    }

    std::vector<Nats> children_with_extensions(const Nats& tau) const {
        std::vector<Nats> out;
        for (auto it = B_.strings.lower_bound(tau); it != B_.strings.end() && is_prefix_of(tau, *it); ++it) {
            if (it->size() == tau.size()) continue;
            Nats c(it->begin(), it->begin() + static_cast<long>(tau.size() + 1));
            if (out.empty() || out.back() != c) out.push_back(c);
        }
        return out;
    }

  private:
    const BadSet& B_;
    std::size_t k_;
    std::map<Nats, bool> memo_;
};

}  // namespace detail

inline bool is_big(const BadSet& B, const Nats& sigma, std::size_t k) {
    if (!in_bounds(sigma, B.h)) throw domain_error("stem " + show(sigma) + " outside the alphabet bound");
    return detail::BigSolver(B, k).big(sigma);
}

// Upward closure of {tau : B is k-big above tau}, as its minimal members.
inline BadSet closure(const BadSet& B, std::size_t k) {
    detail::BigSolver solver(B, k);
    std::set<Nats> cand;
    for (auto& w : B.strings)
        for (std::size_t l = 0; l <= w.size(); ++l) cand.insert(Nats(w.begin(), w.begin() + static_cast<long>(l)));
    BadSet out;
    out.h = B.h;
    for (auto& c : cand) {  // lexicographic order visits prefixes first
        if (out.covers(c)) continue;
        if (solver.big(c)) out.strings.insert(c);
    }
    return out;
}

inline bool is_closed(const BadSet& B, std::size_t k) { return closure(B, k).within(B); }

// T prefix-closed, every node compatible with sigma, every node extending sigma
// a leaf or with >= k children in T, leaves extending sigma accepted by leaf_ok.
template <class LeafOk>
std::optional<std::string> bushy_tree_failure(const std::set<Nats>& T, const Nats& sigma, std::size_t k, LeafOk leaf_ok) {
    if (!T.count(sigma)) return "stem missing";
    for (auto& t : T) {
        if (!is_prefix_of(t, sigma) && !is_prefix_of(sigma, t)) return show(t) + " incompatible with the stem";
        if (!t.empty() && !T.count(Nats(t.begin(), t.end() - 1))) return show(t) + " has no parent";
        if (!is_prefix_of(sigma, t)) continue;
        std::size_t kids = 0;
        for (auto it = T.upper_bound(t); it != T.end() && is_prefix_of(t, *it); ++it)
            if (it->size() == t.size() + 1) ++kids;
        if (kids == 0 && !leaf_ok(t)) return "leaf " + show(t) + " outside the target";
        if (kids > 0 && kids < k) return show(t) + " has " + std::to_string(kids) + " children";
    }
    return std::nullopt;
}

struct SplitResult {
    char side;  // 'B' or 'C'
    std::set<Nats> tree;
};

// Label leaves 'B' when in B^, else 'C'; an inner node is 'B' when at least m
// children are. The stem's side is m-bushy (B) or n-bushy (C).
inline SplitResult label_split(const std::set<Nats>& T, const Nats& sigma, const BadSet& B, const BadSet& C,
                               std::size_t m, std::size_t n) {
    if (m == 0 || n == 0) throw precondition_error("label_split needs m, n >= 1");
    auto fail = bushy_tree_failure(T, sigma, m + n - 1, [&](const Nats& t) { return B.covers(t) || C.covers(t); });
    if (fail) throw precondition_error("label_split: " + *fail);
    std::map<Nats, char> label;
    std::vector<Nats> order;
    for (auto& t : T)
        if (is_prefix_of(sigma, t)) order.push_back(t);
    std::sort(order.begin(), order.end(), [](const Nats& a, const Nats& b) { return a.size() > b.size(); });
    auto kids_of = [&](const Nats& t) {
        std::vector<Nats> out;
        for (auto it = T.upper_bound(t); it != T.end() && is_prefix_of(t, *it); ++it)
            if (it->size() == t.size() + 1) out.push_back(*it);
        return out;
    };
    for (auto& t : order) {
        auto kids = kids_of(t);
        if (kids.empty()) {
            label[t] = B.covers(t) ? 'B' : 'C';
        } else {
            std::size_t b = 0;
            for (auto& c : kids) b += label[c] == 'B';
            label[t] = b >= m ? 'B' : 'C';
        }
    }
    SplitResult r{label[sigma], {}};
    for (std::size_t l = 0; l <= sigma.size(); ++l) r.tree.insert(Nats(sigma.begin(), sigma.begin() + static_cast<long>(l)));
    std::vector<Nats> stack{sigma};
    while (!stack.empty()) {
        Nats t = stack.back();
        stack.pop_back();
        for (auto& c : kids_of(t))
            if (label[c] == r.side) {
                r.tree.insert(c);
                stack.push_back(c);
            }
    }
    return r;
}

// Leftmost-shortlex tau extending sigma with tau in C^ \ B^.
inline Nats find_extension(const BadSet& C, const BadSet& B, const Nats& sigma, std::size_t k) {
    if (is_big(B, sigma, k)) throw precondition_error("find_extension: B is big above the stem");
    if (!is_closed(B, k)) throw precondition_error("find_extension: B is not k-closed");
    if (!is_big(C, sigma, k)) throw precondition_error("find_extension: C is small above the stem");
    if (C.covers(sigma)) return sigma;
    std::vector<Nats> cands;
    for (auto it = C.strings.lower_bound(sigma); it != C.strings.end() && is_prefix_of(sigma, *it); ++it)
        if (!B.covers(*it)) cands.push_back(*it);
    if (cands.empty()) throw std::logic_error("find_extension: no witness although C is big and B small");
    return *std::min_element(cands.begin(), cands.end(), shortlex_less<Nats>);
}

// Leftmost extension of sigma of length len avoiding B^; absent if none.
inline std::optional<Nats> leftmost_avoiding(const Nats& sigma, std::size_t len, const BadSet& B, const BoundFamily& h) {
    if (B.covers(sigma)) return std::nullopt;
    if (sigma.size() >= len) return sigma.size() == len ? std::optional<Nats>(sigma) : std::nullopt;
    Nat top = h.at(sigma.size());
    for (Nat i = 0; i < top; ++i) {
        Nats c = sigma;
        c.push_back(i);
        // A child with no member of B on or below it extends freely.
        if (!B.covers(c) && !B.has_extension(c)) {
            c.resize(len, Nat(0));
            return c;
        }
        if (auto r = leftmost_avoiding(c, len, B, h)) return r;
    }
    return std::nullopt;
}

inline BoundFamily family_of(const OrderFn& p) {
    return BoundFamily([p](std::size_t n) { return floor_at(p, Nat(static_cast<unsigned long>(n))); }, p.props().mono, p.str());
}

}  // namespace avlab
