#pragma once
// Weighted string sets, Kraft sums, the online Kraft-Chaitin allocator, the
// per-symbol measure gamma, and the sparse-block codec.

#include "encodings.hpp"
#include "order_fn.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <algorithm>
#include <vector>

namespace avlab {

inline Nats bits_to_nats(const Bits& b) {
    Nats out;
    for (char c : b) out.emplace_back(c == '1' ? 1 : 0);
    return out;
}

inline Bits nats_to_bits(const Nats& w) {
    Bits out;
    for (auto& x : w) {
        if (x > 1 || sgn(x) < 0) throw domain_error("symbol " + x.get_str() + " is not a bit");
        out.push_back(x == 1 ? '1' : '0');
    }
    return out;
}

// mu_h(sigma) = 1/|h^{|sigma|}|; gamma(sigma) = mu^{1/|sigma|}, gamma(<>) = 1.
inline Rat mu_h(std::size_t len, const BoundFamily& h) { return make_rat(1, h.level_size(len)); }

inline DyadInterval gamma_of(std::size_t len, const BoundFamily& h, long prec) {
    if (len == 0) return Dyadic(1);
    Rat mu = mu_h(len, h);
    for (long w = prec + 8;; w *= 2) {
        DyadInterval g = iv_pow(DyadInterval::of(mu, w), make_rat(1, static_cast<unsigned long>(len)), w);
        if (g.width_le(prec)) return g;
        if (w > precision_cap + prec) throw indeterminate("gamma unresolved");
    }
}

// f(sigma), bracketed. Most callers weigh by length through an OrderFn.
using WeightRule = std::function<DyadInterval(const Nats& s, long prec)>;

inline WeightRule weight_by_length(const OrderFn& f) {
    return [f](const Nats& s, long w) { return f.eval_raw(Nat(static_cast<unsigned long>(s.size())), w); };
}

struct WeightedSet {
    std::vector<Nats> strings;
    BoundFamily family = BoundFamily::constant(2);
    WeightRule f = weight_by_length(OrderFn::identity());
};

namespace detail {

// gamma(sigma)^{f(sigma)} = 2^{-f(sigma) log2|h^n| / n}; exact when the exponent is.
inline DyadInterval string_weight(const Nats& s, const BoundFamily& h, const WeightRule& f, long w) {
    if (s.empty()) return Dyadic(1);
    Nat H = h.level_size(s.size());
    DyadInterval lg = iv_log2(DyadInterval(Dyadic(H)), w);
    DyadInterval e = iv_div(f(s, w) * lg, DyadInterval(Dyadic(Nat(static_cast<unsigned long>(s.size())))), w);
    return iv_exp2(-e, w);
}

}  // namespace detail

inline DyadInterval dwt(const WeightedSet& S, long prec) {
    std::set<Nats> uniq(S.strings.begin(), S.strings.end());
    for (long w = prec + 8 + static_cast<long>(bit_length(uniq.size()));; w *= 2) {
        DyadInterval sum = Dyadic(0);
        for (auto& s : uniq) sum = sum + detail::string_weight(s, S.family, S.f, w);
        if (sum.width_le(prec)) return sum;
        if (w > 4 * precision_cap + prec) throw indeterminate("dwt unresolved");
    }
}

// Max-weight antichain by a bottom-up pass over the trie of S:
// value(node) = max(weight(node) if node in S, sum of child values).
inline DyadInterval pwt(const WeightedSet& S, long prec) {
    std::set<Nats> uniq(S.strings.begin(), S.strings.end());
    if (uniq.empty()) return Dyadic(0);
    for (long w = prec + 8 + static_cast<long>(bit_length(uniq.size()));; w *= 2) {
        // Every prefix of a member is a trie node; process deepest first.
        std::map<Nats, DyadInterval> below;  // node -> sum of child values
        std::set<Nats> nodes;
        for (auto& s : uniq)
            for (std::size_t l = 0; l <= s.size(); ++l) nodes.insert(Nats(s.begin(), s.begin() + static_cast<long>(l)));
        std::vector<Nats> order(nodes.begin(), nodes.end());
        std::sort(order.begin(), order.end(), [](const Nats& a, const Nats& b) { return a.size() > b.size(); });
        DyadInterval root = Dyadic(0);
        for (auto& node : order) {
            DyadInterval v = below.count(node) ? below[node] : DyadInterval(0);
            if (uniq.count(node)) v = iv_max(v, detail::string_weight(node, S.family, S.f, w));
            if (node.empty()) {
                root = v;
            } else {
                Nats parent(node.begin(), node.end() - 1);
                auto it = below.find(parent);
                if (it == below.end()) below.emplace(parent, v);
                else it->second = it->second + v;
            }
        }
        if (root.width_le(prec)) return root;
        if (w > 4 * precision_cap + prec) throw indeterminate("pwt unresolved");
    }
}

struct KraftResult {
    bool ok = false;
    Rat slack = 0;                          // 1 - sum 2^-|tau| when ok
    std::pair<std::size_t, std::size_t> clash{0, 0};  // compatible pair when not ok
    std::string reason;
};

inline KraftResult kraft_check(const std::vector<Bits>& codes) {
    for (std::size_t i = 0; i < codes.size(); ++i)
        for (std::size_t j = i + 1; j < codes.size(); ++j)
            if (compatible(codes[i], codes[j])) return {false, 0, {i, j}, "compatible pair"};
    Rat sum = 0;
    for (auto& c : codes) sum += make_rat(1, pow2(c.size()));
    if (sum > 1) return {false, 0, {0, 0}, "sum exceeds 1"};
    return {true, 1 - sum, {0, 0}, ""};
}

struct allocation_error : std::runtime_error {
    std::size_t index;
    allocation_error(const std::string& w, std::size_t k) : std::runtime_error(w), index(k) {}
};

// Online allocation over a list of maximal free cylinders kept in left-to-right
// order. Each request takes the leftmost free cylinder of length <= d and
// returns its leftmost length-d extension; the right siblings along the way
// become free.
class KraftChaitin {
  public:
    KraftChaitin() : free_{Bits()} {}

    Bits allocate(std::size_t d) {
        Rat need = make_rat(1, pow2(d));
        if (used_ + need > 1) throw allocation_error("Kraft budget exceeded at request " + std::to_string(count_), count_);
        auto it = std::find_if(free_.begin(), free_.end(), [d](const Bits& r) { return r.size() <= d; });
        if (it == free_.end())
            throw allocation_error("no free cylinder of length <= " + std::to_string(d) + " at request " + std::to_string(count_), count_);
        Bits rho = *it;
        it = free_.erase(it);
        std::vector<Bits> right;
        Bits cur = rho;
        while (cur.size() < d) {
            right.push_back(cur + "1");
            cur += "0";
        }
        // Right siblings appear deepest-first from left to right.
        free_.insert(it, right.rbegin(), right.rend());
        used_ += need;
        ++count_;
        codes_.push_back(cur);
        return cur;
    }

    const std::vector<Bits>& codes() const { return codes_; }
    const std::vector<Bits>& free_list() const { return free_; }
    Rat used() const { return used_; }

  private:
    std::vector<Bits> free_;
    std::vector<Bits> codes_;
    Rat used_ = 0;
    std::size_t count_ = 0;
};

// Invariant: |codes[k]| = lengths[k] and the codes are pairwise incompatible.
struct CodeAllocation {
    std::vector<Bits> codes;
    std::vector<std::size_t> lengths;
};

inline CodeAllocation kc_allocate(const std::vector<std::size_t>& ds) {
    KraftChaitin kc;
    for (auto d : ds) kc.allocate(d);
    return {kc.codes(), ds};
}

// Sparse-block codec. sigma = s_1 ... s_{p/q} with |s_i| = q. With fewer than
// 2^{aq} distinct blocks: indices of each block in the sorted dictionary, each
// left-padded to aq bits, followed by the dictionary nu_1^0 11 nu_2^0 11 ...
// (bits interleaved with 0) padded by 1s to 2(q+1)(2^{aq}-1).
namespace detail {

inline std::size_t sparse_index_bits(std::size_t q, const Rat& alpha) {
    Rat aq = alpha * Rat(static_cast<unsigned long>(q));
    if (aq.get_den() != 1 || sgn(aq) <= 0) throw domain_error("alpha*q must be a positive integer");
    if (aq > 24) throw domain_error("alpha*q too large for the dictionary bound");
    return aq.get_num().get_ui();
}

inline std::size_t sparse_dict_bits(std::size_t q, std::size_t aq) { return 2 * (q + 1) * ((std::size_t{1} << aq) - 1); }

}  // namespace detail

inline std::size_t sparse_length(std::size_t p, std::size_t q, const Rat& alpha) {
    std::size_t aq = detail::sparse_index_bits(q, alpha);
    return aq * (p / q) + detail::sparse_dict_bits(q, aq);
}

inline std::optional<Bits> sparse_encode(const Bits& sigma, std::size_t q, const Rat& alpha) {
    std::size_t aq = detail::sparse_index_bits(q, alpha);
    if (q == 0 || sigma.size() % q != 0) throw precondition_error("block length must divide the string length");
    std::vector<Bits> blocks;
    for (std::size_t i = 0; i < sigma.size(); i += q) blocks.push_back(sigma.substr(i, q));
    std::vector<Bits> dict(blocks);
    std::sort(dict.begin(), dict.end());
    dict.erase(std::unique(dict.begin(), dict.end()), dict.end());
    if (dict.size() >= (std::size_t{1} << aq)) return std::nullopt;
    Bits out;
    for (auto& b : blocks) {
        std::size_t idx = static_cast<std::size_t>(std::lower_bound(dict.begin(), dict.end(), b) - dict.begin());
        Bits bin = Nat(static_cast<unsigned long>(idx)).get_str(2);
        if (idx == 0) bin = "";
        out += std::string(aq - bin.size(), '0') + bin;
    }
    Bits rho;
    for (auto& e : dict) {
        for (char c : e) {
            rho.push_back(c);
            rho.push_back('0');
        }
        rho += "11";
    }
    rho += std::string(detail::sparse_dict_bits(q, aq) - rho.size(), '1');
    return out + rho;
}

inline Bits sparse_decode(const Bits& tau, std::size_t q, const Rat& alpha) {
    std::size_t aq = detail::sparse_index_bits(q, alpha);
    std::size_t D = detail::sparse_dict_bits(q, aq);
    if (tau.size() < D || (tau.size() - D) % aq != 0) throw domain_error("sparse code has the wrong length");
    std::size_t nblocks = (tau.size() - D) / aq;
    Bits rho = tau.substr(tau.size() - D);
    std::vector<Bits> dict;
    std::size_t i = 0;
    while (i + 2 <= rho.size() && !(rho[i] == '1' && rho[i + 1] == '1')) {
        Bits e;
        for (std::size_t j = 0; j < q; ++j, i += 2) {
            if (i + 2 > rho.size() || rho[i + 1] != '0') throw domain_error("malformed dictionary entry");
            e.push_back(rho[i]);
        }
        if (i + 2 > rho.size() || rho.compare(i, 2, "11") != 0) throw domain_error("missing dictionary separator");
        i += 2;
        dict.push_back(e);
    }
    Bits out;
    for (std::size_t b = 0; b < nblocks; ++b) {
        Nat idx;
        Bits field = tau.substr(b * aq, aq);
        idx.set_str(field, 2);
        if (idx >= dict.size()) throw domain_error("block index outside the dictionary");
        out += dict[idx.get_ui()];
    }
    return out;
}

}  // namespace avlab
