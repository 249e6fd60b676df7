#pragma once
// Counter-machine programs, the registry phi_e, the linearly universal diagonal,
// parametrization, prefix-free-ification, the universal prefix-free machine U
// and the step-bounded complexity K_s.

#include "encodings.hpp"
#include "order_fn.hpp"

#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace avlab {

enum class Op { Halt, Inc, Dec, Jz };

struct Instr {
    Op op = Op::Halt;
    std::size_t r = 0;
    std::size_t target = 0;  // Jz only; a target >= program length halts
    bool operator==(const Instr&) const = default;
};

using Program = std::vector<Instr>;

// Instruction codes: 4r+1 INC, 4r+2 DEC, 4 pi2(r,l)+3 JZ, multiples of 4 HALT.
inline Nat instr_code(const Instr& i) {
    switch (i.op) {
        case Op::Halt: return 0;
        case Op::Inc: return 4 * Nat(static_cast<unsigned long>(i.r)) + 1;
        case Op::Dec: return 4 * Nat(static_cast<unsigned long>(i.r)) + 2;
        case Op::Jz: return 4 * pair2(Nat(static_cast<unsigned long>(i.r)), Nat(static_cast<unsigned long>(i.target))) + 3;
    }
    return 0;
}

inline Instr instr_decode(const Nat& c) {
    Nat q = c / 4;
    switch (static_cast<int>(Nat(c % 4).get_ui())) {
        case 1: return {Op::Inc, to_size(q), 0};
        case 2: return {Op::Dec, to_size(q), 0};
        case 3: {
            auto [r, l] = unpair2(q);
            return {Op::Jz, to_size(r), l.fits_ulong_p() ? to_size(l) : ~std::size_t{0}};
        }
        default: return {Op::Halt, 0, 0};
    }
}

inline Nat program_index(const Program& p) {
    Nats codes;
    for (auto& i : p) codes.push_back(instr_code(i));
    return 2 * seq_index(codes);
}

// Every even index decodes to a program.
inline Program program_at(const Nat& e) {
    if (sgn(e) < 0 || e % 2 != 0) throw domain_error("program indices are even");
    Program p;
    for (auto& c : seq_unindex(e / 2)) p.push_back(instr_decode(c));
    return p;
}

struct program_parse_error : std::invalid_argument {
    std::size_t line;
    program_parse_error(const std::string& w, std::size_t l)
        : std::invalid_argument("line " + std::to_string(l) + ": " + w), line(l) {}
};

// One instruction per line: INC r, DEC r, JZ r label, HALT. A label is an
// instruction number or a name declared as "name:" at the start of a line.
// '#' starts a comment.
inline Program parse_program(const std::string& text) {
    struct Raw {
        Op op;
        std::size_t r;
        std::string target;
        std::size_t line;
    };
    std::vector<Raw> raw;
    std::map<std::string, std::size_t> labels;
    std::istringstream in(text);
    std::string line;
    for (std::size_t ln = 1; std::getline(in, line); ++ln) {
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        std::istringstream ls(line);
        std::string tok;
        if (!(ls >> tok)) continue;
        while (tok.back() == ':') {
            std::string name = tok.substr(0, tok.size() - 1);
            if (name.empty() || !labels.emplace(name, raw.size()).second)
                throw program_parse_error("bad or duplicate label '" + name + "'", ln);
            if (!(ls >> tok)) tok.clear();
            if (tok.empty()) break;
        }
        if (tok.empty()) continue;
        for (auto& c : tok) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        auto reg = [&]() {
            long long r;
            if (!(ls >> r) || r < 0) throw program_parse_error("expected a register number", ln);
            return static_cast<std::size_t>(r);
        };
        Raw ins{Op::Halt, 0, "", ln};
        if (tok == "HALT") {
        } else if (tok == "INC") {
            ins = {Op::Inc, reg(), "", ln};
        } else if (tok == "DEC") {
            ins = {Op::Dec, reg(), "", ln};
        } else if (tok == "JZ") {
            ins.op = Op::Jz;
            ins.r = reg();
            if (!(ls >> ins.target)) throw program_parse_error("JZ needs a label", ln);
        } else {
            throw program_parse_error("unknown instruction '" + tok + "'", ln);
        }
        std::string extra;
        if (ls >> extra) throw program_parse_error("trailing text '" + extra + "'", ln);
        raw.push_back(ins);
    }
    Program p;
    for (auto& r : raw) {
        Instr i{r.op, r.r, 0};
        if (r.op == Op::Jz) {
            if (auto it = labels.find(r.target); it != labels.end()) {
                i.target = it->second;
            } else if (std::all_of(r.target.begin(), r.target.end(), ::isdigit)) {
                i.target = std::stoul(r.target);
            } else {
                throw program_parse_error("undefined label '" + r.target + "'", r.line);
            }
            if (i.target > raw.size()) throw program_parse_error("jump target out of bounds", r.line);
        }
        p.push_back(i);
    }
    return p;
}

inline std::string program_text(const Program& p) {
    std::ostringstream os;
    for (auto& i : p) {
        switch (i.op) {
            case Op::Halt: os << "HALT\n"; break;
            case Op::Inc: os << "INC " << i.r << "\n"; break;
            case Op::Dec: os << "DEC " << i.r << "\n"; break;
            case Op::Jz: os << "JZ " << i.r << " " << i.target << "\n"; break;
        }
    }
    return os.str();
}

// A converged computation: output and the number of steps it took.
struct Conv {
    Nat value;
    std::uint64_t steps = 0;
};

namespace detail {

// Input in register 0, output in register 0. One executed instruction is one
// step; falling off the end halts. A repeated configuration proves divergence.
template <class Reg>
std::optional<Conv> run_counter(const Program& p, Reg x, std::uint64_t budget) {
    std::size_t nreg = 1;
    for (auto& i : p) nreg = std::max(nreg, i.r + 1);
    std::vector<Reg> regs(nreg, Reg(0));
    regs[0] = x;
    std::size_t pc = 0;
    std::uint64_t steps = 0;
    std::vector<Reg> saved = regs;
    std::size_t saved_pc = ~std::size_t{0};
    std::uint64_t power = 1;
    while (pc < p.size()) {
        if (steps == budget) return std::nullopt;
        const Instr& i = p[pc];
        ++steps;
        switch (i.op) {
            case Op::Halt: return Conv{Nat(regs[0]), steps};
            case Op::Inc: regs[i.r] += 1; ++pc; break;
            case Op::Dec:
                if (regs[i.r] != 0) regs[i.r] -= 1;
                ++pc;
                break;
            case Op::Jz: pc = regs[i.r] == 0 ? i.target : pc + 1; break;
        }
        if (pc == saved_pc && regs == saved) return std::nullopt;
        if (steps == power) {
            power *= 2;
            saved = regs;
            saved_pc = pc;
        }
    }
    return Conv{Nat(regs[0]), steps};
}

}  // namespace detail

inline std::optional<Conv> run_program(const Program& p, const Nat& x, std::uint64_t budget) {
    if (x.fits_ulong_p() && x < pow2(62) && budget < (std::uint64_t{1} << 61)) {
        return detail::run_counter<unsigned long>(p, x.get_ui(), budget);
    }
    return detail::run_counter<Nat>(p, x, budget);
}

using Closure = std::function<std::optional<Conv>(const Nat& x)>;

// phi_e: even e = 2m is the program coded by m, odd e = 2m+1 is the m-th
// registered closure. Append-only; one writer, any number of readers once
// registration is finished.
class ProgramRegistry {
  public:
    Nat register_closure(std::string name, Closure fn) {
        entries_.push_back({std::move(name), std::move(fn)});
        return odd(entries_.size() - 1);
    }

    Nat register_total(std::string name, std::function<Nat(const Nat&)> f, std::uint64_t steps = 0) {
        return register_closure(std::move(name), [f, steps](const Nat& x) { return std::optional<Conv>(Conv{f(x), steps}); });
    }

    // Two-place closures read their argument as pi2(x, y).
    Nat register_binary(std::string name, std::function<std::optional<Conv>(const Nat&, const Nat&)> f) {
        return register_closure(std::move(name), [f](const Nat& z) {
            auto [x, y] = unpair2(z);
            return f(x, y);
        });
    }

    // An index fixed now and filled once later, for closures that refer to
    // their own index.
    Nat reserve(std::string name) {
        entries_.push_back({std::move(name), nullptr});
        return odd(entries_.size() - 1);
    }

    void fill(const Nat& e, Closure fn) {
        auto& slot = entry(e);
        if (slot.fn) throw precondition_error("index " + e.get_str() + " already filled");
        slot.fn = std::move(fn);
    }

    Nat register_program(const Program& p) {
        for (auto& i : p)
            if (i.op == Op::Jz && i.target > p.size()) throw precondition_error("jump target out of bounds");
        return program_index(p);
    }

    bool is_registered(const Nat& e) const {
        if (e % 2 == 0) return true;
        Nat m = (e - 1) / 2;
        return m < entries_.size() && entries_[m.get_ui()].fn != nullptr;
    }

    std::string name(const Nat& e) const {
        if (e % 2 == 0) return "program " + e.get_str();
        Nat m = (e - 1) / 2;
        return m < entries_.size() ? entries_[m.get_ui()].name : "unregistered";
    }

    std::size_t closure_count() const { return entries_.size(); }

    std::optional<Conv> run(const Nat& e, const Nat& x, std::uint64_t s) const {
        if (e % 2 == 0) {
            return run_program(program_at(e), x, s);
        }
        Nat m = (e - 1) / 2;
        if (m >= entries_.size()) return std::nullopt;
        auto& fn = entries_[m.get_ui()].fn;
        if (!fn) return std::nullopt;
        auto r = fn(x);
        if (!r || r->steps > s) return std::nullopt;
        return r;
    }

    // phi_{e,s}(x); once defined, stable for every larger s.
    std::optional<Nat> step_eval(const Nat& e, const Nat& x, std::uint64_t s) const {
        auto r = run(e, x, s);
        if (!r) return std::nullopt;
        return r->value;
    }

  private:
    struct Entry {
        std::string name;
        Closure fn;
    };
    std::vector<Entry> entries_;

    static Nat odd(std::size_t m) { return 2 * Nat(static_cast<unsigned long>(m)) + 1; }
    Entry& entry(const Nat& e) {
        if (e % 2 == 0) throw precondition_error("programs are not reserved");
        Nat m = (e - 1) / 2;
        if (m >= entries_.size()) throw precondition_error("index " + e.get_str() + " was not reserved");
        return entries_[m.get_ui()];
    }
};

// psi(pi2(e, x)) = phi_e(x), so psi(2^{e+1} x + 2^e - 1) = phi_e(x).
inline std::optional<Nat> lin_universal(const ProgramRegistry& reg, const Nat& m, std::uint64_t s) {
    auto [e, x] = unpair2(m);
    return reg.step_eval(e, x, s);
}

// psi(A(x) y + B(x)) = theta(x, y) when phi_e(pi2(x, y)) = theta(x, y).
struct Parametrization {
    Nat e, a, b;  // psi(a z + b) = phi_e(z)
    Nat A(const Nat& x) const { return a * pow2(to_size(x) + 1); }
    Nat B(const Nat& x) const { return a * (pow2(to_size(x)) - 1) + b; }
};

inline Parametrization parametrize(const ProgramRegistry& reg, const Nat& theta) {
    if (!reg.is_registered(theta)) throw precondition_error("index " + theta.get_str() + " is not registered");
    std::size_t e = to_size(theta);
    return {theta, pow2(e + 1), pow2(e) - 1};
}

// M_{e,t}(tau) = sigma iff #tau < t and phi_{e,t}(#tau) = #sigma. The table keeps
// M_{e,t*} for the last t* <= s at which that domain is prefix-free.
struct PFTable {
    std::map<Bits, Bits> out;
    std::uint64_t last_prefix_free = 0;  // t*
    bool cut = false;                    // some later stage broke prefix-freeness
};

namespace detail {

inline bool clashes(const std::set<Bits>& dom, const Bits& t) {
    for (std::size_t l = 0; l <= t.size(); ++l)
        if (dom.count(t.substr(0, l))) return true;
    auto it = dom.lower_bound(t);
    return it != dom.end() && is_prefix(t, *it);
}

}  // namespace detail

inline PFTable prefix_free_ify(const ProgramRegistry& reg, const Nat& e, std::uint64_t s) {
    std::vector<std::pair<std::uint64_t, std::uint64_t>> entries;  // (entry stage, #tau)
    std::map<std::uint64_t, Nat> value;
    for (std::uint64_t x = 0; x < s; ++x) {
        auto r = reg.run(e, Nat(static_cast<unsigned long>(x)), s);
        if (!r) continue;
        entries.push_back({std::max<std::uint64_t>(x + 1, r->steps), x});
        value[x] = r->value;
    }
    std::sort(entries.begin(), entries.end());
    PFTable t;
    t.last_prefix_free = s;
    std::set<Bits> dom;
    std::vector<std::pair<Bits, Bits>> group;
    for (std::size_t i = 0; i < entries.size();) {
        std::uint64_t stage = entries[i].first;
        group.clear();
        bool bad = false;
        for (; i < entries.size() && entries[i].first == stage; ++i) {
            Bits tau = str_decode(Nat(static_cast<unsigned long>(entries[i].second)));
            if (detail::clashes(dom, tau)) bad = true;
            dom.insert(tau);
            group.push_back({tau, str_decode(value[entries[i].second])});
        }
        if (bad) {
            t.cut = true;
            t.last_prefix_free = stage - 1;
            return t;
        }
        for (auto& g : group) t.out.insert(g);
    }
    return t;
}

// U(0^e 1 tau) = M~_e(tau), evaluated at a fixed stage s with per-index caching.
class UniversalMachine {
  public:
    UniversalMachine(const ProgramRegistry& reg, std::uint64_t s) : reg_(reg), s_(s) {}

    std::uint64_t stage() const { return s_; }

    const PFTable& table(std::size_t e) const {
        std::lock_guard<std::mutex> lk(mu_);
        auto it = cache_.find(e);
        if (it == cache_.end()) it = cache_.emplace(e, prefix_free_ify(reg_, Nat(static_cast<unsigned long>(e)), s_)).first;
        return it->second;
    }

    std::optional<Bits> operator()(const Bits& tau) const {
        auto one = tau.find('1');
        if (one == std::string::npos) return std::nullopt;
        const PFTable& t = table(one);
        auto it = t.out.find(tau.substr(one + 1));
        if (it == t.out.end()) return std::nullopt;
        return it->second;
    }

    // Every converged (code, output) pair with code length <= max_len.
    std::vector<std::pair<Bits, Bits>> domain(std::size_t max_len) const {
        std::vector<std::pair<Bits, Bits>> out;
        for (std::size_t e = 0; e + 1 <= max_len; ++e)
            for (auto& [rho, sigma] : table(e).out)
                if (e + 1 + rho.size() <= max_len) out.push_back({std::string(e, '0') + "1" + rho, sigma});
        return out;
    }

    // K_s(sigma) = min |tau| <= min(s, cap) with U_s(tau) = sigma; absent is infinity.
    std::optional<std::size_t> k_bound(const Bits& sigma, std::size_t cap = ~std::size_t{0}) const {
        std::size_t limit = std::min<std::uint64_t>(cap, s_);
        std::optional<std::size_t> best;
        for (std::size_t e = 0; e + 1 <= limit && (!best || e + 1 < *best); ++e) {
            for (auto& [rho, out] : table(e).out) {
                std::size_t len = e + 1 + rho.size();
                if (out == sigma && len <= limit && (!best || len < *best)) best = len;
            }
        }
        return best;
    }

  private:
    const ProgramRegistry& reg_;
    std::uint64_t s_;
    mutable std::mutex mu_;
    mutable std::map<std::size_t, PFTable> cache_;
};

inline std::optional<Bits> universal_pf(const ProgramRegistry& reg, const Bits& tau, std::uint64_t s) {
    return UniversalMachine(reg, s)(tau);
}

inline std::optional<std::size_t> k_bound(const ProgramRegistry& reg, const Bits& sigma, std::uint64_t s) {
    return UniversalMachine(reg, s).k_bound(sigma);
}

// tau -> tau on strings of length n: a prefix-free literal printer.
inline Nat register_literal_printer(ProgramRegistry& reg, std::size_t n) {
    return reg.register_closure("literal-" + std::to_string(n), [n](const Nat& x) -> std::optional<Conv> {
        if (str_decode(x).size() != n) return std::nullopt;
        return Conv{x, 0};
    });
}

struct AvoidReport {
    enum Status { Ok, Clash, BoundViolation } status = Ok;
    std::size_t at = 0;
    std::size_t unresolved = 0;  // cells where psi had not converged within the budget
};

using PartialFn = std::function<std::optional<Nat>(const Nat& n, std::uint64_t s)>;

inline PartialFn psi_lin_universal(const ProgramRegistry& reg) {
    return [&reg](const Nat& n, std::uint64_t s) { return lin_universal(reg, n, s); };
}

inline PartialFn psi_registered(const ProgramRegistry& reg, const Nat& e) {
    return [&reg, e](const Nat& n, std::uint64_t s) { return reg.step_eval(e, n, s); };
}

// X(n) != psi(n) wherever psi converges, and X(n) < p(n), for n < N.
inline AvoidReport avoidance_check(const Nats& X, const PartialFn& psi, const OrderFn& p, std::size_t N, std::uint64_t s) {
    if (X.size() < N) throw length_error("prefix shorter than the horizon", N);
    AvoidReport r;
    for (std::size_t n = 0; n < N; ++n) {
        Nat nn(static_cast<unsigned long>(n));
        if (compare_at(p, nn, Rat(X[n])) <= 0) return {AvoidReport::BoundViolation, n, r.unresolved};
        auto v = psi(nn, s);
        if (!v) {
            ++r.unresolved;
            continue;
        }
        if (*v == X[n]) return {AvoidReport::Clash, n, r.unresolved};
    }
    return r;
}

}  // namespace avlab
