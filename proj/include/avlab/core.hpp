#pragma once
// Shared vocabulary: arbitrary-precision naturals and rationals, error kinds.

#include <gmpxx.h>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace avlab {

using Nat = mpz_class;
using Rat = mpq_class;

struct domain_error : std::domain_error {
    using std::domain_error::domain_error;
};

struct precondition_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// An interval comparison that stayed ambiguous up to the precision cap.
struct indeterminate : std::runtime_error {
    Nat where;
    indeterminate(const std::string& what, Nat n = 0)
        : std::runtime_error(what), where(std::move(n)) {}
};

struct length_error : std::length_error {
    std::size_t required;
    length_error(const std::string& what, std::size_t req)
        : std::length_error(what), required(req) {}
};

struct exhausted : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline Nat pow2(unsigned long e) {
    Nat r;
    mpz_setbit(r.get_mpz_t(), e);
    return r;
}

// Number of binary digits; 0 has none.
inline std::size_t bit_length(const Nat& n) {
    return sgn(n) == 0 ? 0 : mpz_sizeinbase(n.get_mpz_t(), 2);
}

inline std::size_t to_size(const Nat& n) {
    if (sgn(n) < 0 || !n.fits_ulong_p())
        throw domain_error("natural does not fit a machine index: " + n.get_str());
    return n.get_ui();
}

inline std::size_t trailing_zeros(const Nat& n) {
    return mpz_scan1(n.get_mpz_t(), 0);
}

inline Nat floor_div(const Nat& a, const Nat& b) {
    Nat q;
    mpz_fdiv_q(q.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return q;
}

inline Nat rat_floor(const Rat& q) {
    Nat r;
    mpz_fdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
    return r;
}

inline Nat rat_ceil(const Rat& q) {
    Nat r;
    mpz_cdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
    return r;
}

inline Rat make_rat(const Nat& num, const Nat& den = 1) {
    Rat q(num, den);
    q.canonicalize();
    return q;
}

inline Rat parse_rat(const std::string& s) {
    Rat q;
    auto dot = s.find('.');
    if (dot != std::string::npos) {
        std::string digits = s.substr(0, dot) + s.substr(dot + 1);
        std::size_t frac = s.size() - dot - 1;
        Nat den = 1;
        for (std::size_t i = 0; i < frac; ++i) den *= 10;
        return make_rat(Nat(digits), den);
    }
    if (q.set_str(s, 10) != 0) throw domain_error("not a rational: " + s);
    q.canonicalize();
    return q;
}

}  // namespace avlab
