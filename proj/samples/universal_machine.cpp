// K_s of 0^n drops once the doubling closure converges: 1^k 0 codes 0^{2^k}.

#include "avlab/machine.hpp"

#include <iostream>

using namespace avlab;

int main() {
    ProgramRegistry reg;
    reg.register_closure("doubling-zeros", [](const Nat& x) -> std::optional<Conv> {
        Bits r = str_decode(x);
        if (r.empty() || r.back() != '0' || r.size() > 13) return std::nullopt;
        for (std::size_t i = 0; i + 1 < r.size(); ++i)
            if (r[i] != '1') return std::nullopt;
        return Conv{str_encode(Bits(std::size_t{1} << (r.size() - 1), '0')), 0};
    });
    register_literal_printer(reg, 8);
    for (std::uint64_t s : {16, 64, 256, 1024}) {
        UniversalMachine U(reg, s);
        std::cout << "s=" << s;
        for (std::size_t n : {8, 32, 64}) {
            auto k = U.k_bound(Bits(n, '0'));
            std::cout << "  K(0^" << n << ")<=" << (k ? std::to_string(*k) : "inf");
        }
        std::cout << "\n";
    }
    Program add2 = parse_program("INC 0\nINC 0\nHALT\n");
    auto r = run_program(add2, 5, 10);
    std::cout << "program " << program_index(add2) << " on 5: " << r->value << " in " << r->steps << " steps\n";
}
