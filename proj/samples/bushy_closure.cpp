// A binary bad set, its 2-closure, and the stems it leaves free.

#include "avlab/bushy.hpp"

#include <iostream>

using namespace avlab;

int main() {
    BoundFamily h = BoundFamily::constant(2);
    BadSet B({{0, 0}, {0, 1, 0}, {0, 1, 1}, {1, 1, 0}}, h);
    for (std::size_t k : {1, 2, 3}) {
        BadSet C = closure(B, k);
        std::cout << "k=" << k << " closure:";
        for (auto& w : C.strings) std::cout << " " << show(w);
        std::cout << "  big above <>: " << (is_big(B, {}, k) ? "yes" : "no") << "\n";
    }
    auto free = leftmost_avoiding({}, 3, closure(B, 2), h);
    std::cout << "leftmost stem of length 3 outside the 2-closure: " << (free ? show(*free) : "none") << "\n";
}
