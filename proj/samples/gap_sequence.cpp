// eps_m = 1/((m+1)(m+2)): gamma grows without bound while sum eps_m gamma_m stays finite.

#include "avlab/series.hpp"

#include <iostream>

using namespace avlab;

int main() {
    RatSeq eps = [](const Nat& m) { return make_rat(1, (m + 1) * (m + 2)); };
    RatSeq tail = [](const Nat& K) { return make_rat(1, K + 1); };  // telescoping, exact
    GapSequence G(eps, tail, 64);
    std::cout << "eps_lo " << G.eps_lower() << "\n";
    auto ends = G.block_ends(6);
    for (std::size_t k = 0; k + 1 < ends.size(); ++k)
        std::cout << "block " << k << " (" << ends[k] << ", " << ends[k + 1] << "] gamma " << G.gamma(ends[k + 1]) << " delta at end "
                  << G.delta(ends[k + 1]) << "\n";
    std::cout << "sum eps*gamma " << G.weighted_sum(6).str() << "\n";
}
