// Sample-versus-time tradeoff sweep: for one parameter set, print the sample
// bounds and time exponents the calculator reports as the locality l grows.

#include <cstdio>

#include "sparselin/calc.hpp"

using namespace sparselin;

namespace {

void print_entry(const char* tag, const BoundEntry& e) {
  if (e.value)
    std::printf("  %-18s log2 %10.3f  (= %.4g)\n", tag, e.log2_value, *e.value);
  else
    std::printf("  %-18s log2 %10.3f\n", tag, e.log2_value);
}

}  // namespace

int main() {
  TradeoffQuery query;
  query.n = 64;
  query.k = 4;
  query.q = 10007;
  query.noise = NoiseSpec::gaussian(3.0);

  std::printf("n=%u k=%u q=%u noise=%s\n", query.n, query.k, query.q, query.noise.name());
  for (u32 l : {2u, 4u, 8u, 16u}) {
    query.l = l;
    const BoundTable t = calc_bounds(query);
    std::printf("l = %u (rho = %.4f, crossover l ~ %.1f):\n", t.l_used, t.rho,
                t.crossover_l_log2);
    print_entry("samples spectral", t.spectral_large_q);
    print_entry("samples cover", t.cover_lwe_large_q);
    print_entry("time spectral", t.time_spectral);
    print_entry("time cover", t.time_cover_sqrt);
  }
  return 0;
}
