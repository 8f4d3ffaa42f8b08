// Largest components of a percolated configuration model at criticality.
//   demo_critical_component [n] [lambda] [seed]

#include <cmath>
#include <iostream>
#include <string>

#include "heavytail/degrees.hpp"
#include "heavytail/graph.hpp"

using namespace heavytail;

int main(int argc, char** argv) {
  const std::size_t n = argc > 1 ? std::stoul(argv[1]) : 100000;
  const double lambda = argc > 2 ? std::stod(argv[2]) : 0.0;
  const std::uint64_t seed = argc > 3 ? std::stoull(argv[3]) : 1;
  const double tau = 3.5;
  const auto ex = exponents(tau);

  const auto seq = quantile_degrees(n, ex.alpha, 1.0);
  const double nu = criticality_parameter(seq);
  const auto p = percolation_probability(nu, lambda, std::pow(double(n), -ex.eta));
  Rng rng = make_rng(seed);
  const MultiGraph g = percolate(sample_cm(seq, rng), p.p, rng);

  ComponentOptions opt;
  opt.diameters = true;
  const auto rep = components_and_stats(g, nullptr, opt);
  std::cout << "n=" << n << " nu=" << nu << " p=" << p.p << (p.clamped ? " (clamped)" : "") << '\n';
  std::cout << "rank  size  size/n^rho  surplus  diameter\n";
  for (std::size_t i = 0; i < std::min<std::size_t>(5, rep.components.size()); ++i) {
    const auto& c = rep.components[i];
    std::cout << i + 1 << "  " << c.size << "  " << double(c.size) * std::pow(double(n), -ex.rho) << "  " << c.surplus
              << "  " << c.diameter << '\n';
  }
}
