// Multiplicative coalescent started from given masses; prints every merge.
//   demo_coalescent duration x1 x2 ...

#include <iostream>
#include <string>

#include "heavytail/dynamic.hpp"

using namespace heavytail;

int main(int argc, char** argv) {
  double duration = 0.5;
  std::vector<double> x{1.0, 2.0, 3.0, 0.5, 0.5};
  if (argc > 1) duration = std::stod(argv[1]);
  if (argc > 2) {
    x.clear();
    for (int i = 2; i < argc; ++i) x.push_back(std::stod(argv[i]));
  }
  Rng rng = make_rng(7);
  try {
    const auto run = simulate_mc(x, duration, rng);
    for (const auto& m : run.history) std::cout << "t=" << m.time << " merge " << m.i << " + " << m.j << '\n';
    std::cout << run.clusters.size() << " clusters at t=" << duration << ", masses:";
    for (double v : run.mass) std::cout << ' ' << v;
    std::cout << '\n';
  } catch (const domain_error& e) {
    std::cerr << e.what() << '\n';
    return 1;
  }
}
