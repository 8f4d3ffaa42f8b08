// Samples a p-tree and prints it as JSON, together with its probability.
//   demo_ptree [m] [seed]

#include <iostream>
#include <string>

#include "heavytail/rank_one.hpp"

using namespace heavytail;

int main(int argc, char** argv) {
  const std::size_t m = argc > 1 ? std::stoul(argv[1]) : 8;
  const std::uint64_t seed = argc > 2 ? std::stoull(argv[2]) : 1;
  // weights proportional to 1/i
  std::vector<double> w;
  for (std::size_t i = 1; i <= m; ++i) w.push_back(1.0 / double(i));
  const auto p = ProbVector::normalized(w);
  Rng rng = make_rng(seed);
  const auto tree = sample_ptree(p, rng);
  auto j = tree_to_json(tree);
  j["probability"] = ptree_weight(tree, p, false);
  std::cout << j.dump(2) << '\n';
}
