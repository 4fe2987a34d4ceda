#include <iostream>
#include <string>
#include <vector>

#include "graphon_lab/util.hpp"
#include "graphon_lab/verify.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> suites;
  for (int i = 1; i < argc; ++i) suites.emplace_back(argv[i]);
  int threads = graphon_lab::resolve_threads(0);
  int failures = graphon_lab::verify::run_acceptance(suites, std::cout, threads);
  return failures == 0 ? 0 : 1;
}
