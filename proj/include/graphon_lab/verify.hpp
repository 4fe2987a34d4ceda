#ifndef GRAPHON_LAB_VERIFY_HPP
#define GRAPHON_LAB_VERIFY_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace graphon_lab::verify {

// Acceptance suite names: flat, scallop, perturbative, asymmetric, finite,
// transitions, sampling, properties (or "all"). Prints one [PASS]/[FAIL]
// line per criterion and returns the number of failures.
int run_acceptance(const std::vector<std::string>& suites, std::ostream& os, int threads);

std::vector<std::string> all_suites();

}  // namespace graphon_lab::verify

#endif
