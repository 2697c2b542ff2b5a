#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace weakkam {

// Input rejected: malformed file, bad field, graph not strongly connected...
struct validation_error : std::runtime_error {
  explicit validation_error(const std::string& what) : std::runtime_error(what) {}
};

// A cycle with negative reduced cost certifies that the requested level is
// below the critical value.  The offending cycle ships with the exception.
struct negative_cycle_error : std::runtime_error {
  std::vector<int> cycle;
  explicit negative_cycle_error(std::vector<int> c)
      : std::runtime_error("negative reduced-cost cycle at this level"), cycle(std::move(c)) {}
};

// Two minimizers tie within tolerance but disagree on the quantity asked for.
struct ambiguity_error : std::runtime_error {
  explicit ambiguity_error(const std::string& what) : std::runtime_error(what) {}
};

// An iterative solve (collocation, shooting, repair loop) ran out of budget.
struct convergence_error : std::runtime_error {
  double residual = 0.0;
  explicit convergence_error(const std::string& what, double res = 0.0)
      : std::runtime_error(what), residual(res) {}
};

// The one-step dynamics is a partial map; this point is outside its domain.
struct partial_map_error : std::runtime_error {
  explicit partial_map_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace weakkam
