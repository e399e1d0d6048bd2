// Acceptance suite runner. With no arguments every criterion is evaluated;
// `--criterion N` (or a name) restricts the run.

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "squadfountain/acceptance.hpp"

int main(int argc, char** argv) {
  sqf::acceptance::Options opt;
  opt.threads = sqf::default_threads();
  std::vector<std::string> filters;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--criterion" && i + 1 < argc) {
      filters.emplace_back(argv[++i]);
    } else if (a == "--tolerance-scale" && i + 1 < argc) {
      opt.tolerance_scale = std::atof(argv[++i]);
    } else if (a == "--threads" && i + 1 < argc) {
      opt.threads = static_cast<unsigned>(std::atoi(argv[++i]));
    } else {
      std::cerr << "usage: acceptance [--criterion N]... [--tolerance-scale X] [--threads N]\n";
      return 2;
    }
  }
  try {
    return sqf::acceptance::run(opt, filters, std::cout) == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
