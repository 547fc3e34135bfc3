// Writes a synthetic claims CSV in the loader's default column layout.
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include "synthetic.hpp"

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: make_fixture <out.csv> [claims] [seed]\n";
    return 2;
  }
  indexins::fixtures::SyntheticOptions o;
  if (argc > 2) o.claims = std::stoul(argv[2]);
  if (argc > 3) o.seed = std::stoull(argv[3]);
  std::ofstream out(argv[1]);
  if (!out) {
    std::cerr << "cannot write " << argv[1] << '\n';
    return 3;
  }
  indexins::write_claims(out, indexins::fixtures::synthetic_claims(o));
  return 0;
}
