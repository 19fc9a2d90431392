// Writes a simulated dataset as CSV for the CLI smoke test.
//   hetsurr_make_example SETTING N SEED PATH

#include <cstdlib>
#include <iostream>
#include <string>

#include "hetsurr/csv.hpp"
#include "hetsurr/simulation.hpp"

int main(int argc, char** argv) {
  if (argc != 5) {
    std::cerr << "usage: hetsurr_make_example SETTING N SEED PATH\n";
    return 2;
  }
  const int setting = std::atoi(argv[1]);
  const auto n = static_cast<Eigen::Index>(std::atoll(argv[2]));
  const auto seed = static_cast<std::uint64_t>(std::stoull(argv[3]));
  hetsurr::Engine rng = hetsurr::make_stream(seed, hetsurr::StreamTag::data);
  hetsurr::write_file_atomic(argv[4], hetsurr::to_csv(hetsurr::simulate_dataset(setting, n, rng)));
  return 0;
}
