#include <cstdint>
#include <iostream>

#include "CLI11.hpp"
#include "posit/train/synth_digits.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Write a generated handwriting-like digit set as MNIST-named IDX files", "make_synth_digits"};
  std::string out = "data";
  std::size_t train = 6000;
  std::size_t val = 2000;
  std::uint64_t seed = 2024;
  app.add_option("--out", out, "output directory");
  app.add_option("--train", train, "training images");
  app.add_option("--val", val, "validation images");
  app.add_option("--seed", seed, "generator seed");
  CLI11_PARSE(app, argc, argv);
  try {
    posit::train::write_synth_digit_files(out, train, val, seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  std::cout << "wrote " << train << " training and " << val << " validation images to " << out << '\n';
  return 0;
}
