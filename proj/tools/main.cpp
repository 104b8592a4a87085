#include "riskann/cli.hpp"

int main(int argc, char** argv) {
  return riskann::cli::run(argc, argv);
}
