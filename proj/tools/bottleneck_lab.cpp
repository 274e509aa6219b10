#include <iostream>

#include "bottleneck/cli.hpp"

int main(int argc, char** argv)
{
  return bottleneck::run_cli(argc, argv, std::cout, std::cerr);
}
