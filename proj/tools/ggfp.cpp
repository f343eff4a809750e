#include <ggfp/experiment.hpp>

#include <iostream>

int main(int argc, char** argv) { return ggfp::run(argc, argv, std::cout, std::cerr); }
