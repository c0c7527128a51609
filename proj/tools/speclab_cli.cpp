#include "speclab/experiments.hpp"

int main(int argc, char** argv) { return speclab::cli_main(argc, argv); }
