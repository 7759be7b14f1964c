#include "deepdim/cli.hpp"

int main(int argc, char** argv) { return deepdim::cli::run(argc, argv); }
