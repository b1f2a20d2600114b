#include "gfmsim/cli.hpp"

int main(int argc, char** argv) { return gfmsim::cli::run(argc, argv); }
