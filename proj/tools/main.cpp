#include "flockmeter/cli.hpp"

int main(int argc, char** argv) { return flockmeter::cli::run(argc, argv); }
