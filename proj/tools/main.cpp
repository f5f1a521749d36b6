#include "cli.hpp"

int main(int argc, char** argv) { return gaplab::cli::run(argc, argv); }
