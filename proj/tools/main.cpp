#include "cli.hpp"

int main(int argc, char** argv) { return undulate::cli::run(argc, argv); }
