#include "cli.hpp"

int main(int argc, char** argv) { return sigpath::cli::run(argc, argv); }
