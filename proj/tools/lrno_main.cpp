#include "lrno/cli.hpp"

int main(int argc, char** argv) { return lrno::cli::main_entry(argc, argv); }
