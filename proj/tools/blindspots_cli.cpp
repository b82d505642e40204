#include "blindspots/cli.hpp"

int main(int argc, char** argv) { return blindspots::cli::main_entry(argc, argv); }
