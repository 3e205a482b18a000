#include "expembed/cli.hpp"

int main(int argc, char** argv) { return expembed::cli::main_entry(argc, argv); }
