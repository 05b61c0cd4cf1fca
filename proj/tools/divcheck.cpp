#include "divcheck/cli.hpp"

int main(int argc, char** argv) { return divcheck::main_entry(argc, argv); }
