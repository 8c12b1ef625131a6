#include "tline/cli.hpp"

int main(int argc, char** argv) { return tline::run_command(argc, argv); }
