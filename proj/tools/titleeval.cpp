#include "titleeval/cli.hpp"

int main(int argc, char** argv) { return titleeval::cli_main(argc, argv); }
