#include "deepchroma/cli.hpp"

int main(int argc, char** argv) { return deepchroma::cli::run(argc, argv); }
