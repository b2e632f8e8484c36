#include "cli.hpp"

int main(int argc, char** argv) { return fdpburst::cli::run(argc, argv); }
