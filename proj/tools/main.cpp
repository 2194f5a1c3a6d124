#include "mpmdp/cli.hpp"

int main(int argc, char** argv) { return mpmdp::cli::run(argc, argv); }
