#include "scholarperf/cli.hpp"

int main(int argc, char** argv) { return scholarperf::cli::run(argc, argv); }
