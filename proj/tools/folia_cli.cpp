#include "folia/experiments.hpp"

int main(int argc, char** argv) { return folia::run_cli(argc, argv); }
