#include "hyprelax/cli.hpp"

int main(int argc, char** argv) { return hyprelax::cli::dispatch(argc, argv); }
