#include "scenalloc/cli.hpp"

int main(int argc, char** argv) { return scenalloc::cli::dispatch(argc, argv); }
