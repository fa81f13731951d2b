#include "pflab/runner.hpp"

int main(int argc, char** argv) {
    return pflab::cli::main_impl(argc, argv);
}
