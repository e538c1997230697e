// SPDX-License-Identifier: Apache-2.0
#include "vistrace/cli/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return vistrace::cli::run(argc, argv, std::cout, std::cerr); }
