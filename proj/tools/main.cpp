// Copyright (C) 2026 The streammem Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>
#include <string>
#include <vector>

#include "commands.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return streammem::cli::run(args, std::cout, std::cerr);
}
