// Copyright 2026 The shiftlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "shiftlab/cli/commands.hpp"

int main(int argc, char** argv) { return shiftlab::cli::run(argc, argv); }
