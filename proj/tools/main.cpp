// SPDX-License-Identifier: Apache-2.0
#include "cli.hpp"

#include <iostream>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

int main(int argc, char** argv) {
#if defined(__GLIBC__)
  // Tape buffers are large and short-lived; keep them off mmap so each epoch
  // does not pay for fresh page faults.
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, -1);
#endif
  return gclgcn::run_cli(argc, argv, std::cout, std::cerr);
}
