// Copyright 2026 The Neurofuzz Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Test double for the campaign harness.
//
//   stub_target [--mode clean|magic|abort|hang|exit] [--coverage FILE] INPUT
//
// clean: reads the input and exits 0.
// magic: dereferences null if the input contains DE AD BE EF, else exits 0.
// abort: calls abort().
// hang:  sleeps for an hour.
// exit:  exits 3 (a rejection, not a crash).
// With --coverage, writes one `stub,<byte>` line per distinct input byte.

#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iterator>
#include <set>
#include <string>

int main(int argc, char** argv) {
  std::string mode = "clean";
  std::string coverage;
  std::string input;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--mode") == 0 && i + 1 < argc) {
      mode = argv[++i];
    } else if (std::strcmp(argv[i], "--coverage") == 0 && i + 1 < argc) {
      coverage = argv[++i];
    } else {
      input = argv[i];
    }
  }
  std::ifstream in(input, std::ios::binary);
  if (!in) {
    std::fprintf(stderr, "stub: cannot open %s\n", input.c_str());
    return 2;
  }
  const std::string bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  if (!coverage.empty() && coverage != "/dev/null") {
    std::set<unsigned char> seen(bytes.begin(), bytes.end());
    std::ofstream out(coverage);
    for (unsigned char b : seen) out << "stub," << static_cast<int>(b) << "\n";
  }
  if (mode == "magic") {
    if (bytes.find("\xDE\xAD\xBE\xEF") != std::string::npos) {
      std::fprintf(stderr, "stub: magic sequence found\n");
      std::fflush(stderr);
      volatile int* p = nullptr;
      *p = 1;
    }
    return 0;
  }
  if (mode == "abort") {
    std::fprintf(stderr, "stub: abort requested\n");
    std::abort();
  }
  if (mode == "hang") {
    ::sleep(3600);
    return 0;
  }
  if (mode == "exit") return 3;
  return 0;
}
