// Copyright 2026 The qwsample Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Batch front end behind the CLI: runs one task of a RunConfig and writes its
// artifacts (chunk files, CSV tables, report.jsonl, manifest.json) to cfg.out.

#include <string>

#include "qwsample/config.hpp"

namespace qws {

/// Returns the manifest JSON text. On failure every file this run created
/// is removed and the error propagates.
std::string run(const RunConfig& cfg);

/// Peak resident set size of the process in KiB.
long max_rss_kib();

}  // namespace qws
